import pytest
from mpmath import mp

from hypcert import fixture_path, read_manifold_file

# Reported values for the three worked examples (40 significant digits).
REPORTED = {
    "figure8": {
        "norm_b": "1.296666384352891444530724934775173278518e-28",
        "lipschitz_l": "4.472135954999579392818347339211785668123",
        "norm_sup": "1.592226038754547070932399593119376104348",
        "norm_len": "1.632993161855452065464856049716587347937",
        "threshold_sup": "0.04410070808503045666350407221846082500302",
        "threshold_len": "0.04192627457812105680767200627679720162466",
    },
    "whitehead_9872_11111": {
        "norm_b": "6.290546043622649509854067366063508951285e-24",
        "lipschitz_l": "56237.01131396100111291495604741250466464",
        "norm_sup": "1.063909899076773471157618529051471308315",
        "norm_len": "1.235415661324873497175222236812823735348",
        "threshold_sup": "0.000007854853193291278165225494981053686965848",
        "threshold_len": "0.000005825343870778317976532920417278552662252",
    },
    "largelink": {
        "norm_b": "2.890741236697218507543429035402903716418e-27",
        "lipschitz_l": "38.46960927036768465200292167581178343887",
        "norm_sup": "8.212846275527759925085525656342053316915",
        "norm_len": "10.32145710779244812406937753131330598443",
        "threshold_sup": "0.0001926925132239904423664849871566682428236",
        "threshold_len": "0.0001220029142841818172845137711227723107218",
    },
}

NAMES = tuple(REPORTED)


@pytest.fixture(scope="session")
def problems():
    return {name: read_manifold_file(fixture_path(name)) for name in NAMES}


@pytest.fixture
def figure8(problems):
    return problems["figure8"]


@pytest.fixture
def whitehead(problems):
    return problems["whitehead_9872_11111"]


@pytest.fixture
def largelink(problems):
    return problems["largelink"]


@pytest.fixture(autouse=True)
def _restore_mp_precision():
    dps = mp.dps
    yield
    mp.dps = dps


# one PASS/FAIL line per acceptance criterion, printed after the run

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        _CRITERIA.append((marker.args[0], rep.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _CRITERIA:
        status = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{status}  {label}")


@pytest.fixture(scope="session")
def certified(problems):
    """Memoised ``certify`` runs keyed by (fixture name, precision)."""
    from hypcert import certify

    cache = {}

    def run(name, precision=60):
        key = (name, precision)
        if key not in cache:
            cache[key] = certify(problems[name], precision=precision)
        return cache[key]

    return run
