import random
import warnings

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from hypcert import linalg
from hypcert.certify import (NewtonStep, Residual, Verdict, applicability_tests, certify,
                             evaluate_residual, inverse_norms, jacobian, lipschitz_ratio,
                             newton_step, second_partial_bounds)
from hypcert.exceptions import PrereqTestFailed
from hypcert.snap import ManifoldProblem, ShapeDecimal
from hypcert.system import SelectedSystem, build_system

from conftest import NAMES, REPORTED

P = 60


def exact_figure8_shapes():
    z = mpmath.expjpi(mpmath.mpf(1) / 3)
    return [z, z]


def random_system(rng, n):
    t = tuple(tuple(rng.randint(-4, 4) for _ in range(2 * n + 1)) for _ in range(n))
    return SelectedSystem(t=t, selected_consistency_indices=(), n=n, k=0, h=0)


def random_shapes(rng, n):
    return [mpmath.mpc(rng.uniform(-1.5, 2.5), rng.uniform(0.2, 2.0)) for _ in range(n)]


def f_value(system, a):
    return evaluate_residual(system, a).b


def test_exact_solution_is_a_fixed_point(figure8):
    with mp.workdps(P):
        r = certify(figure8, precision=P, shapes=exact_figure8_shapes())
    assert r.verdict is Verdict.CERTIFIED
    assert r.norm_b <= mpmath.mpf(10) ** -(P - 10)
    assert r.norm_hh <= mpmath.mpf(10) ** -(P - 12)
    assert r.tests.all_passed


def test_jacobian_at_i():
    system = SelectedSystem(t=((1, 0, 0),), selected_consistency_indices=(), n=1, k=1, h=0)
    with mp.workdps(P):
        A = jacobian(system, [mpmath.mpc(0, 1)])
        assert abs(A[0, 0] - mpmath.mpc(0, -1)) < mpmath.mpf(10) ** -(P - 2)


def test_residual_constant_column_is_added():
    system = SelectedSystem(t=((0, 0, 1),), selected_consistency_indices=(), n=1, k=1, h=0)
    with mp.workdps(P):
        b = evaluate_residual(system, [mpmath.mpc(0.5, 0.5)]).b[0]
        assert abs(b - mpmath.mpc(0, mpmath.pi)) < mpmath.mpf(10) ** -(P - 2)


def test_figure8_residual_matches_reported(figure8):
    with mp.workdps(P):
        res = evaluate_residual(build_system(figure8), figure8.shape_values())
        expected = mpmath.mpf(REPORTED["figure8"]["norm_b"])
        assert abs(res.norm_b / expected - 1) < mpmath.mpf(10) ** -30


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10 ** 9))
def test_jacobian_matches_central_differences(n, seed):
    rng = random.Random(seed)
    system = random_system(rng, n)
    with mp.workdps(P):
        a = random_shapes(rng, n)
        A = jacobian(system, a)
        eps = mpmath.mpf(10) ** -20
        for j in range(n):
            up = list(a)
            down = list(a)
            up[j] += eps
            down[j] -= eps
            fd = [(x - y) / (2 * eps) for x, y in zip(f_value(system, up), f_value(system, down))]
            for i in range(n):
                scale = max(abs(A[i, j]), 1)
                assert abs(fd[i] - A[i, j]) <= mpmath.mpf(10) ** -15 * scale


def test_mixed_second_partials_vanish():
    rng = random.Random(42)
    n = 4
    system = random_system(rng, n)
    with mp.workdps(P):
        a = random_shapes(rng, n)
        eps = mpmath.mpf(10) ** -20
        for k in range(n):
            up = list(a)
            down = list(a)
            up[k] += eps
            down[k] -= eps
            dA = (jacobian(system, up) - jacobian(system, down)) / (2 * eps)
            for i in range(n):
                for j in range(n):
                    if j != k:
                        assert abs(dA[i, j]) < mpmath.mpf(10) ** -30


def test_diagonal_lipschitz_equals_full_tensor():
    rng = random.Random(3)
    n = 4
    system = random_system(rng, n)
    with mp.workdps(P):
        a = random_shapes(rng, n)
        r = mpmath.mpf("0.01")
        c = second_partial_bounds(system, a, r)
        tensor = [[[c[i][j] if j == k else 0 for k in range(n)] for j in range(n)] for i in range(n)]
        full = mpmath.sqrt(mpmath.fsum(x ** 2 for m in tensor for row in m for x in row))
        assert full == lipschitz_ratio(system, a, r)


def test_second_partials_need_applicability():
    system = SelectedSystem(t=((1, 1, 0),), selected_consistency_indices=(), n=1, k=1, h=0)
    with mp.workdps(P), pytest.raises(PrereqTestFailed):
        lipschitz_ratio(system, [mpmath.mpc(0.5, 0.5)], mpmath.mpf(1))


def _step(a, hh):
    hh = [mpmath.mpmathify(x) for x in hh]
    return NewtonStep(hh=tuple(hh), norm_hh=linalg.vector_norm(hh),
                      a_tilde=tuple(z + d for z, d in zip(a, hh)))


def test_test1_failure_index():
    with mp.workdps(P):
        a = [mpmath.mpc(0.5, 2), mpmath.mpc(0.5, 0.3)]
        tests = applicability_tests(a, _step(a, [0, 0.36]))
        assert not tests.test1 and tests.test1.index == 1
        assert tests.first_failure() == ("test1", 1)


def test_test2_failure():
    with mp.workdps(P):
        a = [mpmath.mpc(0.5, 0.5)]
        tests = applicability_tests(a, _step(a, [mpmath.mpc(0, 0.36)]))
        assert tests.test1 and not tests.test2 and tests.test2.index == 0


def test_test3_failure():
    with mp.workdps(P):
        a = [mpmath.mpc(0.8, 0.2)]
        tests = applicability_tests(a, _step(a, [mpmath.mpc(0, 0.15)]))
        assert tests.test1 and tests.test2 and not tests.test3


def test_tests_are_strict():
    with mp.workdps(P):
        a = [mpmath.mpc(0, 1)]
        # |hh| exactly |a|/2 fails test 2
        tests = applicability_tests(a, _step(a, [mpmath.mpc(0, 0.5)]))
        assert not tests.test2


def test_newton_step_trivial():
    with mp.workdps(P):
        a = [mpmath.mpc(0.5, 0.5)] * 2
        zero = newton_step(mpmath.eye(2), Residual(b=(0, 0), norm_b=0), a)
        assert zero.norm_hh == 0 and zero.a_tilde == tuple(a)
        b = (mpmath.mpc(1, 2), mpmath.mpc(-3, 0))
        step = newton_step(mpmath.eye(2), Residual(b=b, norm_b=linalg.vector_norm(b)), a)
        assert step.hh == tuple(-x for x in b)


def test_figure8_step_is_tiny(certified):
    r = certified("figure8")
    assert r.norm_hh <= mpmath.mpf("1e-27")
    assert r.step_residual <= mpmath.mpf(10) ** -(P - 10) * max(1, r.norm_b)


def test_inverse_norms_identity():
    with mp.workdps(P):
        sup, frob = inverse_norms(mpmath.eye(4))
        assert abs(sup - 1) < mpmath.mpf(10) ** -(P - 5)
        assert abs(frob - 2) < mpmath.mpf(10) ** -(P - 5)


@pytest.mark.parametrize("name", NAMES)
def test_reported_values(name, certified):
    r = certified(name)
    tol = mpmath.mpf(10) ** (-25 if name == "largelink" else -30)
    with mp.workdps(P):
        for key, value in REPORTED[name].items():
            got = getattr(r, key)
            assert abs(got / mpmath.mpf(value) - 1) <= tol, key


@pytest.mark.parametrize("name", NAMES)
def test_norm_ordering(name, certified):
    r = certified(name)
    assert r.norm_sup <= r.norm_len
    assert r.threshold_sup >= r.threshold_len
    assert not r.pass_len or r.pass_sup


@pytest.mark.parametrize("name", NAMES)
def test_branch_sanity(name, problems):
    with mp.workdps(P):
        for z in problems[name].shape_values():
            assert 0 < mpmath.im(mpmath.log(z)) < mpmath.pi
            assert -mpmath.pi < mpmath.im(mpmath.log(1 - z)) < 0


@pytest.mark.parametrize("name", NAMES)
def test_precision_monotonicity(name, certified):
    outcomes = set()
    for p in (60, 80, 100):
        r = certified(name, p)
        outcomes.add((r.verdict, r.tests.test1.passed, r.tests.test2.passed,
                      r.tests.test3.passed, r.pass_sup, r.pass_len))
    assert len(outcomes) == 1


def test_far_shapes_are_inapplicable(figure8):
    r = certify(figure8, shapes=[0.5 + 0.5j] * 2)
    assert r.verdict is Verdict.INAPPLICABLE
    assert r.stage == "applicability tests"
    assert r.reason == "test2 failure at atilde[1]"
    assert r.lipschitz_l is None


def test_shape_on_real_axis_is_inapplicable(figure8):
    r = certify(figure8, shapes=[0.5, 0.5 + 0.5j])
    assert r.verdict is Verdict.INAPPLICABLE
    assert "BranchCutProximity" in r.reason and r.stage == "residual"


def test_singular_jacobian():
    # two identical rows give rank n in neither block and stop at selection
    shapes = (ShapeDecimal("0.5", "0.8"),)
    p = ManifoldProblem(name="s", n=1, k=1, h=0, shapes=shapes, fg=((0, 0, 0), (0, 0, 0)))
    r = certify(p)
    assert r.verdict is Verdict.INAPPLICABLE and r.stage == "rank selection"


def test_norm_modes(figure8):
    for mode in ("sup", "len", "both"):
        assert certify(figure8, norm=mode).verdict is Verdict.CERTIFIED
    with pytest.raises(ValueError):
        certify(figure8, norm="max")


def test_minimum_precision(figure8):
    with pytest.raises(ValueError):
        certify(figure8, precision=20)


def test_large_system_warns():
    n = 41
    shapes = tuple(ShapeDecimal("0.5", "0.8660254037844386467637231707") for _ in range(n))
    fg = tuple(tuple(int(i == j) for j in range(2 * n + 1)) for i in range(n + 1))
    p = ManifoldProblem(name="big", n=n, k=1, h=0, shapes=shapes, fg=fg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        certify(p, precision=60)
    assert any("precision >= 80" in str(w.message) for w in caught)


def test_ambient_precision_untouched(figure8):
    mp.dps = 15
    certify(figure8, precision=100)
    assert mp.dps == 15
