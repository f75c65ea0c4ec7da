"""Certified complete hyperbolicity from approximate SNAP/SnapPea shapes."""

from importlib import resources

from .certify import CertificationReport, Verdict, certify
from .census import CensusSummary, run_batch
from .estimator import KantorovichCertifier
from .snap import ManifoldProblem, read_manifold_file
from .system import SelectedSystem, build_system, exact_rank

__all__ = [
    "CertificationReport",
    "CensusSummary",
    "KantorovichCertifier",
    "ManifoldProblem",
    "SelectedSystem",
    "Verdict",
    "build_system",
    "certify",
    "exact_rank",
    "fixture_path",
    "read_manifold_file",
    "run_batch",
]

FIXTURES = ("figure8", "whitehead_9872_11111", "largelink")


def fixture_path(name):
    """Path to one of the bundled example manifolds."""
    return resources.files(__package__) / "fixtures" / f"{name}.snap"
