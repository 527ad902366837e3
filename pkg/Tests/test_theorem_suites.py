import numpy as np
import pytest

from PythonScripts.GeometryScripts.SimplexGeometry import normalized_volume
from PythonScripts.ConnectivityScripts.Delaunay import orientation
from PythonScripts.VerificationScripts import TheoremSuites as Ts


@pytest.fixture
def small_defaults(monkeypatch):
    monkeypatch.setitem(Ts._defaults, "p_limit_meshes", 4)
    monkeypatch.setitem(Ts._defaults, "point_sets", 6)
    monkeypatch.setitem(Ts._defaults, "max_points", 6)


def test_samplers_respect_their_rejection_rules():
    rng = np.random.default_rng(0)
    for n in (2, 3):
        assert normalized_volume(Ts.random_simplex(rng, n, 1e-2)) >= 1e-2

    points = Ts.random_point_set(rng, 6)
    assert 4 <= len(points) <= 6
    assert min(abs(orientation(points[a], points[b], points[c]))
               for a in range(len(points)) for b in range(a + 1, len(points))
               for c in range(b + 1, len(points))) > 1e-6


@pytest.mark.parametrize("suite", [Ts.characterization_suite, Ts.identities_suite, Ts.height_bound_suite])
def test_simplex_suites_pass(suite):
    result = suite(300, seed=1)
    assert result.passed, result.failures
    assert result.samples == 600
    assert result.excluded <= result.samples


def test_p_limit_suite_passes():
    result = Ts.p_limit_suite(6, seed=2)
    assert result.passed, result.failures
    assert result.samples == 6


def test_point_set_suites_pass():
    results = Ts.point_set_suites(8, 6, seed=3)
    assert len(results) == 4
    for result in results:
        assert result.passed, (result.name, result.failures)
        assert result.samples == 8

    cosine, unique = results[2], results[3]
    assert cosine.excluded + unique.excluded == 8


def test_suite_result_keeps_the_first_failures():
    result = Ts.SuiteResult("demo", samples=30)
    for index in range(25):
        result.fail(f"sample {index}")

    payload = result.to_dict()
    assert not payload["passed"]
    assert len(payload["failures"]) == 20
    assert payload["failures"][0] == "sample 0"
    assert Ts.SuiteResult("empty").passed


def test_run_all_suites_order_and_determinism(small_defaults, monkeypatch):
    first = [result.to_dict() for result in Ts.run_all_suites(samples=50, seed=4)]
    monkeypatch.setenv("WC_THREADS", "3")
    second = [result.to_dict() for result in Ts.run_all_suites(samples=50, seed=4)]

    assert first == second
    assert len(first) == 8
    assert first[0]["name"].startswith("characterization")
    assert first[3]["name"].startswith("p-limit")
    assert all(result["passed"] for result in first)
