import math
import logging

import numpy as np

from tqdm import tqdm
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

from PythonScripts.FileManagement import extract_verification_defaults, worker_count
from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.GeometryScripts.SimplexGeometry import (
    RELATIVE_TOLERANCE, circumcenter, equatorial_ball_test, equatorial_margin, height_ratios, is_k_well_centered,
    normalized_volume, signed_height, vertex_angles
)
from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig
from PythonScripts.QualityScripts.Energies import energy_Einfty, energy_Ep
from PythonScripts.ConnectivityScripts.Delaunay import is_locally_delaunay, orientation
from PythonScripts.ConnectivityScripts.Triangulations import (
    TriangulationSet, enumerate_triangulations, optimal_triangulation, triangulation_mesh
)
from PythonScripts.VerificationScripts.MeshFixtures import random_planar_mesh


logger = logging.getLogger(__name__)

_defaults = extract_verification_defaults()

P_LIMIT_POWERS = (2, 4, 8, 16, 32, 64)
P_LIMIT_GAP = 0.05
MARGIN_EXCLUSION = 1e-8
REGULAR_SIMPLICES = {
    2: np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]]),
    3: np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]),
}


@dataclass
class SuiteResult:
    """
    :param name: Property checked.
    :param samples: Number of instances generated.
    :param excluded: Instances skipped as too close to a boundary case to decide in floating point.
    :param failures: Descriptions of the instances that violated the property.
    """
    name: str
    samples: int = 0
    excluded: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        if len(self.failures) < 20:
            self.failures.append(message)
        else:
            logger.debug("%s: %s", self.name, message)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "samples": self.samples,
            "excluded": self.excluded,
            "failures": list(self.failures),
        }


# _________________________Samplers_________________________
def random_simplex(rng: np.random.Generator, n: int, min_normalized_volume: float = None) -> np.ndarray:
    """
    n+1 vertices drawn uniformly from the unit cube [0, 1]^n, redrawn until the normalized volume reaches
    min_normalized_volume.
    """
    threshold = _defaults["min_normalized_volume"] if min_normalized_volume is None else min_normalized_volume
    while True:
        simplex = rng.uniform(0.0, 1.0, (n + 1, n))
        if normalized_volume(simplex) >= threshold:
            return simplex


def random_point_set(rng: np.random.Generator, max_points: int) -> np.ndarray:
    """
    Between 4 and max_points points uniform in the unit square, redrawn until no three are nearly collinear.
    """
    while True:
        points = rng.uniform(0.0, 1.0, (int(rng.integers(4, max_points + 1)), 2))
        triples = (abs(orientation(points[a], points[b], points[c]))
                   for a in range(len(points)) for b in range(a + 1, len(points)) for c in range(b + 1, len(points)))
        if min(triples) > 1e-6:
            return points


def _progress(iterable, description: str, show_progress: bool):
    return tqdm(iterable, desc=description, disable=not show_progress)


# _________________________Simplex Suites_________________________
def characterization_suite(samples: int, seed: int, dimensions: Sequence[int] = (2, 3),
                           show_progress: bool = False) -> SuiteResult:
    """
    The equatorial-ball test agrees with circumcenter containment on random simplices; samples whose
    relative margin is within 1e-8 of the boundary case are excluded, not failed.
    """
    result = SuiteResult("characterization: equatorial balls vs circumcenter containment")
    for n in dimensions:
        rng = np.random.default_rng([seed, n, 1])
        for sample in _progress(range(samples), f"characterization n={n}", show_progress):
            simplex = random_simplex(rng, n)
            result.samples += 1
            if equatorial_margin(simplex) <= MARGIN_EXCLUSION:
                result.excluded += 1
                continue

            if equatorial_ball_test(simplex) != is_k_well_centered(simplex, n):
                result.fail(f"n={n} sample {sample}: tests disagree")

    return result


def identities_suite(samples: int, seed: int, dimensions: Sequence[int] = (2, 3),
                     show_progress: bool = False) -> SuiteResult:
    """
    h² + R(facet)² = R², h/R = cos(angle) for triangles, and similarity invariance of h/R.
    """
    result = SuiteResult("identities: Pythagorean relation, cosine identity, similarity invariance")
    for n in dimensions:
        rng = np.random.default_rng([seed, n, 2])
        for sample in _progress(range(samples), f"identities n={n}", show_progress):
            simplex = random_simplex(rng, n)
            result.samples += 1
            _, radius = circumcenter(simplex)

            for i in range(n + 1):
                height = signed_height(i, simplex)
                _, facet_radius = circumcenter(np.delete(simplex, i, axis=0))
                if abs(height ** 2 + facet_radius ** 2 - radius ** 2) > RELATIVE_TOLERANCE * radius ** 2:
                    result.fail(f"n={n} sample {sample} vertex {i}: Pythagorean relation violated")

            ratios = height_ratios(simplex)
            if n == 2 and np.max(np.abs(ratios - np.cos(vertex_angles(simplex)))) > RELATIVE_TOLERANCE:
                result.fail(f"sample {sample}: h/R differs from cos(angle)")

            rotation, _ = np.linalg.qr(rng.normal(size=(n, n)))
            moved = 3.7 * simplex @ rotation.T + rng.uniform(-5.0, 5.0, n)
            if np.max(np.abs(height_ratios(moved) - ratios)) > RELATIVE_TOLERANCE:
                result.fail(f"n={n} sample {sample}: h/R changed under a similarity transform")

    return result


def height_bound_suite(samples: int, seed: int, dimensions: Sequence[int] = (2, 3),
                       show_progress: bool = False) -> SuiteResult:
    """
    min_i h_i/R <= 1/n for every simplex, with equality (to 1e-12) for the regular simplex.
    """
    result = SuiteResult("height bound: min h/R <= 1/n, attained by the regular simplex")
    for n in dimensions:
        regular = height_ratios(REGULAR_SIMPLICES[n])
        if np.max(np.abs(regular - 1.0 / n)) > 1e-12:
            result.fail(f"n={n}: regular simplex has h/R {regular.tolist()}")

        rng = np.random.default_rng([seed, n, 3])
        for sample in _progress(range(samples), f"height bound n={n}", show_progress):
            result.samples += 1
            if height_ratios(random_simplex(rng, n)).min() > 1.0 / n + RELATIVE_TOLERANCE:
                result.fail(f"n={n} sample {sample}: min h/R exceeds 1/n")

    return result


def p_limit_suite(meshes: int, seed: int, show_progress: bool = False) -> SuiteResult:
    """
    (E_p)^(1/p) approaches 2·E_∞ from above: within 5% at p = 64, with the gap shrinking as p grows.
    """
    result = SuiteResult("p-limit: (E_p)^(1/p) -> 2 E_inf")
    rng = np.random.default_rng([seed, 4])
    for sample in _progress(range(meshes), "p-limit", show_progress):
        mesh = random_planar_mesh(rng)
        result.samples += 1
        target = 2.0 * energy_Einfty(mesh)
        if target == 0.0:
            result.excluded += 1
            continue

        gaps = [abs(energy_Ep(mesh, EnergyConfig(p=p)) ** (1.0 / p) - target) / target for p in P_LIMIT_POWERS]
        if gaps[-1] >= P_LIMIT_GAP:
            result.fail(f"mesh {sample}: gap {gaps[-1]:.4f} at p=64")

        if any(later > earlier * (1.0 + 1e-12) + 1e-15 for earlier, later in zip(gaps, gaps[1:])):
            result.fail(f"mesh {sample}: gaps {gaps} do not decrease with p")

    return result


# _________________________Point-Set Suites_________________________
def _extended_cosine_energy(points: np.ndarray, triangulation) -> float:
    """
    max over angles of f(θ), f(θ) = |2cos θ - 1| on [π/2, π] and θ/(π/2) below, an increasing function.
    """
    angles = Bg.triangle_angles(triangulation_mesh(points, triangulation).cell_coordinates).ravel()
    values = np.where(angles >= math.pi / 2, np.abs(2.0 * np.cos(angles) - 1.0), angles / (math.pi / 2))
    return float(values.max())


def _is_acute(points: np.ndarray, triangulation) -> bool:
    return all(is_k_well_centered(points[list(triangle)], 2) for triangle in triangulation)


def _as_set(triangulations) -> set:
    return set(triangulations)


def point_set_suites(point_sets: int, max_points: int, seed: int, show_progress: bool = False) -> List[SuiteResult]:
    """
    Exhaustive checks over every triangulation of random small point sets:
    acute triangulations are locally Delaunay; minimizing an increasing angle function selects the minmax
    triangulations; E_cos and E_max share minimizers when no triangulation is acute; an acute triangulation,
    when one exists, is unique, Delaunay and the unique minmax triangulation.
    """
    delaunay_result = SuiteResult("acute triangulations are locally Delaunay")
    increasing_result = SuiteResult("increasing angle functions select minmax triangulations")
    cosine_result = SuiteResult("E_cos and E_max minimizers agree without acute triangulations")
    unique_result = SuiteResult("acute triangulation is unique, Delaunay and minmax")

    rng = np.random.default_rng([seed, 5])
    for sample in _progress(range(point_sets), "point sets", show_progress):
        points = random_point_set(rng, max_points)
        triangulations: TriangulationSet = enumerate_triangulations(points)
        for result in (delaunay_result, increasing_result, cosine_result, unique_result):
            result.samples += 1

        acute = [t for t in triangulations.triangulations if _is_acute(points, t)]
        for triangulation in acute:
            if not is_locally_delaunay(triangulation_mesh(points, triangulation)):
                delaunay_result.fail(f"point set {sample}: acute triangulation is not locally Delaunay")

        minmax = _as_set(optimal_triangulation(points, "Emax", triangulations))
        values = [_extended_cosine_energy(points, t) for t in triangulations.triangulations]
        extended = {t for t, value in zip(triangulations.triangulations, values) if value - min(values) <= 1e-12}
        if not extended <= minmax:
            increasing_result.fail(f"point set {sample}: extended-cosine minimizer is not minmax")

        if not acute:
            if _as_set(optimal_triangulation(points, "Ecos", triangulations)) != minmax:
                cosine_result.fail(f"point set {sample}: E_cos and E_max minimizers differ")
        else:
            cosine_result.excluded += 1
            delaunay = triangulations.triangulations[0]
            if len(acute) != 1 or acute[0] != delaunay or minmax != {delaunay}:
                unique_result.fail(f"point set {sample}: {len(acute)} acute triangulations, minmax {len(minmax)}")

        if not acute:
            unique_result.excluded += 1

    return [delaunay_result, increasing_result, cosine_result, unique_result]


# _________________________Runner_________________________
def run_all_suites(samples: int = None, seed: int = None, show_progress: bool = False) -> List[SuiteResult]:
    """
    Run every suite, in parallel threads when WC_THREADS allows. Results come back in a fixed order and each
    suite draws from its own seeded generator, so the outcome does not depend on the thread count.
    """
    samples = _defaults["samples"] if samples is None else samples
    seed = _defaults["seed"] if seed is None else seed

    jobs: List[Callable[[], object]] = [
        lambda: characterization_suite(samples, seed, show_progress=show_progress),
        lambda: identities_suite(samples, seed, show_progress=show_progress),
        lambda: height_bound_suite(samples, seed, show_progress=show_progress),
        lambda: p_limit_suite(_defaults["p_limit_meshes"], seed, show_progress=show_progress),
        lambda: point_set_suites(_defaults["point_sets"], _defaults["max_points"], seed, show_progress=show_progress),
    ]

    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        outcomes = list(executor.map(lambda job: job(), jobs))

    results = []
    for outcome in outcomes:
        results.extend(outcome if isinstance(outcome, list) else [outcome])

    for result in results:
        logger.info("%s: %s (%d samples, %d excluded)", result.name, "pass" if result.passed else "FAIL",
                    result.samples, result.excluded)

    return results
