import json
import logging

import numpy as np

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

from scipy.spatial import ConvexHull

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.QualityScripts.Energies import energy_cos, energy_max, energy_min
from PythonScripts.ConnectivityScripts.Delaunay import (
    DegenerateInputError, Triangle, canonical_triangle, delaunay_triangulation, edge_map, flip_edge,
    is_strictly_convex_quad, orientation, validate_point_set
)


logger = logging.getLogger(__name__)

MAX_ENUMERATION_POINTS = 10
TIE_TOLERANCE = 1e-12

Triangulation = Tuple[Triangle, ...]


class TooManyPointsError(ValueError):
    """Raised when exhaustive enumeration is requested for more points than it can handle."""


@dataclass
class TriangulationSet:
    """
    All admissible triangulations of a planar point set, each a tuple of counterclockwise triangles.

    Order is breadth-first discovery order from the Delaunay triangulation, which is always first.
    """
    points: np.ndarray
    triangulations: List[Triangulation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.triangulations)

    @staticmethod
    def edge_set(triangulation: Triangulation) -> List[Tuple[int, int]]:
        return sorted(edge_map(triangulation))

    def to_json(self) -> str:
        return json.dumps({
            "points": self.points.tolist(),
            "triangulations": [[list(edge) for edge in self.edge_set(t)] for t in self.triangulations],
        }, indent=2)


def _key(triangulation: Sequence[Triangle]) -> Triangulation:
    return tuple(sorted(triangulation))


def _neighbors(points: np.ndarray, triangulation: Triangulation) -> List[Triangulation]:
    triangles = list(triangulation)
    owners = edge_map(triangles)
    neighbors = []
    for edge in sorted(owners):
        if len(owners[edge]) != 2:
            continue

        first, second = owners[edge]
        c = next(vertex for vertex in triangles[first] if vertex not in edge)
        d = next(vertex for vertex in triangles[second] if vertex not in edge)
        if not is_strictly_convex_quad(points, edge[0], edge[1], c, d):
            continue

        flipped = list(triangles)
        flipped[first], flipped[second] = flip_edge(points, triangles, owners, edge)
        neighbors.append(_key(flipped))

    return neighbors


def enumerate_triangulations(points: Sequence) -> TriangulationSet:
    """
    Every triangulation of the point set that covers its convex hull, found by breadth-first search of the
    edge-flip graph starting from the Delaunay triangulation.

    :param points: At most 10 planar points.
    :raises TooManyPointsError: For more than 10 points.
    :raises DegenerateInputError: For fewer than 3 points, duplicates or collinear input.
    """
    points = np.asarray(points, dtype=float)
    if len(points) > MAX_ENUMERATION_POINTS:
        raise TooManyPointsError(f"Enumeration supports at most {MAX_ENUMERATION_POINTS} points, got {len(points)}")

    points = validate_point_set(points)
    start = _key(canonical_triangle(points, triangle) for triangle in delaunay_triangulation(points))

    seen = {start}
    found = [start]
    queue = deque([start])
    while queue:
        for neighbor in _neighbors(points, queue.popleft()):
            if neighbor not in seen:
                seen.add(neighbor)
                found.append(neighbor)
                queue.append(neighbor)

    logger.debug("Enumerated %d triangulations of %d points", len(found), len(points))
    return TriangulationSet(points=points, triangulations=found)


# _________________________Soundness_________________________
def _interiors_overlap(points: np.ndarray, first: Triangle, second: Triangle, tolerance: float) -> bool:
    """
    Separating-axis test on the edges of two counterclockwise triangles.
    """
    for own, other in ((first, second), (second, first)):
        for i in range(3):
            a, b = points[own[i]], points[own[(i + 1) % 3]]
            if all(orientation(a, b, points[vertex]) <= tolerance for vertex in other):
                return False

    return True


def covers_convex_hull(points: np.ndarray, triangulation: Triangulation, relative_tolerance: float = 1e-9) -> bool:
    """
    True when the triangles are positively oriented, pairwise interior-disjoint and their areas add up to the
    convex hull area.
    """
    areas = [0.5 * orientation(points[a], points[b], points[c]) for a, b, c in triangulation]
    hull_area = ConvexHull(points).volume
    if min(areas) <= 0.0 or abs(sum(areas) - hull_area) > relative_tolerance * hull_area:
        return False

    tolerance = relative_tolerance * hull_area
    return not any(
        _interiors_overlap(points, triangulation[i], triangulation[j], tolerance)
        for i in range(len(triangulation)) for j in range(i + 1, len(triangulation))
    )


# _________________________Optimal Triangulations_________________________
_CRITERIA: Dict[str, Tuple[Callable[[SimplicialMesh], float], bool]] = {
    "Ecos": (energy_cos, False),
    "Emax": (energy_max, False),
    "Emin": (energy_min, True),
}


def triangulation_mesh(points: np.ndarray, triangulation: Triangulation) -> SimplicialMesh:
    return SimplicialMesh.from_arrays(points, np.array(triangulation, dtype=np.int64))


def triangulation_energy(points: np.ndarray, triangulation: Triangulation, criterion: str) -> float:
    measure, _ = _CRITERIA[criterion]
    return measure(triangulation_mesh(points, triangulation))


def optimal_triangulation(points: Sequence, criterion: str = "Emax",
                          triangulations: TriangulationSet = None) -> List[Triangulation]:
    """
    All triangulations that are optimal under the criterion, ties (within 1e-12) kept.

    Ecos and Emax are minimized; Emin (the smallest angle) is maximized.

    :param points: Planar point set, as for enumerate_triangulations.
    :param criterion: One of "Ecos", "Emax", "Emin".
    :param triangulations: A previously computed enumeration of the same points.
    :raises ValueError: For an unknown criterion.
    """
    if criterion not in _CRITERIA:
        raise ValueError(f"Unknown criterion {criterion!r}; expected one of {sorted(_CRITERIA)}")

    if triangulations is None:
        triangulations = enumerate_triangulations(points)

    _, maximize = _CRITERIA[criterion]
    values = [triangulation_energy(triangulations.points, t, criterion) for t in triangulations.triangulations]
    best = max(values) if maximize else min(values)

    return [t for t, value in zip(triangulations.triangulations, values) if abs(value - best) <= TIE_TOLERANCE]
