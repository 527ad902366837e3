import logging

import numpy as np

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from PythonScripts.GeometryScripts.SimplexGeometry import DegenerateSimplexError, circumcenter
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh


logger = logging.getLogger(__name__)

# Relative band (of the circumradius) inside which a point counts as on the circumsphere.
INSPHERE_TOLERANCE = 1e-9

Triangle = Tuple[int, int, int]
Edge = Tuple[int, int]


class DegenerateInputError(ValueError):
    """Raised for point sets without a 2D triangulation: fewer than 3 points, duplicates or all collinear."""


@dataclass
class DelaunayCheck:
    is_delaunay: bool
    violations: List[Tuple[int, ...]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.is_delaunay


# _________________________Predicates_________________________
def orientation(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> float:
    """
    Twice the signed area of triangle abc; positive for counterclockwise order.
    """
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def strictly_inside_circumsphere(simplex: np.ndarray, point: np.ndarray) -> bool:
    """
    True when point lies inside the circumball of simplex by more than the relative tolerance band.

    :raises DegenerateSimplexError: If the simplex is degenerate.
    """
    center, radius = circumcenter(simplex)
    return float(np.linalg.norm(point - center)) < radius * (1.0 - INSPHERE_TOLERANCE)


def is_strictly_convex_quad(points: np.ndarray, a: int, b: int, c: int, d: int) -> bool:
    """
    True when the quadrilateral formed by the triangles (a, b, c) and (a, b, d) is strictly convex, i.e.
    the diagonals ab and cd cross at an interior point of both.
    """
    pa, pb, pc, pd = points[a], points[b], points[c], points[d]
    scale = max(float(np.ptp(points[[a, b, c, d]], axis=0).max()), 1e-300) ** 2
    tolerance = 1e-12 * scale
    ab_c, ab_d = orientation(pa, pb, pc), orientation(pa, pb, pd)
    cd_a, cd_b = orientation(pc, pd, pa), orientation(pc, pd, pb)
    return (ab_c * ab_d < 0.0 and cd_a * cd_b < 0.0 and
            min(abs(ab_c), abs(ab_d), abs(cd_a), abs(cd_b)) > tolerance)


# _________________________Verification_________________________
def _opposite_vertex(cell: Sequence[int], facet: Tuple[int, ...]) -> int:
    return next(vertex for vertex in cell if vertex not in facet)


def is_locally_delaunay(mesh: SimplicialMesh) -> DelaunayCheck:
    """
    Empty-circumball test across every interior facet.

    A facet violates the test when the opposite vertex of either incident cell lies strictly inside the
    circumball of the other cell (closer to its center than R·(1 - 1e-9)). Cocircular configurations pass.
    A degenerate incident cell has no circumball and marks its facets as violating.

    :return: DelaunayCheck with the violating interior facets in ascending order.
    """
    violations = []
    cells = mesh.cells.tolist()
    for facet in mesh.interior_facets:
        first, second = mesh.facet_incidence[facet]
        try:
            violated = any(
                strictly_inside_circumsphere(mesh.vertices[cells[own]],
                                             mesh.vertices[_opposite_vertex(cells[other], facet)])
                for own, other in ((first, second), (second, first))
            )
        except DegenerateSimplexError:
            violated = True

        if violated:
            violations.append(facet)

    return DelaunayCheck(is_delaunay=not violations, violations=violations)


# _________________________Construction_________________________
def canonical_triangle(points: np.ndarray, triangle: Sequence[int]) -> Triangle:
    """
    Smallest index first, counterclockwise.
    """
    a, b, c = sorted(int(vertex) for vertex in triangle)
    return (a, b, c) if orientation(points[a], points[b], points[c]) > 0.0 else (a, c, b)


def edge_map(triangles: Sequence[Triangle]) -> Dict[Edge, List[int]]:
    owners: Dict[Edge, List[int]] = {}
    for index, triangle in enumerate(triangles):
        for i in range(3):
            edge = tuple(sorted((triangle[i], triangle[(i + 1) % 3])))
            owners.setdefault(edge, []).append(index)

    return owners


def flip_edge(points: np.ndarray, triangles: List[Triangle], owners: Dict[Edge, List[int]],
              edge: Edge) -> Tuple[Triangle, Triangle]:
    """
    The two triangles replacing those sharing edge (a, b); the caller checks convexity.
    """
    a, b = edge
    first, second = (triangles[index] for index in owners[edge])
    c = next(vertex for vertex in first if vertex not in edge)
    d = next(vertex for vertex in second if vertex not in edge)
    return canonical_triangle(points, (a, c, d)), canonical_triangle(points, (b, c, d))


def validate_point_set(points: Sequence) -> np.ndarray:
    """
    :raises DegenerateInputError: Fewer than 3 points, duplicate points or all points collinear.
    :raises ValueError: If the coordinates are not finite 2D points.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError(f"Expected 2D points of shape (count, 2), got {points.shape}")

    if not np.all(np.isfinite(points)):
        raise ValueError("Point coordinates must be finite")

    if len(points) < 3:
        raise DegenerateInputError(f"A triangulation needs at least 3 points, got {len(points)}")

    if len(np.unique(points, axis=0)) != len(points):
        raise DegenerateInputError("Point set contains duplicate points")

    if not any(orientation(points[0], points[1], point) != 0.0 for point in points[2:]):
        raise DegenerateInputError("All points are collinear")

    return points


def _sweep_triangulation(points: np.ndarray) -> List[Triangle]:
    """
    Lexicographic sweep: every new point lies outside the current hull and is joined to the hull edges it sees.
    """
    order = sorted(range(len(points)), key=lambda index: (points[index][0], points[index][1]))

    chain_end = 2
    while orientation(points[order[0]], points[order[1]], points[order[chain_end]]) == 0.0:
        chain_end += 1

    chain, apex = order[:chain_end], order[chain_end]
    triangles = [canonical_triangle(points, (chain[i], chain[i + 1], apex)) for i in range(len(chain) - 1)]
    if orientation(points[chain[0]], points[chain[1]], points[apex]) > 0.0:
        hull = chain + [apex]
    else:
        hull = [chain[0], apex] + chain[:0:-1]

    for point in order[chain_end + 1:]:
        size = len(hull)
        visible = [orientation(points[hull[i]], points[hull[(i + 1) % size]], points[point]) < 0.0
                   for i in range(size)]
        start = next(i for i in range(size) if visible[i] and not visible[i - 1])
        hull = hull[start:] + hull[:start]
        visible = visible[start:] + visible[:start]

        run = 0
        while run < size and visible[run]:
            triangles.append(canonical_triangle(points, (hull[run], hull[(run + 1) % size], point)))
            run += 1

        hull = [hull[0], point] + hull[run:]

    return triangles


def _legalize(points: np.ndarray, triangles: List[Triangle]) -> List[Triangle]:
    """
    Lawson flips until no interior edge has its opposite vertex strictly inside a neighbor's circumcircle.
    """
    flips = 0
    changed = True
    while changed:
        changed = False
        owners = edge_map(triangles)
        for edge in sorted(owners):
            if len(owners[edge]) != 2:
                continue

            first, second = owners[edge]
            c = next(vertex for vertex in triangles[first] if vertex not in edge)
            d = next(vertex for vertex in triangles[second] if vertex not in edge)
            if not strictly_inside_circumsphere(points[list(triangles[first])], points[d]):
                continue

            if not is_strictly_convex_quad(points, edge[0], edge[1], c, d):
                continue

            replacement = flip_edge(points, triangles, owners, edge)
            triangles[first], triangles[second] = replacement
            flips += 1
            changed = True
            break

    logger.debug("Delaunay legalization used %d flips", flips)
    return triangles


def delaunay_triangulation(points: Sequence) -> np.ndarray:
    """
    Delaunay triangulation of a planar point set by lexicographic incremental insertion followed by
    Lawson flips, verified with is_locally_delaunay.

    Every point is a vertex of the result, including points on hull edges.

    :param points: Array of shape (count, 2).
    :return: Counterclockwise triangles, shape (triangle count, 3), in canonical sorted order.
    :raises DegenerateInputError: For fewer than 3 points, duplicates or collinear input.
    """
    points = validate_point_set(points)
    triangles = sorted(_legalize(points, _sweep_triangulation(points)))

    check = is_locally_delaunay(SimplicialMesh.from_arrays(points, triangles))
    if not check:
        logger.warning("Delaunay construction left %d non-Delaunay edges", len(check.violations))

    return np.array(triangles, dtype=np.int64)
