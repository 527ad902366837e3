import math
import itertools

import numpy as np

from dataclasses import dataclass
from typing import Sequence, Tuple

from scipy.spatial.distance import pdist


# _________________________Tolerances_________________________
DEGENERACY_THRESHOLD = 1e-12
RELATIVE_TOLERANCE = 1e-9


class DegenerateSimplexError(ValueError):
    """
    Raised when a simplex (or one of its faces) is too flat for its circumcenter to be meaningful.

    Energy code catches it and applies the h/R = -1 convention.
    """

    def __init__(self, dimension: int, message: str = ""):
        self.dimension = dimension
        super().__init__(message or f"Degenerate {dimension}-simplex")


@dataclass(frozen=True)
class SimplexGeometry:
    """
    Derived quantities of a single simplex: circumcenter, circumradius and one signed height per vertex.

    A degenerate simplex has its circumcenter at infinity; its heights are reported as -R so that every
    height ratio is exactly -1.
    """
    circumcenter: np.ndarray
    circumradius: float
    heights: np.ndarray
    degenerate: bool

    @property
    def height_ratios(self) -> np.ndarray:
        if self.degenerate:
            return np.full(len(self.heights), -1.0)

        return self.heights / self.circumradius


# _________________________Helpers_________________________
def _as_points(simplex_vertices: Sequence) -> np.ndarray:
    points = np.atleast_2d(np.asarray(simplex_vertices, dtype=float))
    if not np.all(np.isfinite(points)):
        raise ValueError("Simplex coordinates must be finite")

    return points


def _edge_vectors(points: np.ndarray) -> np.ndarray:
    return points[1:] - points[0]


def simplex_volume(simplex_vertices: Sequence) -> float:
    """
    k-dimensional volume of a k-simplex embedded in any ambient dimension.

    :param simplex_vertices: k+1 points.
    :return: The unsigned k-volume (1 for a single point).
    """
    points = _as_points(simplex_vertices)
    k = len(points) - 1
    if k == 0:
        return 1.0

    edges = _edge_vectors(points)
    gram_determinant = max(np.linalg.det(edges @ edges.T), 0.0)
    return math.sqrt(gram_determinant) / math.factorial(k)


def normalized_volume(simplex_vertices: Sequence) -> float:
    """
    Scale-invariant flatness measure k!·volume / diameter^k.

    :param simplex_vertices: k+1 points.
    :return: 0 for coincident or flat simplices; 1 for a single point.
    """
    points = _as_points(simplex_vertices)
    k = len(points) - 1
    if k == 0:
        return 1.0

    diameter = float(np.max(pdist(points)))
    if diameter == 0.0:
        return 0.0

    return simplex_volume(points) * math.factorial(k) / diameter ** k


def is_degenerate(simplex_vertices: Sequence) -> bool:
    return normalized_volume(simplex_vertices) < DEGENERACY_THRESHOLD


def _affine_frame(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orthonormal basis of the affine hull (Gram-Schmidt on the edge vectors) and the edges in that basis.

    :return: (basis with one column per direction, edge vectors expressed in local coordinates)
    """
    edges = _edge_vectors(points)
    basis, _ = np.linalg.qr(edges.T)
    return basis, edges @ basis


def _circumcenter_local(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve the perpendicular-bisector system 2·e_i·x = |e_i|^2 in local coordinates.

    :return: (circumcenter offset from points[0] in local coordinates, basis, local edges)
    """
    k = len(points) - 1
    if is_degenerate(points):
        raise DegenerateSimplexError(k)

    basis, local_edges = _affine_frame(points)
    right_hand_side = 0.5 * np.einsum("ij,ij->i", local_edges, local_edges)
    local_center = np.linalg.solve(local_edges, right_hand_side)
    return local_center, basis, local_edges


# _________________________Circumcenters_________________________
def circumcenter(simplex_vertices: Sequence, k: int = None) -> Tuple[np.ndarray, float]:
    """
    Circumcenter and circumradius of a k-simplex.

    :param simplex_vertices: k+1 points of a common ambient dimension m.
    :param k: Simplex dimension; inferred from the number of points when omitted.
    :return: (circumcenter in ambient coordinates, circumradius)
    :raises ValueError: If the point count does not match k or k exceeds the ambient dimension.
    :raises DegenerateSimplexError: If the normalized volume is below the degeneracy threshold.
    """
    points = _as_points(simplex_vertices)
    ambient_dimension = points.shape[1]
    if k is None:
        k = len(points) - 1

    if len(points) != k + 1:
        raise ValueError(f"A {k}-simplex needs {k + 1} points, got {len(points)}")

    if k == 0:
        return points[0].copy(), 0.0

    if not 1 <= k <= ambient_dimension:
        raise ValueError(f"Simplex dimension {k} is outside [1, {ambient_dimension}]")

    local_center, basis, _ = _circumcenter_local(points)
    center = points[0] + basis @ local_center
    return center, float(np.linalg.norm(local_center))


def circumcenter_barycentric(simplex_vertices: Sequence) -> np.ndarray:
    """
    Barycentric coordinates of the circumcenter with respect to the simplex vertices.

    :raises DegenerateSimplexError: If the simplex is degenerate.
    """
    points = _as_points(simplex_vertices)
    if len(points) == 1:
        return np.ones(1)

    local_center, _, local_edges = _circumcenter_local(points)
    tail = np.linalg.solve(local_edges.T, local_center)
    return np.concatenate(([1.0 - tail.sum()], tail))


# _________________________Signed Heights_________________________
def _orientation(facet_local: np.ndarray, point_local: np.ndarray) -> float:
    rows = np.vstack([facet_local[1:] - facet_local[0], point_local - facet_local[0]])
    return float(np.linalg.det(rows))


def signed_height(v_index: int, simplex_vertices: Sequence) -> float:
    """
    Signed distance from the circumcenter to the hyperplane of the facet opposite vertex v_index.

    The magnitude is the distance between the simplex circumcenter and the facet circumcenter; the sign is
    positive when the circumcenter and the vertex lie on the same side of the facet.

    :param v_index: Index of the vertex within the simplex.
    :param simplex_vertices: n+1 points.
    :return: h(v, σ) in the length units of the coordinates.
    :raises IndexError: If v_index is not a vertex of the simplex.
    :raises DegenerateSimplexError: If the simplex or the opposite facet is degenerate.
    """
    points = _as_points(simplex_vertices)
    if not 0 <= v_index < len(points):
        raise IndexError(f"Vertex index {v_index} is outside a simplex with {len(points)} vertices")

    center, _ = circumcenter(points)
    facet = np.delete(points, v_index, axis=0)
    facet_center, _ = circumcenter(facet)
    magnitude = float(np.linalg.norm(center - facet_center))

    basis, _ = _affine_frame(points)
    to_local = lambda p: (np.asarray(p) - points[0]) @ basis
    facet_local = to_local(facet)
    center_side = _orientation(facet_local, to_local(center))
    vertex_side = _orientation(facet_local, to_local(points[v_index]))

    if center_side == 0.0:
        return 0.0

    return magnitude if (center_side > 0) == (vertex_side > 0) else -magnitude


def simplex_geometry(simplex_vertices: Sequence) -> SimplexGeometry:
    """
    Bundle circumcenter, circumradius and signed heights, applying the degenerate convention when needed.
    """
    points = _as_points(simplex_vertices)
    try:
        center, radius = circumcenter(points)
        heights = np.array([signed_height(i, points) for i in range(len(points))])
        return SimplexGeometry(center, radius, heights, degenerate=False)
    except DegenerateSimplexError:
        radius = 0.5 * float(np.max(pdist(points))) if len(points) > 1 else 0.0
        return SimplexGeometry(
            circumcenter=np.full(points.shape[1], np.inf),
            circumradius=radius,
            heights=np.full(len(points), -radius),
            degenerate=True,
        )


def height_ratios(simplex_vertices: Sequence) -> np.ndarray:
    """
    h(v_i, σ)/R(σ) for every vertex, -1 everywhere for a degenerate simplex.
    """
    return simplex_geometry(simplex_vertices).height_ratios


# _________________________Well-Centeredness_________________________
def equatorial_margin(simplex_vertices: Sequence) -> float:
    """
    min over vertices of |distance(v_i, c(facet_i)) - R(facet_i)| / R(σ).

    Small values flag simplices close to the boundary case of the equatorial-ball characterization.
    """
    points = _as_points(simplex_vertices)
    _, radius = circumcenter(points)
    margins = []
    for i in range(len(points)):
        facet_center, facet_radius = circumcenter(np.delete(points, i, axis=0))
        margins.append(abs(np.linalg.norm(points[i] - facet_center) - facet_radius))

    return float(min(margins)) / radius


def equatorial_ball_test(simplex_vertices: Sequence) -> bool:
    """
    True iff every vertex lies strictly outside the equatorial ball of its opposite facet.

    :raises DegenerateSimplexError: If the simplex or a facet is degenerate.
    """
    points = _as_points(simplex_vertices)
    circumcenter(points)

    for i in range(len(points)):
        facet_center, facet_radius = circumcenter(np.delete(points, i, axis=0))
        if not np.linalg.norm(points[i] - facet_center) > facet_radius:
            return False

    return True


def is_k_well_centered(simplex_vertices: Sequence, k: int) -> bool:
    """
    True iff every k-face strictly contains its circumcenter (all barycentric coordinates positive).

    :param simplex_vertices: n+1 points.
    :param k: Face dimension, 1 <= k <= n.
    :raises ValueError: If k is out of range.
    :raises DegenerateSimplexError: If some k-face is degenerate.
    """
    points = _as_points(simplex_vertices)
    n = len(points) - 1
    if not 1 <= k <= n:
        raise ValueError(f"Face dimension {k} is outside [1, {n}]")

    for face in itertools.combinations(range(n + 1), k + 1):
        if not np.all(circumcenter_barycentric(points[list(face)]) > 0.0):
            return False

    return True


# _________________________Angles and Inradius_________________________
def vertex_angles(triangle_vertices: Sequence) -> np.ndarray:
    """
    Interior angles of a triangle, one per vertex, in [0, π].

    Collinear triangles give (0, π, 0)-style angles. When two vertices coincide the angle opposite the
    collapsed edge is 0 and the coincident vertices get π/2 each; three coincident vertices give (0, 0, π).
    """
    points = _as_points(triangle_vertices)
    if len(points) != 3:
        raise ValueError(f"A triangle needs 3 points, got {len(points)}")

    edge_lengths = np.array([np.linalg.norm(points[(i + 2) % 3] - points[(i + 1) % 3]) for i in range(3)])
    collapsed = edge_lengths == 0.0
    if collapsed.all():
        return np.array([0.0, 0.0, math.pi])

    if collapsed.any():
        angles = np.full(3, math.pi / 2)
        angles[np.argmax(collapsed)] = 0.0
        return angles

    angles = np.empty(3)
    for i in range(3):
        first = points[(i + 1) % 3] - points[i]
        second = points[(i + 2) % 3] - points[i]
        cross = np.cross(first, second) if len(first) == 3 else first[0] * second[1] - first[1] * second[0]
        angles[i] = math.atan2(float(np.linalg.norm(cross)), float(np.dot(first, second)))

    return angles


def inradius(simplex_vertices: Sequence) -> float:
    """
    Inradius r = n·Volume / (sum of facet volumes).

    :raises DegenerateSimplexError: If the simplex is degenerate.
    """
    points = _as_points(simplex_vertices)
    n = len(points) - 1
    if is_degenerate(points):
        raise DegenerateSimplexError(n)

    facet_volumes = sum(simplex_volume(np.delete(points, i, axis=0)) for i in range(n + 1))
    return n * simplex_volume(points) / facet_volumes
