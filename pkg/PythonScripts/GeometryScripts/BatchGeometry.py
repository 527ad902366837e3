import math

import numpy as np

from PythonScripts.GeometryScripts.SimplexGeometry import DEGENERACY_THRESHOLD


# Every function here takes a stacked array of simplices with shape (cells, k+1, ambient dimension)
# and mirrors a scalar routine of SimplexGeometry.


def gather_cells(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    return vertices[cells]


def _edges_and_gram(simplices: np.ndarray):
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    return edges, edges @ np.swapaxes(edges, 1, 2)


def diameters(simplices: np.ndarray) -> np.ndarray:
    differences = simplices[:, :, None, :] - simplices[:, None, :, :]
    return np.sqrt(np.einsum("nijm,nijm->nij", differences, differences)).max(axis=(1, 2))


def normalized_volumes(simplices: np.ndarray) -> np.ndarray:
    """
    k!·volume / diameter^k for every simplex in the stack.
    """
    k = simplices.shape[1] - 1
    _, gram = _edges_and_gram(simplices)
    scaled_volume = np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))
    diameter = diameters(simplices)

    result = np.zeros(len(simplices))
    nonzero = diameter > 0.0
    result[nonzero] = scaled_volume[nonzero] / diameter[nonzero] ** k
    return result


def degenerate_mask(simplices: np.ndarray) -> np.ndarray:
    return normalized_volumes(simplices) < DEGENERACY_THRESHOLD


def height_ratio_table(simplices: np.ndarray) -> np.ndarray:
    """
    h(v_i, σ)/R(σ) for every vertex of every simplex, with -1 for degenerate simplices.

    The circumcenter's barycentric coordinate λ_i times the altitude 1/|∇λ_i| is the signed height of
    vertex i, so the whole table comes from one batched solve against the Gram matrix of the edges.

    :param simplices: Array of shape (cells, n+1, m).
    :return: Array of shape (cells, n+1).
    """
    count, corners, _ = simplices.shape
    if count == 0:
        return np.zeros((0, corners))
    if corners == 3:
        return _triangle_height_ratios(simplices)

    edges, gram = _edges_and_gram(simplices)
    degenerate = degenerate_mask(simplices)
    safe_gram = np.where(degenerate[:, None, None], np.eye(corners - 1), gram)

    half_squares = 0.5 * np.einsum("nii->ni", safe_gram)
    tail = np.linalg.solve(safe_gram, half_squares[..., None])[..., 0]
    offsets = np.einsum("ni,nim->nm", tail, edges)
    radii = np.linalg.norm(offsets, axis=1)

    barycentric = np.concatenate([1.0 - tail.sum(axis=1, keepdims=True), tail], axis=1)
    tail_gradients = np.linalg.solve(safe_gram, edges)
    gradients = np.concatenate([-tail_gradients.sum(axis=1, keepdims=True), tail_gradients], axis=1)
    gradient_norms = np.linalg.norm(gradients, axis=2)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = barycentric / (gradient_norms * radii[:, None])

    ratios[degenerate] = -1.0
    return ratios


def _triangle_height_ratios(simplices: np.ndarray) -> np.ndarray:
    """
    For a triangle h/R at a vertex is the cosine of its angle, taken here from squared edge lengths only.
    Those are unchanged by reflections, so mirrored meshes score identically.
    """
    opposite = np.roll(simplices, -1, axis=1) - np.roll(simplices, -2, axis=1)
    squares = (opposite * opposite).sum(axis=2)
    after, before = np.roll(squares, -1, axis=1), np.roll(squares, -2, axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (after + before - squares) / (2.0 * np.sqrt(after * before))

    ratios[degenerate_mask(simplices)] = -1.0
    return ratios


def signed_volumes(simplices: np.ndarray) -> np.ndarray:
    """
    Oriented n-volume of full-dimensional simplices (ambient dimension equals simplex dimension).
    """
    n = simplices.shape[1] - 1
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    return np.linalg.det(edges) / math.factorial(n)


def triangle_angles(simplices: np.ndarray) -> np.ndarray:
    """
    Interior angles of stacked triangles, following the conventions of SimplexGeometry.vertex_angles.

    :param simplices: Array of shape (cells, 3, m) with m in {2, 3}.
    :return: Array of shape (cells, 3) in radians.
    """
    angles = np.empty((len(simplices), 3))
    opposite_lengths = np.empty((len(simplices), 3))

    for i in range(3):
        first = simplices[:, (i + 1) % 3] - simplices[:, i]
        second = simplices[:, (i + 2) % 3] - simplices[:, i]
        if simplices.shape[2] == 2:
            cross = np.abs(first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0])
        else:
            cross = np.linalg.norm(np.cross(first, second), axis=1)

        angles[:, i] = np.arctan2(cross, np.einsum("nm,nm->n", first, second))
        opposite_lengths[:, i] = np.linalg.norm(second - first, axis=1)

    collapsed = opposite_lengths == 0.0
    all_collapsed = collapsed.all(axis=1)
    some_collapsed = collapsed.any(axis=1) & ~all_collapsed

    angles[some_collapsed] = np.where(collapsed[some_collapsed], 0.0, math.pi / 2)
    angles[all_collapsed] = [0.0, 0.0, math.pi]
    return angles
