import math
import itertools

import numpy as np

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.ConnectivityScripts.Delaunay import delaunay_triangulation


_HALF_ROOT3 = math.sqrt(3.0) / 2.0

# Regular hexagon with unit circumradius, written so that it is exactly symmetric about both axes.
HEXAGON = np.array([
    [1.0, 0.0], [0.5, _HALF_ROOT3], [-0.5, _HALF_ROOT3], [-1.0, 0.0], [-0.5, -_HALF_ROOT3], [0.5, -_HALF_ROOT3],
])

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


# _________________________Small Meshes_________________________
def equilateral_triangle(side: float = 1.0) -> SimplicialMesh:
    return SimplicialMesh.from_arrays([[0.0, 0.0], [side, 0.0], [side / 2.0, side * _HALF_ROOT3]], [[0, 1, 2]])


def right_triangle() -> SimplicialMesh:
    return SimplicialMesh.from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])


def regular_tetrahedron() -> SimplicialMesh:
    return SimplicialMesh.from_arrays(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]], [[0, 1, 2, 3]]
    )


def square_two_triangles() -> SimplicialMesh:
    return SimplicialMesh.from_arrays(UNIT_SQUARE, [[0, 1, 2], [0, 2, 3]])


def hexagon_fan(center=(0.0, 0.0)) -> SimplicialMesh:
    """
    Regular hexagon split into six triangles around vertex 6, placed at center.
    """
    vertices = np.vstack([HEXAGON, [center]])
    return SimplicialMesh.from_arrays(vertices, [[i, (i + 1) % 6, 6] for i in range(6)])


def square_fan(center=(0.5, 0.5)) -> SimplicialMesh:
    """
    Unit square split into four triangles around vertex 4, whose four neighbors make it lonely.
    """
    vertices = np.vstack([UNIT_SQUARE, [center]])
    return SimplicialMesh.from_arrays(vertices, [[i, (i + 1) % 4, 4] for i in range(4)])


def eared_hexagon() -> SimplicialMesh:
    """
    Regular hexagon with ears (0, 1, 2) and (3, 4, 5) cut off; the center vertex 6 has only four neighbors.
    Two flips turn it into the hexagon fan.
    """
    vertices = np.vstack([HEXAGON, [[0.0, 0.0]]])
    return SimplicialMesh.from_arrays(vertices, [[0, 1, 2], [3, 4, 5], [0, 2, 6], [2, 3, 6], [3, 5, 6], [5, 0, 6]])


# _________________________Structured Meshes_________________________
def _perturb_interior(mesh: SimplicialMesh, noise: float, edge_length: float, seed: int) -> SimplicialMesh:
    if noise == 0.0:
        return mesh

    rng = np.random.default_rng(seed)
    vertices = np.array(mesh.vertices)
    interior = mesh.interior_vertices
    vertices[interior] += rng.uniform(-noise * edge_length, noise * edge_length, (len(interior), mesh.dimension))
    return SimplicialMesh.from_arrays(vertices, mesh.cells)


def hexagonal_lattice(rings: int = 3, noise: float = 0.0, seed: int = 0) -> SimplicialMesh:
    """
    Equilateral triangles with unit edges filling a regular hexagon of side `rings`; interior vertices are
    displaced uniformly by up to noise·edge per coordinate.
    """
    axial = [(q, r) for q in range(-rings, rings + 1) for r in range(-rings, rings + 1) if abs(q + r) <= rings]
    index = {coordinate: position for position, coordinate in enumerate(axial)}
    vertices = np.array([[q + r / 2.0, r * _HALF_ROOT3] for q, r in axial])

    cells = []
    for q, r in itertools.product(range(-rings - 1, rings + 1), repeat=2):
        for triangle in (((q, r), (q + 1, r), (q, r + 1)), ((q + 1, r), (q + 1, r + 1), (q, r + 1))):
            if all(corner in index for corner in triangle):
                cells.append([index[corner] for corner in triangle])

    return _perturb_interior(SimplicialMesh.from_arrays(vertices, cells), noise, 1.0, seed)


def square_grid(cells_per_side: int = 8, noise: float = 0.0, seed: int = 0) -> SimplicialMesh:
    """
    Unit square grid with every square split by a diagonal pointing towards the center of the domain
    (a union-jack pattern), so all four corners are split; interior vertices are displaced uniformly by up
    to noise·spacing per coordinate.
    """
    n = cells_per_side
    vertices = np.array([[i / n, j / n] for j in range(n + 1) for i in range(n + 1)])
    vertex = lambda i, j: j * (n + 1) + i

    cells = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)
            if (2 * i < n) == (2 * j < n):
                cells += [[a, b, c], [a, c, d]]
            else:
                cells += [[a, b, d], [b, c, d]]

    return _perturb_interior(SimplicialMesh.from_arrays(vertices, cells), noise, 1.0 / n, seed)


def centered_square_grid(cells_per_side: int = 8, noise: float = 0.0, seed: int = 0) -> SimplicialMesh:
    """
    Unit square with boundary vertices every 1/cells_per_side and one free vertex at the center of every grid
    cell. Each boundary segment forms a triangle with its cell's center, each side vertex one with the two
    centers beside it, and the centers form a grid split along one diagonal direction.

    Every side vertex reaches two centers and every corner one, so no vertex is lonely. Centers are displaced
    uniformly by up to noise/cells_per_side per coordinate.
    """
    n = cells_per_side
    loop = ([(i, 0) for i in range(n)] + [(n, j) for j in range(n)]
            + [(n - i, n) for i in range(n)] + [(0, n - j) for j in range(n)])
    center = lambda i, j: len(loop) + j * n + i

    vertices = [[x / n, y / n] for x, y in loop]
    vertices += [[(i + 0.5) / n, (j + 0.5) / n] for j in range(n) for i in range(n)]

    # The loop runs counterclockwise, so each segment's cell lies to its left
    segment_cells = []
    for k, (x, y) in enumerate(loop):
        next_x, next_y = loop[(k + 1) % len(loop)]
        dx, dy = next_x - x, next_y - y
        segment_cells.append(center(int(round(x + (dx - dy - 1) / 2.0)), int(round(y + (dy + dx - 1) / 2.0))))

    cells = []
    for k in range(len(loop)):
        cells.append([k, (k + 1) % len(loop), segment_cells[k]])
        if segment_cells[k - 1] != segment_cells[k]:
            cells.append([k, segment_cells[k], segment_cells[k - 1]])

    for j in range(n - 1):
        for i in range(n - 1):
            a, b, c, d = center(i, j), center(i + 1, j), center(i + 1, j + 1), center(i, j + 1)
            cells += [[a, b, c], [a, c, d]]

    return _perturb_interior(SimplicialMesh.from_arrays(vertices, cells), noise, 1.0 / n, seed)


def cube_mesh(cells_per_side: int = 3, noise: float = 0.0, seed: int = 0) -> SimplicialMesh:
    """
    Unit cube split into cells_per_side³ subcubes of six tetrahedra each (every tetrahedron follows a
    monotone path from a subcube's lowest to its highest corner); interior vertices are displaced uniformly
    by up to noise·spacing per coordinate.
    """
    n = cells_per_side
    vertices = np.array([[i / n, j / n, k / n] for k in range(n + 1) for j in range(n + 1) for i in range(n + 1)])
    vertex = lambda i, j, k: (k * (n + 1) + j) * (n + 1) + i

    cells = []
    for k, j, i in itertools.product(range(n), repeat=3):
        for order in itertools.permutations(range(3)):
            corner = [i, j, k]
            path = [vertex(*corner)]
            for axis in order:
                corner[axis] += 1
                path.append(vertex(*corner))
            cells.append(path)

    return _perturb_interior(SimplicialMesh.from_arrays(vertices, cells), noise, 1.0 / n, seed)


def random_planar_mesh(rng: np.random.Generator, interior_points: int = 4) -> SimplicialMesh:
    """
    Delaunay mesh of the unit square's corners plus uniformly drawn interior points
    (2·interior_points + 2 triangles).
    """
    interior = rng.uniform(0.05, 0.95, (interior_points, 2))
    points = np.vstack([UNIT_SQUARE, interior])
    return SimplicialMesh.from_arrays(points, delaunay_triangulation(points))
