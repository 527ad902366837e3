import logging

import numpy as np

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Tuple

from PythonScripts.GeometryScripts import BatchGeometry as Bg


logger = logging.getLogger(__name__)


class TopologyError(ValueError):
    """Raised when the connectivity table is not a valid simplicial complex."""


@dataclass(frozen=True)
class VertexStar:
    """
    The cells and neighbors around one vertex.

    :param vertex: Vertex index.
    :param cells: Indices of the cells incident to the vertex, ascending.
    :param neighbors: Indices of the vertices sharing an edge with the vertex, ascending.
    :param is_interior: False when the vertex lies on a boundary facet.
    """
    vertex: int
    cells: Tuple[int, ...]
    neighbors: Tuple[int, ...]
    is_interior: bool


@dataclass(frozen=True, eq=False)
class SimplicialMesh:
    """
    An indexed simplicial complex: vertex coordinates, a connectivity table of n-simplices and boundary flags.

    Instances are treated as immutable (their arrays are flagged read-only) and can be shared between
    threads. Use SimplicialMesh.from_arrays to build a validated, consistently oriented mesh.

    :param vertices: Coordinates, shape (vertex count, n).
    :param cells: Vertex indices of each n-simplex, shape (cell count, n+1).
    :param boundary_vertex: True for vertices on a boundary facet.
    """
    vertices: np.ndarray
    cells: np.ndarray
    boundary_vertex: np.ndarray = field(repr=False)

    # _________________________Construction_________________________
    @classmethod
    def from_arrays(cls, vertices, cells) -> "SimplicialMesh":
        """
        Validate the connectivity, orient every cell positively and compute boundary flags from facet incidence.

        :param vertices: Coordinates, shape (vertex count, n) with n in {2, 3}.
        :param cells: Vertex indices, shape (cell count, n+1).
        :raises ValueError: If coordinates are not finite or the dimensions do not match.
        :raises IndexError: If a cell references a vertex that does not exist.
        :raises TopologyError: If a cell repeats a vertex or a facet is shared by more than two cells.
        """
        vertices = np.array(vertices, dtype=float)
        cells = np.array(cells, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
            raise ValueError(f"Vertices must have shape (count, 2) or (count, 3), got {vertices.shape}")

        dimension = vertices.shape[1]
        cells = cells.reshape(-1, dimension + 1)
        if not np.all(np.isfinite(vertices)):
            raise ValueError("Vertex coordinates must be finite")

        if cells.size and (cells.min() < 0 or cells.max() >= len(vertices)):
            raise IndexError(f"Cell references a vertex outside [0, {len(vertices) - 1}]")

        sorted_cells = np.sort(cells, axis=1)
        if np.any(sorted_cells[:, 1:] == sorted_cells[:, :-1]):
            raise TopologyError("A cell repeats one of its vertices")

        cells = _orient_cells(vertices, cells)
        boundary_vertex = _boundary_vertices(cells, len(vertices))

        return cls._frozen(vertices, cells, boundary_vertex)

    @classmethod
    def _frozen(cls, vertices: np.ndarray, cells: np.ndarray, boundary_vertex: np.ndarray) -> "SimplicialMesh":
        for array in (vertices, cells, boundary_vertex):
            array.flags.writeable = False

        return cls(vertices=vertices, cells=cells, boundary_vertex=boundary_vertex)

    def with_vertices(self, vertices: np.ndarray) -> "SimplicialMesh":
        """
        Same connectivity and boundary flags, new coordinates. Orientation is not renormalized.
        """
        vertices = np.array(vertices, dtype=float)
        if vertices.shape != self.vertices.shape:
            raise ValueError(f"Expected coordinates of shape {self.vertices.shape}, got {vertices.shape}")

        return self._frozen(vertices, self.cells, self.boundary_vertex)

    def with_cells(self, cells: np.ndarray) -> "SimplicialMesh":
        return SimplicialMesh.from_arrays(self.vertices, cells)

    # _________________________Properties_________________________
    @property
    def dimension(self) -> int:
        return self.cells.shape[1] - 1

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_vertex)

    @property
    def cell_coordinates(self) -> np.ndarray:
        return Bg.gather_cells(self.vertices, self.cells)

    @cached_property
    def facet_incidence(self) -> Dict[Tuple[int, ...], List[int]]:
        """
        Map from each facet (sorted vertex tuple) to the cells that contain it.
        """
        incidence: Dict[Tuple[int, ...], List[int]] = {}
        for cell_index, cell in enumerate(self.cells.tolist()):
            for omitted in range(len(cell)):
                facet = tuple(sorted(cell[:omitted] + cell[omitted + 1:]))
                incidence.setdefault(facet, []).append(cell_index)

        return incidence

    @property
    def boundary_facets(self) -> List[Tuple[int, ...]]:
        return sorted(facet for facet, owners in self.facet_incidence.items() if len(owners) == 1)

    @property
    def interior_facets(self) -> List[Tuple[int, ...]]:
        return sorted(facet for facet, owners in self.facet_incidence.items() if len(owners) == 2)

    @cached_property
    def edges(self) -> np.ndarray:
        """
        Unique edges as sorted vertex pairs, shape (edge count, 2), lexicographically ordered.
        """
        n = self.dimension
        pairs = [self.cells[:, [i, j]] for i in range(n + 1) for j in range(i + 1, n + 1)]
        if not pairs or self.cell_count == 0:
            return np.zeros((0, 2), dtype=np.int64)

        return np.unique(np.sort(np.vstack(pairs), axis=1), axis=0)

    @cached_property
    def vertex_cells(self) -> List[Tuple[int, ...]]:
        incident: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for cell_index, cell in enumerate(self.cells.tolist()):
            for vertex in cell:
                incident[vertex].append(cell_index)

        return [tuple(cells) for cells in incident]

    @cached_property
    def vertex_neighbors(self) -> List[Tuple[int, ...]]:
        neighbors: List[set] = [set() for _ in range(self.vertex_count)]
        for a, b in self.edges.tolist():
            neighbors[a].add(b)
            neighbors[b].add(a)

        return [tuple(sorted(adjacent)) for adjacent in neighbors]

    # _________________________Queries_________________________
    def mean_incident_edge_lengths(self, vertices: np.ndarray = None) -> np.ndarray:
        """
        Mean length of the edges incident to each vertex, measured on the given coordinates.

        :param vertices: Coordinates to measure; the mesh's own coordinates when omitted.
        :return: One length per vertex (0 for isolated vertices).
        """
        coordinates = self.vertices if vertices is None else vertices
        lengths = np.linalg.norm(coordinates[self.edges[:, 0]] - coordinates[self.edges[:, 1]], axis=1)
        totals = np.bincount(self.edges.ravel(), weights=np.repeat(lengths, 2), minlength=self.vertex_count)
        counts = np.bincount(self.edges.ravel(), minlength=self.vertex_count)
        return np.divide(totals, counts, out=np.zeros(self.vertex_count), where=counts > 0)

    def mean_edge_length(self, vertices: np.ndarray = None) -> float:
        coordinates = self.vertices if vertices is None else vertices
        if len(self.edges) == 0:
            return 0.0

        return float(np.linalg.norm(coordinates[self.edges[:, 0]] - coordinates[self.edges[:, 1]], axis=1).mean())

    def inverted_cells(self, vertices: np.ndarray = None) -> np.ndarray:
        """
        Indices of cells whose signed volume is not positive.
        """
        coordinates = self.vertices if vertices is None else vertices
        return np.flatnonzero(Bg.signed_volumes(Bg.gather_cells(coordinates, self.cells)) <= 0.0)


# _________________________Module Functions_________________________
def _orient_cells(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """
    Swap the last two indices of every cell with negative signed volume.
    """
    cells = cells.copy()
    if len(cells) == 0:
        return cells

    negative = Bg.signed_volumes(Bg.gather_cells(vertices, cells)) < 0.0
    if negative.any():
        logger.debug("Reorienting %d of %d cells", int(negative.sum()), len(cells))
        cells[negative, -2:] = cells[negative, -1:-3:-1]

    return cells


def _boundary_vertices(cells: np.ndarray, vertex_count: int) -> np.ndarray:
    """
    Flag vertices lying on facets with exactly one incident cell.

    :raises TopologyError: If any facet is shared by more than two cells.
    """
    boundary_vertex = np.zeros(vertex_count, dtype=bool)
    if len(cells) == 0:
        return boundary_vertex

    corners = cells.shape[1]
    facets = np.vstack([np.delete(cells, omitted, axis=1) for omitted in range(corners)])
    unique_facets, counts = np.unique(np.sort(facets, axis=1), axis=0, return_counts=True)

    if np.any(counts > 2):
        offending = unique_facets[np.argmax(counts > 2)].tolist()
        raise TopologyError(f"Facet {offending} is shared by {counts.max()} cells")

    boundary_vertex[unique_facets[counts == 1].ravel()] = True
    return boundary_vertex


def vertex_star(mesh: SimplicialMesh, v: int) -> VertexStar:
    """
    Incident cells and neighbors of one vertex.

    :raises IndexError: If v is not a vertex of the mesh.
    """
    if not 0 <= v < mesh.vertex_count:
        raise IndexError(f"Vertex {v} is outside [0, {mesh.vertex_count - 1}]")

    return VertexStar(
        vertex=v,
        cells=mesh.vertex_cells[v],
        neighbors=mesh.vertex_neighbors[v],
        is_interior=not bool(mesh.boundary_vertex[v]),
    )


def angle_sum_around(mesh: SimplicialMesh, v: int) -> float:
    """
    Sum of the triangle angles at vertex v (2π for an interior vertex of a valid planar mesh).

    :raises ValueError: If the mesh is not planar.
    """
    if mesh.dimension != 2:
        raise ValueError("Angle sums are defined for triangle meshes only")

    star = vertex_star(mesh, v)
    if not star.cells:
        return 0.0

    star_cells = mesh.cells[list(star.cells)]
    angles = Bg.triangle_angles(Bg.gather_cells(mesh.vertices, star_cells))
    return float(angles[star_cells == v].sum())
