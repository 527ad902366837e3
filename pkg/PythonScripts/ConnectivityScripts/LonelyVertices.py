import json
import math
import logging

from enum import Enum
from dataclasses import dataclass, field
from typing import List

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh, angle_sum_around


logger = logging.getLogger(__name__)

ANGLE_TOLERANCE = 1e-9
MIN_INTERIOR_NEIGHBORS_2D = 5
MIN_INCIDENT_EDGES_3D = 7


class LonelyKind(Enum):
    INTERIOR_2D_UNDER5 = "interior_2d_under5"
    BOUNDARY_2D_ANGLE = "boundary_2d_angle"
    VERTEX_3D_UNDER7 = "vertex_3d_under7"


@dataclass(frozen=True)
class LonelyVertex:
    """
    :param vertex: Vertex index.
    :param kind: Which rule flagged the vertex.
    :param detail: Neighbor count, incident edge count or boundary angle in radians, depending on kind.
    :param is_interior: False for boundary vertices.
    """
    vertex: int
    kind: LonelyKind
    detail: float
    is_interior: bool


@dataclass
class LonelyVertexReport:
    entries: List[LonelyVertex] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def vertices(self) -> List[int]:
        return [entry.vertex for entry in self.entries]

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "entries": [
                {"vertex": e.vertex, "kind": e.kind.value, "detail": e.detail, "is_interior": e.is_interior}
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def interior_edge_count(mesh: SimplicialMesh, v: int) -> int:
    """
    Number of edges at v shared by two triangles, i.e. the edges that divide v's boundary angle.
    """
    incidence = mesh.facet_incidence
    return sum(len(incidence[tuple(sorted((v, w)))]) == 2 for w in mesh.vertex_neighbors[v])


def required_dividing_edges(boundary_angle: float) -> int:
    """
    Edges needed to split a boundary angle into pieces strictly below π/2; 0 below π/2.
    """
    quarter = math.pi / 2 - ANGLE_TOLERANCE
    if boundary_angle < quarter:
        return 0

    return math.ceil(boundary_angle / quarter) - 1


def find_lonely_vertices(mesh: SimplicialMesh) -> LonelyVertexReport:
    """
    Vertices with too few neighbors to admit a well-centered star.

    Triangle meshes: interior vertices with fewer than five neighbors, and boundary vertices whose boundary
    angle θ_b >= π/2 is divided by fewer than ceil(θ_b / (π/2 - ε)) - 1 interior edges.
    Tetrahedral meshes: any vertex with fewer than seven incident edges.
    """
    report = LonelyVertexReport()
    for v in range(mesh.vertex_count):
        if not mesh.vertex_cells[v]:
            continue

        is_interior = not bool(mesh.boundary_vertex[v])
        neighbor_count = len(mesh.vertex_neighbors[v])

        if mesh.dimension == 3:
            if neighbor_count < MIN_INCIDENT_EDGES_3D:
                report.entries.append(LonelyVertex(v, LonelyKind.VERTEX_3D_UNDER7, neighbor_count, is_interior))
        elif is_interior:
            if neighbor_count < MIN_INTERIOR_NEIGHBORS_2D:
                report.entries.append(LonelyVertex(v, LonelyKind.INTERIOR_2D_UNDER5, neighbor_count, True))
        else:
            boundary_angle = angle_sum_around(mesh, v)
            if interior_edge_count(mesh, v) < required_dividing_edges(boundary_angle):
                report.entries.append(LonelyVertex(v, LonelyKind.BOUNDARY_2D_ANGLE, boundary_angle, False))

    logger.debug("Found %d lonely vertices", report.count)
    return report
