import logging

import numpy as np

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.ConnectivityScripts.Delaunay import is_strictly_convex_quad
from PythonScripts.ConnectivityScripts.LonelyVertices import LonelyVertexReport, find_lonely_vertices


logger = logging.getLogger(__name__)


@dataclass
class RepairResult:
    """
    :param mesh: Mesh after the accepted flips (the input mesh when none applied).
    :param flips: (removed edge, added edge) pairs in the order applied.
    :param residual: Lonely vertices remaining after repair.
    """
    mesh: SimplicialMesh
    flips: List[Tuple[Tuple[int, int], Tuple[int, int]]] = field(default_factory=list)
    residual: LonelyVertexReport = field(default_factory=LonelyVertexReport)


@dataclass(frozen=True)
class _Candidate:
    reduction: int
    angle_improvement: float
    edge: Tuple[int, int]
    added: Tuple[int, int]
    mesh: SimplicialMesh

    def priority(self):
        return -self.reduction, -self.angle_improvement, self.edge


def _max_angle(mesh: SimplicialMesh, cell_indices: List[int]) -> float:
    return float(Bg.triangle_angles(Bg.gather_cells(mesh.vertices, mesh.cells[cell_indices])).max())


def _try_flip(mesh: SimplicialMesh, edge: Tuple[int, int], lonely: set) -> Optional[_Candidate]:
    """
    Flip one interior edge if the quadrilateral is strictly convex, the lonely count strictly drops and no
    vertex becomes lonely.
    """
    first, second = mesh.facet_incidence[edge]
    a, b = edge
    c = next(int(v) for v in mesh.cells[first] if v not in edge)
    d = next(int(v) for v in mesh.cells[second] if v not in edge)
    if not is_strictly_convex_quad(mesh.vertices, a, b, c, d):
        return None

    cells = mesh.cells.copy()
    cells[first] = (a, c, d)
    cells[second] = (b, c, d)
    flipped = mesh.with_cells(cells)

    flipped_lonely = set(find_lonely_vertices(flipped).vertices)
    if len(flipped_lonely) >= len(lonely) or not flipped_lonely <= lonely:
        return None

    improvement = _max_angle(mesh, [first, second]) - _max_angle(flipped, [first, second])
    return _Candidate(len(lonely) - len(flipped_lonely), improvement, edge, tuple(sorted((c, d))), flipped)


def repair_connectivity_2d(mesh: SimplicialMesh) -> RepairResult:
    """
    Best-effort removal of lonely vertices by greedy edge flips.

    Each round applies the flip with the largest lonely-count reduction, breaking ties by the largest drop in
    the maximum angle of the two affected triangles and then by the smallest edge. Only strictly convex
    quadrilaterals are flipped, so no triangle inverts, and boundary edges and vertex positions never change.
    Stops when no flip reduces the lonely count.

    :raises ValueError: If the mesh is not a triangle mesh.
    """
    if mesh.dimension != 2:
        raise ValueError("Connectivity repair is implemented for triangle meshes only")

    result = RepairResult(mesh=mesh)
    lonely = set(find_lonely_vertices(mesh).vertices)

    while lonely:
        # Score every interior edge whose flip lowers the lonely count
        candidates = [_try_flip(result.mesh, edge, lonely) for edge in result.mesh.interior_facets]
        candidates = [candidate for candidate in candidates if candidate is not None]
        if not candidates:
            break

        best = min(candidates, key=_Candidate.priority)
        result.mesh = best.mesh
        result.flips.append((best.edge, best.added))
        lonely = set(find_lonely_vertices(best.mesh).vertices)
        logger.debug("Flipped %s -> %s, %d lonely vertices left", best.edge, best.added, len(lonely))

    result.residual = find_lonely_vertices(result.mesh)
    logger.info("Connectivity repair: %d flips, %d lonely vertices remain", len(result.flips), result.residual.count)
    return result
