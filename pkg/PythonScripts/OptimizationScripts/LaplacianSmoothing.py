import logging

import numpy as np

from typing import Sequence

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.OptimizationScripts.NumericalGradient import resolve_free_vertices


logger = logging.getLogger(__name__)


def laplacian_smooth(mesh: SimplicialMesh, iterations: int, free_vertices: Sequence[int] = None) -> SimplicialMesh:
    """
    Gauss-Seidel Laplacian smoothing: each sweep moves every free vertex, in ascending index order, to the
    centroid of its current neighbors. Boundary vertices and connectivity are left unchanged.

    :param mesh: Mesh to smooth.
    :param iterations: Number of sweeps.
    :param free_vertices: Vertices to move; all interior vertices when omitted.
    :return: The smoothed mesh.
    :raises ValueError: If iterations is negative.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be non-negative, got {iterations}")

    free = resolve_free_vertices(mesh, free_vertices).tolist()
    coordinates = np.array(mesh.vertices, dtype=float)
    neighbors = {vertex: list(mesh.vertex_neighbors[vertex]) for vertex in free}

    for _ in range(iterations):
        for vertex in free:
            coordinates[vertex] = coordinates[neighbors[vertex]].mean(axis=0)

    logger.debug("Laplacian smoothing: %d sweeps over %d vertices", iterations, len(free))
    return mesh.with_vertices(coordinates)
