import logging

import numpy as np

from typing import Sequence

from PythonScripts.FileManagement import extract_optimizer_defaults
from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig, EnergyFamily
from PythonScripts.QualityScripts.Energies import cell_energies, evaluate_energy


logger = logging.getLogger(__name__)


def resolve_free_vertices(mesh: SimplicialMesh, free_vertices: Sequence[int] = None) -> np.ndarray:
    """
    Sorted free-vertex indices; all interior vertices that belong to a cell when none are given.

    :raises ValueError: If a requested vertex is on the boundary, belongs to no cell or does not exist.
    """
    if free_vertices is None:
        return np.array([v for v in mesh.interior_vertices.tolist() if mesh.vertex_cells[v]], dtype=np.int64)

    free = np.unique(np.asarray(list(free_vertices), dtype=np.int64))
    if free.size and (free.min() < 0 or free.max() >= mesh.vertex_count):
        raise ValueError(f"Free vertices must lie in [0, {mesh.vertex_count - 1}]")

    on_boundary = free[mesh.boundary_vertex[free]]
    if on_boundary.size:
        raise ValueError(f"Boundary vertices cannot move: {on_boundary.tolist()}")

    isolated = [v for v in free.tolist() if not mesh.vertex_cells[v]]
    if isolated:
        raise ValueError(f"Vertices without incident cells cannot move: {isolated}")

    return free


def finite_difference_steps(mesh: SimplicialMesh, free: np.ndarray, vertices: np.ndarray,
                            step_scale: float) -> np.ndarray:
    """
    One step per free vertex: step_scale times the mean length of its incident edges.
    """
    return step_scale * mesh.mean_incident_edge_lengths(vertices)[free]


def _star_gradient(mesh: SimplicialMesh, config: EnergyConfig, free: np.ndarray, vertices: np.ndarray,
                   steps: np.ndarray) -> np.ndarray:
    """
    Central differences of an additive energy, evaluated only on each free vertex's star.

    Every (vertex, axis, sign) perturbation of every star cell is stacked into one batch; the perturbed
    cell energies are then summed per perturbation in a fixed order.
    """
    dimension = mesh.dimension
    rows, groups, corners, shifts = [], [], [], []
    for position, vertex in enumerate(free.tolist()):
        star = np.asarray(mesh.vertex_cells[vertex], dtype=np.int64)
        corner = np.argmax(mesh.cells[star] == vertex, axis=1)
        for axis in range(dimension):
            for sign_index, sign in enumerate((1.0, -1.0)):
                group = (position * dimension + axis) * 2 + sign_index
                rows.append(star)
                corners.append(corner)
                groups.append(np.full(len(star), group))
                shift = np.zeros((len(star), dimension))
                shift[:, axis] = sign * steps[position]
                shifts.append(shift)

    if not rows:
        return np.zeros(0)

    rows = np.concatenate(rows)
    corners = np.concatenate(corners)
    groups = np.concatenate(groups)
    simplices = Bg.gather_cells(vertices, mesh.cells[rows])
    simplices[np.arange(len(rows)), corners] += np.concatenate(shifts)

    totals = np.bincount(groups, weights=cell_energies(simplices, config), minlength=2 * dimension * len(free))
    forward, backward = totals[0::2], totals[1::2]
    return (forward - backward) / (2.0 * np.repeat(steps, dimension))


def _full_gradient(mesh: SimplicialMesh, config: EnergyConfig, free: np.ndarray, vertices: np.ndarray,
                   steps: np.ndarray) -> np.ndarray:
    dimension = mesh.dimension
    gradient = np.zeros(len(free) * dimension)
    trial = vertices.copy()
    for position, vertex in enumerate(free.tolist()):
        for axis in range(dimension):
            original = trial[vertex, axis]
            trial[vertex, axis] = original + steps[position]
            forward = evaluate_energy(mesh, config, trial)
            trial[vertex, axis] = original - steps[position]
            backward = evaluate_energy(mesh, config, trial)
            trial[vertex, axis] = original
            gradient[position * dimension + axis] = (forward - backward) / (2.0 * steps[position])

    return gradient


def numerical_gradient(mesh: SimplicialMesh, config: EnergyConfig, free_vertices: Sequence[int] = None,
                       vertices: np.ndarray = None, step_scale: float = None) -> np.ndarray:
    """
    Central-difference gradient of the energy with respect to the free coordinates.

    The step for each vertex is step_scale·(mean length of its incident edges), measured on the coordinates
    being differentiated. Perturbed states that become degenerate are evaluated under the h/R = -1 rule.

    :param mesh: Mesh supplying the connectivity.
    :param config: Energy to differentiate. E_min is maximized, not minimized, and is rejected.
    :param free_vertices: Interior vertices to differentiate against; all interior vertices when omitted.
    :param vertices: Coordinates at which to evaluate; the mesh's own when omitted.
    :param step_scale: Relative finite-difference step; the configured default (1e-6) when omitted.
    :return: Flat vector [∂E/∂x_v0, ∂E/∂y_v0, (∂E/∂z_v0), ∂E/∂x_v1, ...] in free-vertex order.
    :raises ValueError: For E_min or for free vertices that are not interior.
    """
    if config.family is EnergyFamily.Emin:
        raise ValueError("E_min is a quantity to maximize; it cannot drive the descent")

    free = resolve_free_vertices(mesh, free_vertices)
    coordinates = np.array(mesh.vertices if vertices is None else vertices, dtype=float)
    step_scale = extract_optimizer_defaults()["fd_step_scale"] if step_scale is None else step_scale
    steps = finite_difference_steps(mesh, free, coordinates, step_scale)

    if config.family.is_additive:
        return _star_gradient(mesh, config, free, coordinates, steps)

    return _full_gradient(mesh, config, free, coordinates, steps)
