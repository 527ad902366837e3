import math
import logging

import numpy as np

from typing import Sequence

from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.GeometryScripts.SimplexGeometry import height_ratios
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig, EnergyFamily


logger = logging.getLogger(__name__)

# Inverse-mean-ratio value for inverted or flat cells.
BARRIER_SENTINEL = 1e30

# Unit-edge regular simplices, one edge vector from vertex 0 per column.
_REFERENCE_SIMPLEX = {
    2: np.array([[1.0, 0.5],
                 [0.0, math.sqrt(3.0) / 2.0]]),
    3: np.array([[1.0, 0.5, 0.5],
                 [0.0, math.sqrt(3.0) / 2.0, math.sqrt(3.0) / 6.0],
                 [0.0, 0.0, math.sqrt(2.0 / 3.0)]]),
}
_REFERENCE_INVERSE = {n: np.linalg.inv(w) for n, w in _REFERENCE_SIMPLEX.items()}
_REFERENCE_DETERMINANT = {n: float(np.linalg.det(w)) for n, w in _REFERENCE_SIMPLEX.items()}


def _coordinates(mesh: SimplicialMesh, vertices: np.ndarray = None) -> np.ndarray:
    return Bg.gather_cells(mesh.vertices if vertices is None else vertices, mesh.cells)


def _require_planar(mesh: SimplicialMesh, name: str) -> None:
    if mesh.dimension != 2:
        raise ValueError(f"{name} is defined for triangle meshes only, got dimension {mesh.dimension}")


# _________________________Per-Simplex Measures_________________________
def f_n(simplex: Sequence, k_n: float = 0.5) -> float:
    """
    Distance of the worst vertex height ratio from the target: max_i |h_i/R - k_n|.

    Degenerate simplices use h/R = -1 at every vertex.
    """
    return float(np.max(np.abs(height_ratios(simplex) - k_n)))


def height_ratio_terms(simplices: np.ndarray, config: EnergyConfig) -> np.ndarray:
    """
    |h/R / k_n - 1|^p for every (cell, vertex) pair of a stack of simplices.
    """
    ratios = Bg.height_ratio_table(simplices)
    return np.abs(ratios / config.k_n - 1.0) ** config.p


def inverse_mean_ratios(simplices: np.ndarray) -> np.ndarray:
    """
    η = ‖J·W⁻¹‖²_F / (n·det(J·W⁻¹)^(2/n)) per cell, where J holds the cell's edge vectors from vertex 0 as
    columns and W those of the unit regular simplex. Cells with det(J·W⁻¹) <= 0 get BARRIER_SENTINEL.

    :param simplices: Array of shape (cells, n+1, n).
    :return: One value per cell, 1 for a regular cell.
    """
    n = simplices.shape[1] - 1
    if len(simplices) == 0:
        return np.zeros(0)

    jacobians = np.swapaxes(simplices[:, 1:, :] - simplices[:, :1, :], 1, 2)
    mapped = jacobians @ _REFERENCE_INVERSE[n]
    determinants = np.linalg.det(jacobians) / _REFERENCE_DETERMINANT[n]
    frobenius = np.einsum("nij,nij->n", mapped, mapped)

    values = np.full(len(simplices), BARRIER_SENTINEL)
    positive = determinants > 0.0
    values[positive] = frobenius[positive] / (n * determinants[positive] ** (2.0 / n))
    return np.minimum(values, BARRIER_SENTINEL)


def cell_energies(simplices: np.ndarray, config: EnergyConfig) -> np.ndarray:
    """
    Contribution of each cell to an additive energy (E_p or the barrier energy).

    :raises ValueError: If the energy family is not a sum over cells.
    """
    if config.family is EnergyFamily.Ep:
        return height_ratio_terms(simplices, config).sum(axis=1)

    if config.family is EnergyFamily.EpWithBarrier:
        return config.barrier_weight * height_ratio_terms(simplices, config).sum(axis=1) + \
            inverse_mean_ratios(simplices)

    raise ValueError(f"{config.family.value} is not a sum of per-cell terms")


# _________________________Mesh Energies_________________________
def energy_Ep(mesh: SimplicialMesh, config: EnergyConfig = None, vertices: np.ndarray = None) -> float:
    """
    E_p = Σ over (cell, vertex) pairs of |2h/R - 1|^p (|h/R / k_n - 1|^p for a general k_n).

    The sum is exactly rounded, so the result does not depend on summation order.

    :param mesh: Mesh supplying the connectivity (and coordinates unless vertices is given).
    :param config: Supplies p and k_n; the family is ignored.
    :param vertices: Optional coordinates overriding the mesh's own.
    """
    config = config or EnergyConfig()
    terms = height_ratio_terms(_coordinates(mesh, vertices), config)
    return math.fsum(terms.ravel())


def energy_Einfty(mesh: SimplicialMesh, vertices: np.ndarray = None) -> float:
    """
    E_∞ = max over (cell, vertex) pairs of |h/R - 1/2|.
    """
    ratios = Bg.height_ratio_table(_coordinates(mesh, vertices))
    return float(np.max(np.abs(ratios - 0.5))) if ratios.size else 0.0


def _angles(mesh: SimplicialMesh, vertices: np.ndarray = None) -> np.ndarray:
    return Bg.triangle_angles(_coordinates(mesh, vertices))


def energy_cos(mesh: SimplicialMesh, vertices: np.ndarray = None) -> float:
    _require_planar(mesh, "E_cos")
    angles = _angles(mesh, vertices)
    return float(np.max(np.abs(2.0 * np.cos(angles) - 1.0))) if angles.size else 0.0


def energy_max(mesh: SimplicialMesh, vertices: np.ndarray = None) -> float:
    _require_planar(mesh, "E_max")
    angles = _angles(mesh, vertices)
    return float(np.max(angles)) if angles.size else 0.0


def energy_min(mesh: SimplicialMesh, vertices: np.ndarray = None) -> float:
    _require_planar(mesh, "E_min")
    angles = _angles(mesh, vertices)
    return float(np.min(angles)) if angles.size else 0.0


def energy_imr(mesh: SimplicialMesh, vertices: np.ndarray = None) -> float:
    """
    Sum over cells of the inverse mean ratio; any inverted or flat cell contributes BARRIER_SENTINEL.
    """
    return math.fsum(inverse_mean_ratios(_coordinates(mesh, vertices)))


def energy_combined(mesh: SimplicialMesh, config: EnergyConfig = None, vertices: np.ndarray = None) -> float:
    """
    Barrier energy barrier_weight·E_p + E_imr.
    """
    config = config or EnergyConfig(family=EnergyFamily.EpWithBarrier)
    return config.barrier_weight * energy_Ep(mesh, config, vertices) + energy_imr(mesh, vertices)


def evaluate_energy(mesh: SimplicialMesh, config: EnergyConfig, vertices: np.ndarray = None) -> float:
    """
    Evaluate the energy selected by config.family.

    :raises ValueError: For planar-only energies on a tetrahedral mesh.
    """
    family = config.family
    if family is EnergyFamily.Ep:
        return energy_Ep(mesh, config, vertices)
    if family is EnergyFamily.Einfty:
        return energy_Einfty(mesh, vertices)
    if family is EnergyFamily.EpWithBarrier:
        return energy_combined(mesh, config, vertices)
    if family is EnergyFamily.Ecos:
        return energy_cos(mesh, vertices)
    if family is EnergyFamily.Emax:
        return energy_max(mesh, vertices)

    return energy_min(mesh, vertices)


# _________________________Cell Classification_________________________
def non_well_centered_cells(mesh: SimplicialMesh, vertices: np.ndarray = None) -> np.ndarray:
    """
    Indices of cells whose circumcenter is not strictly inside (some h/R <= 0, degenerate cells included).
    """
    ratios = Bg.height_ratio_table(_coordinates(mesh, vertices))
    return np.flatnonzero(np.any(ratios <= 0.0, axis=1))


def min_height_ratio(mesh: SimplicialMesh, vertices: np.ndarray = None) -> float:
    ratios = Bg.height_ratio_table(_coordinates(mesh, vertices))
    return float(ratios.min()) if ratios.size else 1.0
