import json
import time
import logging

import numpy as np
import pandas as pd

from tqdm import tqdm
from dataclasses import dataclass, field, asdict, replace
from typing import List, Optional, TextIO, Tuple, Union

from PythonScripts.FileManagement import extract_optimizer_defaults
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig, EnergyFamily
from PythonScripts.QualityScripts.Energies import evaluate_energy, non_well_centered_cells
from PythonScripts.OptimizationScripts.NumericalGradient import (
    numerical_gradient, resolve_free_vertices
)


logger = logging.getLogger(__name__)

_defaults = extract_optimizer_defaults()


# _________________________Settings_________________________
@dataclass(frozen=True)
class LineSearchSettings:
    """
    Backtracking Armijo parameters. Step lengths are expressed relative to the mean edge length.

    :param initial_step_scale: First trial moves the free coordinates by this fraction of the mean edge length.
    :param shrink_factor: Multiplier applied after a rejected trial.
    :param sufficient_decrease: Armijo constant c in E(x + αd) <= E(x) + c·α·∇E·d.
    :param min_step_scale: The stage stops once a trial move falls below this fraction of the mean edge length.
    :param max_expansions: Number of step doublings tried when the first trial is already accepted.
    :param max_step_scale: No vertex moves further than this fraction of the mean edge length in one step.
    """
    initial_step_scale: float = float(_defaults["initial_step_scale"])
    shrink_factor: float = float(_defaults["shrink_factor"])
    sufficient_decrease: float = float(_defaults["sufficient_decrease"])
    min_step_scale: float = float(_defaults["min_step_scale"])
    max_expansions: int = int(_defaults["max_expansions"])
    max_step_scale: float = float(_defaults["max_step_scale"])

    def __post_init__(self):
        for name in ("initial_step_scale", "sufficient_decrease", "min_step_scale", "max_step_scale"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError(f"shrink_factor must lie in (0, 1), got {self.shrink_factor}")

        if self.max_expansions < 0:
            raise ValueError(f"max_expansions must be non-negative, got {self.max_expansions}")


@dataclass(frozen=True)
class OptimizationSettings:
    """
    :param max_iterations: Iteration count of the single stage run by optimize().
    :param energy: Energy minimized by optimize().
    :param fd_step_scale: Relative finite-difference step.
    :param cg_restart_interval: Reset the search direction to steepest descent every this many iterations;
        the number of free coordinates when omitted.
    :param line_search: Backtracking parameters.
    :param schedule: Ordered (energy, iterations) stages run by optimize_schedule().
    :param free_vertices: Vertices allowed to move; all interior vertices when omitted.
    :param show_progress: Display a progress bar per stage.
    """
    max_iterations: int = int(_defaults["max_iterations"])
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    fd_step_scale: float = float(_defaults["fd_step_scale"])
    cg_restart_interval: Optional[int] = None
    line_search: LineSearchSettings = field(default_factory=LineSearchSettings)
    schedule: Tuple[Tuple[EnergyConfig, int], ...] = ()
    free_vertices: Optional[Tuple[int, ...]] = None
    show_progress: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")

        if self.fd_step_scale <= 0.0:
            raise ValueError(f"fd_step_scale must be positive, got {self.fd_step_scale}")

        if self.cg_restart_interval is not None and self.cg_restart_interval < 1:
            raise ValueError(f"cg_restart_interval must be positive, got {self.cg_restart_interval}")

        object.__setattr__(self, "schedule", tuple((config, int(iterations)) for config, iterations in self.schedule))
        for config, iterations in self.schedule:
            if iterations < 0:
                raise ValueError(f"Stage {config.label} has a negative iteration count")
            if config.family is EnergyFamily.Emin:
                raise ValueError("E_min is maximized by triangulation choice, it cannot be a descent stage")

        if self.energy.family is EnergyFamily.Emin:
            raise ValueError("E_min is maximized by triangulation choice, it cannot be a descent stage")


# _________________________Trace_________________________
@dataclass(frozen=True)
class IterationRecord:
    stage: int
    energy_label: str
    iteration: int
    energy: float
    grad_norm: float
    step: float
    bad_count: int


@dataclass
class OptimizationTrace:
    """
    One record per accepted iterate (iteration 0 is each stage's starting point) plus one stop reason per stage.

    The recorded energy is the energy of the recorded coordinates under that stage's configuration.
    """
    records: List[IterationRecord] = field(default_factory=list)
    stop_reasons: List[str] = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def to_frame(self) -> pd.DataFrame:
        columns = ["stage", "energy_label", "iteration", "energy", "grad_norm", "step", "bad_count"]
        return pd.DataFrame([asdict(record) for record in self.records], columns=columns)

    def to_csv(self, destination: Union[str, TextIO, None] = None) -> Optional[str]:
        """
        CSV with columns iter, energy, grad_norm, step, bad_count; iter counts records across all stages.
        """
        frame = self.to_frame()
        table = pd.DataFrame({
            "iter": np.arange(len(frame)),
            "energy": frame["energy"],
            "grad_norm": frame["grad_norm"],
            "step": frame["step"],
            "bad_count": frame["bad_count"],
        })
        return table.to_csv(destination, index=False, float_format="%.17g")

    def to_dict(self) -> dict:
        return {
            "records": [asdict(record) for record in self.records],
            "stop_reasons": list(self.stop_reasons),
            "wall_clock_seconds": self.wall_clock_seconds,
        }

    def to_json(self, destination: Union[str, TextIO, None] = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if destination is not None:
            if hasattr(destination, "write"):
                destination.write(text)
            else:
                with open(destination, "w") as json_file:
                    json_file.write(text)

        return text

    def stage_energies(self, stage: int) -> List[float]:
        return [record.energy for record in self.records if record.stage == stage]


# _________________________Line Search_________________________
@dataclass
class _LineSearchResult:
    accepted: bool
    alpha: float
    energy: float
    coordinates: Optional[np.ndarray]


class _StageRunner:
    """
    Polak-Ribière conjugate gradient on the free coordinates of one stage.
    """

    def __init__(self, mesh: SimplicialMesh, config: EnergyConfig, free: np.ndarray, settings: OptimizationSettings):
        self.mesh = mesh
        self.config = config
        self.free = free
        self.settings = settings
        self.line_search = settings.line_search

    def energy(self, coordinates: np.ndarray) -> float:
        return evaluate_energy(self.mesh, self.config, coordinates)

    def gradient(self, coordinates: np.ndarray) -> np.ndarray:
        return numerical_gradient(self.mesh, self.config, self.free, coordinates, self.settings.fd_step_scale)

    def moved(self, coordinates: np.ndarray, direction: np.ndarray, alpha: float) -> np.ndarray:
        trial = coordinates.copy()
        trial[self.free] += alpha * direction.reshape(len(self.free), -1)
        return trial

    def search(self, coordinates: np.ndarray, energy: float, gradient: np.ndarray, direction: np.ndarray,
               alpha: float, mean_edge: float) -> _LineSearchResult:
        """
        Backtracking Armijo search starting at alpha; a first-trial success is followed by bounded doubling.
        Only trials with a strictly lower energy are accepted.
        """
        slope = float(gradient @ direction)
        vertex_moves = np.linalg.norm(direction.reshape(len(self.free), -1), axis=1)
        largest_move = float(vertex_moves.max())
        if largest_move == 0.0:
            return _LineSearchResult(False, alpha, energy, None)

        alpha_cap = self.line_search.max_step_scale * mean_edge / largest_move
        alpha_floor = self.line_search.min_step_scale * mean_edge / largest_move
        alpha = min(alpha, alpha_cap)
        c = self.line_search.sufficient_decrease

        def acceptable(trial_alpha: float, trial_energy: float) -> bool:
            return trial_energy < energy and trial_energy <= energy + c * trial_alpha * slope

        # Shrink until the Armijo condition holds
        shrinks = 0
        while alpha >= alpha_floor:
            trial = self.moved(coordinates, direction, alpha)
            trial_energy = self.energy(trial)
            if acceptable(alpha, trial_energy):
                break

            alpha *= self.line_search.shrink_factor
            shrinks += 1
        else:
            return _LineSearchResult(False, alpha, energy, None)

        # Grow the step while longer trials keep lowering the energy
        if shrinks == 0:
            for _ in range(self.line_search.max_expansions):
                longer = min(2.0 * alpha, alpha_cap)
                if longer <= alpha:
                    break

                longer_trial = self.moved(coordinates, direction, longer)
                longer_energy = self.energy(longer_trial)
                if not (acceptable(longer, longer_energy) and longer_energy < trial_energy):
                    break

                alpha, trial, trial_energy = longer, longer_trial, longer_energy

        logger.debug("Line search: alpha=%.3e after %d shrinks, energy %.17g -> %.17g", alpha, shrinks, energy,
                     trial_energy)
        return _LineSearchResult(True, alpha, trial_energy, trial)

    def run(self, coordinates: np.ndarray, iterations: int, stage: int, trace: OptimizationTrace) -> np.ndarray:
        mesh = self.mesh
        energy = self.energy(coordinates)
        gradient = self.gradient(coordinates)
        direction = -gradient
        restart_interval = self.settings.cg_restart_interval or max(gradient.size, 1)
        mean_edge = mesh.mean_edge_length(coordinates)
        alpha = None
        since_restart = 0
        stop_reason = "iteration limit"

        def record(iteration: int, step: float) -> None:
            trace.records.append(IterationRecord(
                stage=stage,
                energy_label=self.config.label,
                iteration=iteration,
                energy=energy,
                grad_norm=float(np.linalg.norm(gradient)),
                step=step,
                bad_count=len(non_well_centered_cells(mesh, coordinates)),
            ))

        record(0, 0.0)
        logger.info("Stage %d (%s): %d iterations from energy %.6g", stage, self.config.label, iterations, energy)

        progress = tqdm(range(1, iterations + 1), desc=f"Stage {stage} {self.config.label}",
                        disable=not self.settings.show_progress)
        for iteration in progress:
            if gradient.size == 0 or not np.any(gradient):
                stop_reason = "zero gradient"
                break

            # Restart along steepest descent when the direction stops descending
            if float(gradient @ direction) >= 0.0:
                direction = -gradient
                since_restart = 0

            direction_norm = float(np.linalg.norm(direction))
            if alpha is None:
                alpha = self.line_search.initial_step_scale * mean_edge / direction_norm

            result = self.search(coordinates, energy, gradient, direction, alpha, mean_edge)
            if not result.accepted:
                stop_reason = f"line search found no decrease at iteration {iteration}"
                logger.warning("Stage %d (%s): %s", stage, self.config.label, stop_reason)
                break

            alpha = result.alpha
            step = alpha * direction_norm
            coordinates, energy = result.coordinates, result.energy
            new_gradient = self.gradient(coordinates)

            # Polak-Ribière+ update with periodic restarts
            since_restart += 1
            if since_restart >= restart_interval:
                beta = 0.0
                since_restart = 0
            else:
                beta = max(0.0, float(new_gradient @ (new_gradient - gradient)) / float(gradient @ gradient))

            gradient = new_gradient
            direction = -gradient + beta * direction
            record(iteration, step)

        trace.stop_reasons.append(stop_reason)
        logger.info("Stage %d (%s) finished at energy %.6g: %s", stage, self.config.label, energy, stop_reason)
        return coordinates


# _________________________Drivers_________________________
def optimize_schedule(mesh: SimplicialMesh, settings: OptimizationSettings) -> Tuple[SimplicialMesh, OptimizationTrace]:
    """
    Run every (energy, iterations) stage of settings.schedule in order, each starting from the previous
    stage's output. Boundary coordinates and connectivity are never modified.

    :return: (optimized mesh, trace); an empty schedule returns the input mesh and an empty trace.
    :raises ValueError: If a free vertex is not an interior vertex of the mesh.
    """
    trace = OptimizationTrace()
    if not settings.schedule:
        return mesh, trace

    # Reject planar-only stages before any work is done
    for config, _ in settings.schedule:
        if mesh.dimension != 2 and config.family.is_planar_only:
            raise ValueError(f"{config.label} is defined for triangle meshes only")

    start = time.perf_counter()
    free = resolve_free_vertices(mesh, settings.free_vertices)
    coordinates = np.array(mesh.vertices, dtype=float)

    if free.size == 0:
        logger.warning("Mesh has no free vertices; nothing to optimize")
    else:
        for stage, (config, iterations) in enumerate(settings.schedule):
            coordinates = _StageRunner(mesh, config, free, settings).run(coordinates, iterations, stage, trace)

    trace.wall_clock_seconds = time.perf_counter() - start
    return mesh.with_vertices(coordinates), trace


def optimize(mesh: SimplicialMesh, settings: OptimizationSettings = None) -> Tuple[SimplicialMesh, OptimizationTrace]:
    """
    Minimize settings.energy for settings.max_iterations conjugate gradient iterations.
    """
    settings = settings or OptimizationSettings()
    single_stage = replace(settings, schedule=((settings.energy, settings.max_iterations),))
    return optimize_schedule(mesh, single_stage)

