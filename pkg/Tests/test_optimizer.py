import io

import numpy as np
import pytest

from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig, EnergyFamily
from PythonScripts.QualityScripts.Energies import energy_Ep, min_height_ratio, non_well_centered_cells
from PythonScripts.OptimizationScripts.ConjugateGradient import (
    LineSearchSettings, OptimizationSettings, optimize, optimize_schedule
)
from PythonScripts.OptimizationScripts.LaplacianSmoothing import laplacian_smooth
from PythonScripts.ConnectivityScripts.Delaunay import is_locally_delaunay
from PythonScripts.ConnectivityScripts.EdgeFlips import repair_connectivity_2d
from PythonScripts.ConnectivityScripts.LonelyVertices import find_lonely_vertices
from PythonScripts.VerificationScripts import MeshFixtures as Fx


def _schedule(*stages):
    return OptimizationSettings(schedule=tuple(stages))


def _assert_only_interior_moved(before, after):
    assert np.array_equal(after.cells, before.cells)
    assert np.array_equal(after.vertices[before.boundary_vertex], before.vertices[before.boundary_vertex])


def _assert_valid_run(before, after, trace):
    _assert_only_interior_moved(before, after)
    assert len(trace.stop_reasons) == len({record.stage for record in trace.records})
    for stage in range(len(trace.stop_reasons)):
        energies = trace.stage_energies(stage)
        assert all(later < earlier for earlier, later in zip(energies, energies[1:]))


# _________________________Settings_________________________
@pytest.mark.parametrize("arguments", [
    {"max_iterations": 0},
    {"fd_step_scale": 0.0},
    {"cg_restart_interval": 0},
    {"schedule": ((EnergyConfig(), -1),)},
    {"schedule": ((EnergyConfig(family=EnergyFamily.Emin), 10),)},
    {"energy": EnergyConfig(family=EnergyFamily.Emin)},
])
def test_settings_validation(arguments):
    with pytest.raises(ValueError):
        OptimizationSettings(**arguments)


@pytest.mark.parametrize("arguments", [{"shrink_factor": 1.0}, {"initial_step_scale": 0.0}, {"max_expansions": -1}])
def test_line_search_validation(arguments):
    with pytest.raises(ValueError):
        LineSearchSettings(**arguments)


# _________________________Schedules_________________________
def test_empty_schedule_is_the_identity(off_center_fan):
    optimized, trace = optimize_schedule(off_center_fan, OptimizationSettings())
    assert optimized is off_center_fan
    assert trace.records == [] and trace.stop_reasons == []


def test_off_center_fan_becomes_well_centered(off_center_fan):
    assert non_well_centered_cells(off_center_fan).size > 0

    optimized, trace = optimize_schedule(off_center_fan, _schedule((EnergyConfig(), 50)))
    assert non_well_centered_cells(optimized).size == 0
    assert energy_Ep(optimized) < 1e-12
    assert optimized.vertices[6] == pytest.approx([0.0, 0.0], abs=1e-3)
    _assert_valid_run(off_center_fan, optimized, trace)


def test_energy_strictly_decreases_within_a_stage():
    mesh = Fx.hexagonal_lattice(rings=2, noise=0.3, seed=2)
    optimized, trace = optimize_schedule(mesh, _schedule((EnergyConfig(p=2), 20), (EnergyConfig(p=6), 20)))
    assert all(len(trace.stage_energies(stage)) >= 2 for stage in (0, 1))
    _assert_valid_run(mesh, optimized, trace)

    assert [record.iteration for record in trace.records if record.stage == 1][0] == 0
    assert len(trace.stop_reasons) == 2


def test_optimization_is_deterministic():
    mesh = Fx.hexagonal_lattice(rings=2, noise=0.3, seed=6)
    settings = _schedule((EnergyConfig(), 15), (EnergyConfig(family=EnergyFamily.Einfty), 5))
    first, first_trace = optimize_schedule(mesh, settings)
    second, second_trace = optimize_schedule(mesh, settings)
    _assert_valid_run(mesh, first, first_trace)
    assert np.array_equal(first.vertices, second.vertices)
    assert first_trace.to_frame().equals(second_trace.to_frame())


def test_perturbed_lattice_becomes_acute_and_delaunay():
    mesh = Fx.hexagonal_lattice(rings=3, noise=0.25, seed=1)
    optimized, trace = optimize_schedule(mesh, _schedule((EnergyConfig(), 200)))
    assert non_well_centered_cells(optimized).size == 0
    assert is_locally_delaunay(optimized)
    _assert_valid_run(mesh, optimized, trace)


def test_square_grid_loses_obtuse_triangles():
    mesh = Fx.square_grid(cells_per_side=8, noise=0.3, seed=3)
    bad_before = non_well_centered_cells(mesh).size
    assert bad_before >= 0.1 * mesh.cell_count

    optimized, trace = optimize_schedule(mesh, _schedule((EnergyConfig(), 100)))
    assert non_well_centered_cells(optimized).size < bad_before
    assert trace.records[-1].energy < trace.records[0].energy
    _assert_valid_run(mesh, optimized, trace)


def test_square_grid_with_centered_nodes_becomes_acute():
    mesh = Fx.centered_square_grid(cells_per_side=8, noise=0.1, seed=3)
    assert find_lonely_vertices(mesh).count == 0
    assert non_well_centered_cells(mesh).size >= 0.1 * mesh.cell_count

    repaired = repair_connectivity_2d(mesh)
    assert repaired.flips == []

    optimized, trace = optimize_schedule(repaired.mesh, _schedule((EnergyConfig(), 200)))
    assert non_well_centered_cells(optimized).size == 0
    assert is_locally_delaunay(optimized)
    _assert_valid_run(mesh, optimized, trace)


def test_barrier_stage_never_inverts_cells():
    mesh = Fx.square_grid(cells_per_side=6, noise=0.25, seed=9)
    assert mesh.inverted_cells().size == 0

    optimized, trace = optimize_schedule(mesh, _schedule((EnergyConfig(family=EnergyFamily.EpWithBarrier), 40)))
    assert optimized.inverted_cells().size == 0
    _assert_valid_run(mesh, optimized, trace)


def test_barrier_prevents_the_inversion_plain_Ep_walks_into():
    mesh = Fx.square_grid(cells_per_side=4, noise=0.45, seed=9)
    assert mesh.inverted_cells().size == 0

    plain, plain_trace = optimize_schedule(mesh, _schedule((EnergyConfig(), 40)))
    assert plain.inverted_cells().size > 0
    _assert_valid_run(mesh, plain, plain_trace)

    guarded, trace = optimize_schedule(mesh, _schedule((EnergyConfig(family=EnergyFamily.EpWithBarrier), 40)))
    assert guarded.inverted_cells().size == 0
    _assert_valid_run(mesh, guarded, trace)


def test_tetrahedral_mesh_beats_laplacian_smoothing():
    mesh = Fx.cube_mesh(cells_per_side=3, noise=0.15, seed=4)
    config = EnergyConfig(p=16)
    optimized, trace = optimize_schedule(mesh, _schedule((config, 50)))
    smoothed = laplacian_smooth(mesh, 60)

    bad = non_well_centered_cells(optimized).size
    assert bad < non_well_centered_cells(mesh).size
    assert bad < non_well_centered_cells(smoothed).size
    assert min_height_ratio(optimized) > min_height_ratio(mesh)
    assert energy_Ep(optimized, config) < energy_Ep(mesh, config)
    _assert_valid_run(mesh, optimized, trace)


def test_planar_energies_are_rejected_for_tetrahedra():
    with pytest.raises(ValueError):
        optimize_schedule(Fx.cube_mesh(2), _schedule((EnergyConfig(family=EnergyFamily.Emax), 5)))


def test_only_requested_vertices_move():
    mesh = Fx.hexagonal_lattice(rings=2, noise=0.3, seed=3)
    moving = int(mesh.interior_vertices[0])
    settings = OptimizationSettings(schedule=((EnergyConfig(), 10),), free_vertices=(moving,))
    optimized, trace = optimize_schedule(mesh, settings)
    _assert_valid_run(mesh, optimized, trace)

    fixed = np.ones(mesh.vertex_count, dtype=bool)
    fixed[moving] = False
    assert np.array_equal(optimized.vertices[fixed], mesh.vertices[fixed])


def test_mesh_without_free_vertices_is_returned_unchanged(right):
    optimized, trace = optimize_schedule(right, _schedule((EnergyConfig(), 10)))
    assert np.array_equal(optimized.vertices, right.vertices)
    assert trace.records == []


def test_single_stage_driver(off_center_fan):
    optimized, trace = optimize(off_center_fan, OptimizationSettings(max_iterations=30, energy=EnergyConfig(p=2)))
    assert {record.energy_label for record in trace.records} == {"E2"}
    assert non_well_centered_cells(optimized).size == 0
    _assert_valid_run(off_center_fan, optimized, trace)


# _________________________Trace_________________________
def test_trace_csv_and_json(off_center_fan):
    optimized, trace = optimize_schedule(off_center_fan, _schedule((EnergyConfig(), 5), (EnergyConfig(p=6), 5)))
    _assert_valid_run(off_center_fan, optimized, trace)
    stream = io.StringIO()
    trace.to_csv(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "iter,energy,grad_norm,step,bad_count"
    assert [int(line.split(",")[0]) for line in lines[1:]] == list(range(len(trace.records)))
    assert '"stop_reasons"' in trace.to_json()


# _________________________Laplacian Smoothing_________________________
def test_laplacian_moves_fan_center_to_centroid(off_center_fan):
    smoothed = laplacian_smooth(off_center_fan, 1)
    assert smoothed.vertices[6] == pytest.approx([0.0, 0.0], abs=1e-12)
    _assert_only_interior_moved(off_center_fan, smoothed)


def test_laplacian_zero_sweeps_and_validation(off_center_fan):
    assert np.array_equal(laplacian_smooth(off_center_fan, 0).vertices, off_center_fan.vertices)
    with pytest.raises(ValueError):
        laplacian_smooth(off_center_fan, -1)


def test_laplacian_cannot_fix_a_square_grid():
    mesh = Fx.square_grid(cells_per_side=6, noise=0.3, seed=5)
    smoothed = laplacian_smooth(mesh, 60)
    assert non_well_centered_cells(smoothed).size > 0
    _assert_only_interior_moved(mesh, smoothed)
