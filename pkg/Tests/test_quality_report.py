import io
import json

import pytest

from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig, EnergyFamily
from PythonScripts.QualityScripts.QualityReport import quality_report
from PythonScripts.VerificationScripts import MeshFixtures as Fx


def test_equilateral_report(equilateral):
    report = quality_report(equilateral)
    assert report.quantity == "angle_degrees"
    assert report.mean == pytest.approx(60.0)
    assert report.std == pytest.approx(0.0, abs=1e-9)
    assert (report.bad_count, report.bad_percent) == (0, 0.0)
    assert len(report.histogram) == 90
    assert report.histogram["count"].sum() == 3


def test_right_triangle_report(right):
    report = quality_report(right)
    assert (report.bad_count, report.bad_percent) == (1, 100.0)
    assert report.min == pytest.approx(45.0)
    assert report.max == pytest.approx(90.0)
    assert report.mean == pytest.approx(60.0)


def test_report_mean_is_sixty_degrees_for_any_triangle_mesh():
    report = quality_report(Fx.square_grid(6, noise=0.3, seed=1))
    assert report.mean == pytest.approx(60.0)
    assert report.histogram["count"].sum() == 3 * report.cell_count


def test_tetrahedral_report(tetrahedron):
    report = quality_report(tetrahedron)
    assert report.quantity == "height_ratio"
    assert report.mean == pytest.approx(1.0 / 3.0)
    assert report.bad_count == 0
    assert len(report.histogram) == 100
    assert report.histogram["bin_low"].iloc[0] == -1.0
    assert report.histogram["bin_high"].iloc[-1] == 1.0


def test_cube_report_counts_every_vertex_of_every_cell():
    cube = Fx.cube_mesh(2)
    report = quality_report(cube)
    assert report.histogram["count"].sum() == 4 * cube.cell_count
    assert report.bad_count <= cube.cell_count


def test_report_energy_follows_config(right):
    report = quality_report(right, EnergyConfig(family=EnergyFamily.Einfty))
    assert report.energy == pytest.approx(0.5)
    assert report.energy_label == "Einfty"


def test_custom_bins(right):
    assert len(quality_report(right, bins=18).histogram) == 18
    for bins in (0, -3, 2.5):
        with pytest.raises(ValueError):
            quality_report(right, bins=bins)


def test_serialization(right):
    report = quality_report(right, bins=3)
    payload = json.loads(report.to_json())
    assert payload["bad_count"] == 1
    assert payload["histogram"]["count"] == [2, 1, 0]
    assert set(payload) >= {"quantity", "mean", "std", "min", "max", "bad_percent", "energy"}

    stream = io.StringIO()
    report.histogram_to_csv(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "bin_low,bin_high,count"
    assert len(lines) == 4
