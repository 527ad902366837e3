import math

import numpy as np
import pytest

from scipy.spatial import Delaunay as ScipyDelaunay

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.ConnectivityScripts.Delaunay import (
    DegenerateInputError, delaunay_triangulation, is_locally_delaunay, is_strictly_convex_quad
)
from PythonScripts.ConnectivityScripts.EdgeFlips import repair_connectivity_2d
from PythonScripts.ConnectivityScripts.LonelyVertices import (
    LonelyKind, find_lonely_vertices, required_dividing_edges
)
from PythonScripts.VerificationScripts import MeshFixtures as Fx

RHOMBUS = [[0.0, 0.0], [2.0, 0.0], [1.0, 0.3], [1.0, -0.3]]


# _________________________Lonely Vertices_________________________
@pytest.mark.parametrize("angle, expected", [
    (0.5, 0), (math.pi / 2, 1), (2.0 * math.pi / 3.0, 1), (math.pi, 2), (1.5 * math.pi, 3),
])
def test_required_dividing_edges(angle, expected):
    assert required_dividing_edges(angle) == expected


def test_fan_center_with_four_neighbors_is_lonely():
    report = find_lonely_vertices(Fx.square_fan())
    assert report.vertices == [4]
    assert report.entries[0].kind is LonelyKind.INTERIOR_2D_UNDER5
    assert report.entries[0].detail == 4
    assert report.to_dict()["entries"][0]["kind"] == "interior_2d_under5"


def test_regular_fan_has_no_lonely_vertices(hexagon_fan):
    assert find_lonely_vertices(hexagon_fan).count == 0


def test_undivided_right_angle_corners_are_lonely():
    report = find_lonely_vertices(Fx.square_two_triangles())
    assert report.vertices == [1, 3]
    assert all(entry.kind is LonelyKind.BOUNDARY_2D_ANGLE and not entry.is_interior for entry in report.entries)
    assert report.entries[0].detail == pytest.approx(math.pi / 2)


def test_eared_hexagon_lonely_vertices():
    assert find_lonely_vertices(Fx.eared_hexagon()).vertices == [1, 4, 6]


def test_tetrahedral_rule(tetrahedron):
    report = find_lonely_vertices(tetrahedron)
    assert report.vertices == [0, 1, 2, 3]
    assert {entry.kind for entry in report.entries} == {LonelyKind.VERTEX_3D_UNDER7}
    assert 13 not in find_lonely_vertices(Fx.cube_mesh(2)).vertices


# _________________________Edge Flips_________________________
def test_eared_hexagon_is_repaired_into_the_fan():
    mesh = Fx.eared_hexagon()
    result = repair_connectivity_2d(mesh)
    assert sorted(result.flips) == [((0, 2), (1, 6)), ((3, 5), (4, 6))]
    assert result.residual.count == 0
    assert sorted(map(sorted, result.mesh.cells.tolist())) == sorted(map(sorted, Fx.hexagon_fan().cells.tolist()))
    assert np.array_equal(result.mesh.vertices, mesh.vertices)
    assert result.mesh.inverted_cells().size == 0


def test_collinear_diagonals_cannot_be_flipped():
    result = repair_connectivity_2d(Fx.square_fan())
    assert result.flips == []
    assert result.residual.vertices == [4]


def test_repair_leaves_good_meshes_alone(hexagon_fan):
    result = repair_connectivity_2d(hexagon_fan)
    assert result.flips == [] and result.mesh is hexagon_fan


def test_repair_is_planar_only(tetrahedron):
    with pytest.raises(ValueError):
        repair_connectivity_2d(tetrahedron)


# _________________________Delaunay_________________________
def test_convex_quad_predicate():
    points = np.array(RHOMBUS)
    assert is_strictly_convex_quad(points, 0, 1, 2, 3)
    assert not is_strictly_convex_quad(np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]),
                                       0, 4, 2, 3)


def test_long_diagonal_violates_the_empty_circle():
    long_diagonal = SimplicialMesh.from_arrays(RHOMBUS, [[0, 1, 2], [0, 3, 1]])
    check = is_locally_delaunay(long_diagonal)
    assert not check
    assert check.violations == [(0, 1)]

    short_diagonal = SimplicialMesh.from_arrays(RHOMBUS, [[0, 3, 2], [1, 2, 3]])
    assert is_locally_delaunay(short_diagonal)


def test_cocircular_points_pass(hexagon_fan):
    assert is_locally_delaunay(Fx.square_two_triangles())
    assert is_locally_delaunay(hexagon_fan)


def test_delaunay_of_the_rhombus_uses_the_short_diagonal():
    assert delaunay_triangulation(RHOMBUS).tolist() == [[0, 3, 2], [1, 2, 3]]


@pytest.mark.parametrize("seed", range(5))
def test_delaunay_matches_scipy_on_generic_points(seed):
    points = np.random.default_rng(seed).uniform(0.0, 1.0, (12, 2))
    triangles = delaunay_triangulation(points)
    assert is_locally_delaunay(SimplicialMesh.from_arrays(points, triangles))

    expected = {tuple(sorted(simplex)) for simplex in ScipyDelaunay(points).simplices.tolist()}
    assert {tuple(sorted(triangle)) for triangle in triangles.tolist()} == expected


def test_points_on_hull_edges_are_kept():
    triangles = delaunay_triangulation([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]])
    assert len(triangles) == 2
    assert set(np.unique(triangles)) == {0, 1, 2, 3}


@pytest.mark.parametrize("points", [
    [[0.0, 0.0], [1.0, 0.0]],
    [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
    [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]],
])
def test_degenerate_point_sets(points):
    with pytest.raises(DegenerateInputError):
        delaunay_triangulation(points)


def test_point_sets_must_be_planar():
    with pytest.raises(ValueError):
        delaunay_triangulation([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
