import math

import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from conftest import random_simplex_points, seeds
from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.GeometryScripts.SimplexGeometry import (
    DegenerateSimplexError, circumcenter, circumcenter_barycentric, equatorial_ball_test, equatorial_margin,
    height_ratios, inradius, is_degenerate, is_k_well_centered, normalized_volume, signed_height,
    simplex_geometry, simplex_volume, vertex_angles
)

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
RIGHT = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
OBTUSE = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.5]])
TETRAHEDRON = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])

dimensions = st.sampled_from([2, 3])


# _________________________Circumcenters_________________________
def test_equilateral_circumcenter():
    center, radius = circumcenter(EQUILATERAL)
    assert center == pytest.approx([0.5, math.sqrt(3.0) / 6.0], abs=1e-12)
    assert radius == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-12)


def test_right_triangle_circumcenter_is_hypotenuse_midpoint():
    center, radius = circumcenter(RIGHT)
    assert center == pytest.approx([0.5, 0.5], abs=1e-12)
    assert radius == pytest.approx(math.sqrt(2.0) / 2.0, rel=1e-12)


def test_circumcenter_of_embedded_edge():
    center, radius = circumcenter([[0.0, 0.0, 0.0], [2.0, 2.0, 1.0]])
    assert center == pytest.approx([1.0, 1.0, 0.5], abs=1e-12)
    assert radius == pytest.approx(1.5, rel=1e-12)


def test_circumcenter_of_a_point():
    center, radius = circumcenter([[3.0, 4.0]])
    assert center.tolist() == [3.0, 4.0]
    assert radius == 0.0


def test_circumcenter_rejects_mismatched_k():
    with pytest.raises(ValueError):
        circumcenter(EQUILATERAL, k=3)


def test_collinear_triangle_is_degenerate():
    collinear = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]
    assert is_degenerate(collinear)
    with pytest.raises(DegenerateSimplexError) as raised:
        circumcenter(collinear)

    assert raised.value.dimension == 2


def test_coincident_vertices_have_zero_normalized_volume():
    assert normalized_volume([[1.0, 1.0], [1.0, 1.0], [2.0, 3.0]]) == 0.0
    assert normalized_volume([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]) == 0.0


def test_volumes():
    assert simplex_volume(RIGHT) == pytest.approx(0.5)
    assert simplex_volume(TETRAHEDRON) == pytest.approx(8.0 / 3.0)
    assert normalized_volume(EQUILATERAL) == pytest.approx(math.sqrt(3.0) / 2.0)


def test_barycentric_circumcenter_of_obtuse_triangle_has_negative_entry():
    coordinates = circumcenter_barycentric(OBTUSE)
    assert coordinates.sum() == pytest.approx(1.0)
    assert coordinates[2] < 0.0 < min(coordinates[0], coordinates[1])


# _________________________Heights_________________________
def test_equilateral_height_ratios_are_one_half():
    assert height_ratios(EQUILATERAL) == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)


def test_regular_tetrahedron_height_ratios_are_one_third():
    assert height_ratios(TETRAHEDRON) == pytest.approx([1.0 / 3.0] * 4, abs=1e-12)


def test_right_triangle_heights():
    assert abs(signed_height(0, RIGHT)) < 1e-12
    assert signed_height(1, RIGHT) == pytest.approx(0.5, abs=1e-12)
    assert height_ratios(RIGHT)[1:] == pytest.approx([1.0 / math.sqrt(2.0)] * 2, abs=1e-12)


def test_obtuse_vertex_has_negative_height():
    # Circumcenter (1, -0.75), circumradius 1.25.
    assert signed_height(2, OBTUSE) == pytest.approx(-0.75, abs=1e-12)
    assert height_ratios(OBTUSE)[2] == pytest.approx(-0.6, abs=1e-12)


def test_signed_height_rejects_missing_vertex():
    with pytest.raises(IndexError):
        signed_height(3, EQUILATERAL)


def test_degenerate_simplex_geometry_uses_minus_one():
    geometry = simplex_geometry([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert geometry.degenerate
    assert np.all(np.isinf(geometry.circumcenter))
    assert geometry.height_ratios.tolist() == [-1.0, -1.0, -1.0]


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=dimensions)
def test_pythagorean_relation(seed, n):
    simplex = random_simplex_points(seed, n)
    _, radius = circumcenter(simplex)
    for i in range(n + 1):
        _, facet_radius = circumcenter(np.delete(simplex, i, axis=0))
        assert signed_height(i, simplex) ** 2 + facet_radius ** 2 == pytest.approx(radius ** 2, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_height_ratio_is_cosine_of_angle(seed):
    triangle = random_simplex_points(seed, 2)
    assert height_ratios(triangle) == pytest.approx(np.cos(vertex_angles(triangle)), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=dimensions, scale=st.floats(min_value=1e-2, max_value=1e2))
def test_height_ratios_are_similarity_invariant(seed, n, scale):
    simplex = random_simplex_points(seed, n)
    rotation, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, n)))
    moved = scale * simplex @ rotation.T + 7.0
    assert height_ratios(moved) == pytest.approx(height_ratios(simplex), abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=dimensions)
def test_min_height_ratio_is_at_most_one_over_n(seed, n):
    assert height_ratios(random_simplex_points(seed, n)).min() <= 1.0 / n + 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=dimensions)
def test_batched_height_ratios_match_scalar(seed, n):
    simplex = random_simplex_points(seed, n)
    assert Bg.height_ratio_table(simplex[None])[0] == pytest.approx(height_ratios(simplex), abs=1e-9)


def test_batched_height_ratios_flag_degenerate_cells():
    table = Bg.height_ratio_table(np.array([EQUILATERAL, [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]]))
    assert table[0] == pytest.approx([0.5] * 3, abs=1e-12)
    assert table[1].tolist() == [-1.0, -1.0, -1.0]


# _________________________Well-Centeredness_________________________
def test_equilateral_and_right_triangles():
    assert is_k_well_centered(EQUILATERAL, 2)
    assert not is_k_well_centered(RIGHT, 2)
    assert not is_k_well_centered(OBTUSE, 2)
    assert is_k_well_centered(OBTUSE, 1)


def test_regular_tetrahedron_is_completely_well_centered():
    assert all(is_k_well_centered(TETRAHEDRON, k) for k in (1, 2, 3))
    assert equatorial_ball_test(TETRAHEDRON)


def test_face_dimension_out_of_range():
    with pytest.raises(ValueError):
        is_k_well_centered(EQUILATERAL, 3)

    with pytest.raises(ValueError):
        is_k_well_centered(EQUILATERAL, 0)


def test_equatorial_test_rejects_obtuse_triangle():
    assert equatorial_ball_test(EQUILATERAL)
    assert not equatorial_ball_test(OBTUSE)


@settings(max_examples=200, deadline=None)
@given(seed=seeds, n=dimensions)
def test_equatorial_balls_characterize_well_centeredness(seed, n):
    simplex = random_simplex_points(seed, n)
    if equatorial_margin(simplex) > 1e-8:
        assert equatorial_ball_test(simplex) == is_k_well_centered(simplex, n)


# _________________________Angles_________________________
def test_angles_sum_to_pi():
    assert vertex_angles(OBTUSE).sum() == pytest.approx(math.pi)
    assert math.degrees(vertex_angles(OBTUSE)[2]) == pytest.approx(126.86989764584402)


def test_angle_conventions_for_collapsed_triangles():
    assert vertex_angles([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]).tolist() == [math.pi / 2, math.pi / 2, 0.0]
    assert vertex_angles([[1.0, 1.0]] * 3).tolist() == [0.0, 0.0, math.pi]
    assert vertex_angles([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]) == pytest.approx([0.0, math.pi, 0.0])


def test_batched_angles_follow_the_same_conventions():
    stacked = np.array([[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], [[1.0, 1.0]] * 3, RIGHT])
    angles = Bg.triangle_angles(stacked)
    assert angles[0].tolist() == [math.pi / 2, math.pi / 2, 0.0]
    assert angles[1].tolist() == [0.0, 0.0, math.pi]
    assert angles[2] == pytest.approx([math.pi / 2, math.pi / 4, math.pi / 4])


def test_inradius():
    assert inradius(EQUILATERAL) == pytest.approx(math.sqrt(3.0) / 6.0)
    assert inradius(RIGHT) == pytest.approx(1.0 - math.sqrt(2.0) / 2.0)
