from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelimit import hyperbolic as hyp

coords = st.floats(-3.0, 3.0, allow_nan=False)
points = st.tuples(coords, coords, coords).map(hyp.point_from_spatial)
entries = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)
matrices = st.tuples(entries, entries, entries, entries).filter(
    lambda z: abs(z[0] * z[3] - z[1] * z[2]) > 0.1
).map(lambda z: hyp.normalize_sl2(np.array([[z[0], z[1]], [z[2], z[3]]])))


def test_distance_of_coincident_points_is_zero():
    assert hyp.distance(hyp.ORIGIN, hyp.ORIGIN) == 0.0


def test_unit_geodesic_distance():
    q = np.array([math.cosh(1), math.sinh(1), 0, 0])
    assert hyp.distance(hyp.ORIGIN, q) == pytest.approx(1.0, abs=1e-12)


def test_distance_rejects_points_off_the_hyperboloid():
    with pytest.raises(hyp.InvalidPointError):
        hyp.distance(hyp.ORIGIN, np.array([0.5, 0, 0, 0]))


def test_small_distances_keep_precision():
    q = hyp.exp_map(hyp.ORIGIN, np.array([0, 1e-9, 0, 0]))
    assert hyp.distance(hyp.ORIGIN, q) == pytest.approx(1e-9, rel=1e-6)


@given(points, points)
def test_distance_agrees_with_upper_half_space(p, q):
    uhs = hyp.upper_half_space_distance(hyp.to_upper_half_space(p), hyp.to_upper_half_space(q))
    assert hyp.distance(p, q) == pytest.approx(uhs, abs=1e-9, rel=1e-9)


@settings(max_examples=300)
@given(points, points, points)
def test_triangle_inequality(p, q, r):
    assert hyp.distance(p, r) <= hyp.distance(p, q) + hyp.distance(q, r) + 1e-9


def test_log_of_same_point_is_zero():
    p = hyp.point_from_spatial([0.3, -1.0, 2.0])
    assert np.allclose(hyp.log_map(p, p), 0.0)


@given(points, points)
def test_log_is_tangent_with_length_equal_to_distance(p, q):
    v = hyp.log_map(p, q)
    assert abs(hyp.minkowski_dot(v, p)) <= 1e-9 * max(1.0, np.abs(p).max() ** 2)
    assert hyp.minkowski_norm(v) == pytest.approx(hyp.distance(p, q), abs=1e-9, rel=1e-9)


@given(points, points)
def test_exp_inverts_log(p, q):
    back = hyp.exp_map(p, hyp.log_map(p, q))
    assert hyp.distance(back, q) <= 1e-9 * max(1.0, hyp.distance(p, q))


def test_exp_closed_form_and_zero_vector():
    t = 0.7
    assert np.allclose(hyp.exp_map(hyp.ORIGIN, np.array([0, t, 0, 0])), [math.cosh(t), math.sinh(t), 0, 0])
    assert np.allclose(hyp.exp_map(hyp.ORIGIN, np.zeros(4)), hyp.ORIGIN)


def test_exp_rejects_non_tangent_vectors():
    with pytest.raises(hyp.TangencyError):
        hyp.exp_map(hyp.ORIGIN, np.array([1.0, 0, 0, 0]))


@given(points, st.tuples(coords, coords, coords))
def test_exp_moves_by_the_vector_length(p, w):
    v = hyp.tangent_basis(p).T @ np.array(w) / 2
    assert hyp.distance(p, hyp.exp_map(p, v)) == pytest.approx(hyp.minkowski_norm(v), abs=1e-9)


def test_geodesic_point_endpoints_and_midpoint():
    p = hyp.point_from_spatial([1, 0, 0])
    q = hyp.point_from_spatial([-2, 1, 0.5])
    m = hyp.geodesic_point(p, q, 0.5)
    assert np.allclose(hyp.geodesic_point(p, q, 0.0), p)
    assert np.allclose(hyp.geodesic_point(p, q, 1.0), q)
    assert hyp.distance(p, m) == pytest.approx(hyp.distance(p, q) / 2, abs=1e-12)


def test_identity_gives_identity_lorentz():
    assert np.allclose(hyp.to_lorentz(np.eye(2)), np.eye(4))


def test_half_diagonal_is_unit_boost_in_x0_x3():
    lor = hyp.to_lorentz(np.diag([math.exp(0.5), math.exp(-0.5)]))
    want = np.eye(4)
    want[0, 0] = want[3, 3] = math.cosh(1)
    want[0, 3] = want[3, 0] = math.sinh(1)
    assert np.allclose(lor, want, atol=1e-12)


def test_unitary_fixes_origin():
    th = 0.9
    u = np.array([[math.cos(th), 1j * math.sin(th)], [1j * math.sin(th), math.cos(th)]])
    assert np.allclose(hyp.to_lorentz(u) @ hyp.ORIGIN, hyp.ORIGIN)


@given(matrices, matrices)
def test_lorentz_is_a_homomorphism_into_the_isometry_group(a, b):
    la, lb = hyp.to_lorentz(a), hyp.to_lorentz(b)
    lab = hyp.to_lorentz(a @ b)
    scale = max(1.0, np.abs(lab).max())
    assert np.allclose(lab, la @ lb, atol=1e-9 * scale, rtol=0)
    assert hyp.is_lorentz(la)


@given(matrices, points, points)
def test_action_preserves_distance(a, p, q):
    lor = hyp.to_lorentz(a)
    d = hyp.distance(p, q)
    moved = hyp.distance(hyp.project_to_hyperboloid(lor @ p), hyp.project_to_hyperboloid(lor @ q))
    assert moved == pytest.approx(d, abs=1e-9 * max(1.0, np.abs(lor).max() ** 2), rel=1e-7)


@pytest.mark.parametrize(
    "m, want",
    [
        (np.eye(2), 0.0),
        (np.array([[1, 1], [0, 1]]), 0.0),
        (np.array([[0, -1], [1, 0]]), 0.0),
        (np.diag([math.e, 1 / math.e]), 2.0),
    ],
)
def test_translation_length_cases(m, want):
    assert hyp.translation_length(m) == pytest.approx(want, abs=1e-12)


def test_translation_length_matches_displacement_along_axis():
    m = np.diag([math.e, 1 / math.e])
    axis = [hyp.exp_map(hyp.ORIGIN, np.array([0, 0, 0, s])) for s in np.linspace(-2, 2, 9)]
    disp = [hyp.displacement(m, x) for x in axis]
    assert min(disp) == pytest.approx(2.0, abs=1e-10)


@given(matrices, matrices)
def test_translation_length_is_conjugation_invariant(a, b):
    c = b @ a @ hyp.sl2_inverse(b)
    assert hyp.translation_length(c) == pytest.approx(hyp.translation_length(a), abs=1e-7)


def test_determinant_check():
    with pytest.raises(hyp.HyperbolicError):
        hyp.as_sl2(np.diag([2.0, 2.0]))


def test_thin_constant_small_triangles_are_thin():
    p = hyp.ORIGIN
    q = hyp.exp_map(p, np.array([0, 0.01, 0, 0]))
    r = hyp.exp_map(p, np.array([0, 0.005, 0.005 * math.sqrt(3), 0]))
    assert hyp.triangle_thinness(p, q, r) < 0.01


def test_thin_constant_collinear_triangle_is_zero():
    p = hyp.ORIGIN
    q = hyp.exp_map(p, np.array([0, 2.0, 0, 0]))
    r = hyp.exp_map(p, np.array([0, 5.0, 0, 0]))
    # arccosh near 1 limits the resolution to about sqrt(machine epsilon)
    assert hyp.triangle_thinness(p, q, r) <= 1e-6


def test_thin_constant_stabilizes_and_is_deterministic():
    a = hyp.estimate_thin_constant(samples=10_000, seed=3).delta_thin
    b = hyp.estimate_thin_constant(samples=20_000, seed=3).delta_thin
    assert a == hyp.estimate_thin_constant(samples=10_000, seed=3).delta_thin
    assert abs(a - b) <= 0.1 * b
    assert 0 < a <= math.log(math.sqrt(3)) + 1e-9


def test_thin_constant_needs_enough_samples():
    with pytest.raises(ValueError):
        hyp.estimate_thin_constant(samples=10)
