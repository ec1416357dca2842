from __future__ import annotations

import math

import numpy as np
import pytest

from treelimit import harmonic as hm
from treelimit import hyperbolic as hyp
from treelimit.checks import gradient_error, random_sl2
from treelimit.group_rep import Representation, Word, diagonal_stretch, family_at, free_group, identity_representation

F1 = free_group("a")
F2 = free_group("a", "b")


def loop_graph():
    return hm.rose(1)


def test_graph_validation():
    with pytest.raises(ValueError):
        hm.TwistedGraph(2, (hm.Edge(0, 0, 1.0, Word.gen(0)),))
    with pytest.raises(ValueError):
        hm.TwistedGraph(1, (hm.Edge(0, 0, -1.0, Word.gen(0)),))


def test_trivial_holonomy_equal_positions_has_zero_energy():
    g = hm.TwistedGraph(2, (hm.Edge(0, 1, 1.0, Word()), hm.Edge(1, 0, 2.0, Word())))
    u = np.tile(hyp.point_from_spatial([0.3, 0.1, -0.2]), (2, 1))
    assert hm.energy(g, identity_representation(F2), u) == 0.0
    assert np.allclose(hm.energy_gradient(g, identity_representation(F2), u), 0.0)


def test_single_loop_energy_is_squared_displacement():
    a = random_sl2(np.random.default_rng(1))
    rep = Representation(F1, (a,))
    p = hyp.point_from_spatial([0.2, -0.5, 1.0])
    assert hm.energy(loop_graph(), rep, p[None]) == pytest.approx(hyp.displacement(a, p) ** 2, rel=1e-12)


def test_rose_energy_by_hand():
    rep = family_at(diagonal_stretch(), 1.0)
    o = hyp.ORIGIN
    want = sum(hyp.distance(o, hyp.act(m, o)) ** 2 for m in rep.images)
    assert hm.energy(hm.rose(2), rep, o[None]) == pytest.approx(want, rel=1e-12)


def test_elliptic_loop_at_fixed_point_has_zero_gradient():
    th = 0.8
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    rep = Representation(F1, (rot,))
    assert np.allclose(hm.energy_gradient(loop_graph(), rep, hyp.ORIGIN[None]), 0.0, atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    graph = hm.TwistedGraph(
        3,
        (
            hm.Edge(0, 1, 1.0, Word.gen(0)),
            hm.Edge(1, 2, 0.5, Word.gen(1, -1)),
            hm.Edge(2, 0, 2.0, Word()),
            hm.Edge(1, 1, 1.5, Word.gen(0) * Word.gen(1)),
        ),
    )
    rep = Representation(F2, (random_sl2(rng, 0.6), random_sl2(rng, 0.6)))
    assert gradient_error(rng, graph, rep) < 1e-5


def test_identity_representation_minimizes_to_a_point():
    u, rep = hm.minimize(hm.rose(2), identity_representation(F2))
    assert rep.energy == 0.0 and rep.status == "converged"


def test_loxodromic_loop_converges_onto_the_axis():
    a = np.diag([math.e, 1 / math.e])
    rep = Representation(F1, (a,))
    start = hyp.point_from_spatial([0.7, -0.4, 0.3])[None]
    u, report = hm.minimize(loop_graph(), rep, init=start)
    assert report.status == "converged"
    # the axis of diag(e, 1/e) lies in the (x0, x3) plane
    assert abs(u[0, 1]) < 1e-6 and abs(u[0, 2]) < 1e-6
    assert report.energy == pytest.approx(4.0, abs=1e-8)


def test_parabolic_pair_escapes():
    p1 = np.array([[1, 1], [0, 1]], dtype=complex)
    p2 = np.array([[1, 1j], [0, 1]], dtype=complex)
    u, report = hm.minimize(hm.rose(2), Representation(F2, (p1, p2)))
    assert report.status == "escaped"
    assert report.energy < 1e-6


def test_energy_history_is_non_increasing():
    rep = family_at(diagonal_stretch(), 2.0)
    start = hyp.point_from_spatial([1.0, 0.5, -0.7])[None]
    _, report = hm.minimize(hm.rose(2), rep, init=start)
    assert np.all(np.diff(report.history) <= 1e-12)


def test_pullback_metric_small_cases():
    rep = identity_representation(F2)
    u = hyp.ORIGIN[None]
    assert hm.pullback_metric(hm.rose(2), rep, u, [(0, Word())]).shape == (1, 1)
    m = hm.pullback_metric(hm.rose(2), rep, u, [(0, Word()), (0, Word.gen(0)), (0, Word.gen(1))])
    assert np.allclose(m, 0.0)


def test_pullback_entry_on_axis_equals_translation_length():
    a = np.diag([math.exp(1.3), math.exp(-1.3)])
    rep = Representation(F1, (a,))
    u = hyp.exp_map(hyp.ORIGIN, np.array([0, 0, 0, 0.4]))[None]
    m = hm.pullback_metric(loop_graph(), rep, u, [(0, Word()), (0, Word.gen(0))])
    assert m[0, 1] == pytest.approx(hyp.translation_length(a), abs=1e-12)


def test_lower_bound_for_diagonal_stretch():
    t = 1.5
    rep = family_at(diagonal_stretch(), t)
    assert hm.displacement_lower_bound(hm.rose(2), rep) >= 2 * (2 * t) ** 2 - 1e-9
    assert hm.displacement_lower_bound(hm.rose(2), identity_representation(F2)) == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_lower_bound_never_exceeds_minimum(seed):
    rng = np.random.default_rng(100 + seed)
    rep = Representation(F2, (random_sl2(rng, 0.8), random_sl2(rng, 0.8)))
    _, report = hm.minimize(hm.rose(2), rep, tol=1e-8)
    assert hm.displacement_lower_bound(hm.rose(2), rep) <= report.energy + 1e-6


def test_lipschitz_ratio_of_balanced_rose():
    rep = family_at(diagonal_stretch(), 1.0)
    assert hm.lipschitz_ratio(hm.rose(2), rep, hyp.ORIGIN[None]) == pytest.approx(0.5)


def test_rejects_nonpositive_tolerance():
    with pytest.raises(ValueError):
        hm.minimize(hm.rose(2), identity_representation(F2), tol=0.0)
