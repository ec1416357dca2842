from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelimit import checks
from treelimit import degeneration as dg
from treelimit import harmonic as hm
from treelimit.group_rep import Word, constant_family, diagonal_stretch, free_group

F1 = free_group("a")
F2 = free_group("a", "b")
SQRT2 = math.sqrt(2.0)
square = np.array([[0, 1, SQRT2, 1], [1, 0, 1, SQRT2], [SQRT2, 1, 0, 1], [1, SQRT2, 1, 0]])


def line_metric(xs):
    xs = np.asarray(xs, dtype=float)
    return np.abs(xs[:, None] - xs[None, :])


# ----------------------------------------------------------------- rescale


def test_rescale_examples():
    m = line_metric([0, 1, 3])
    assert np.array_equal(dg.rescale(m, 1.0).distances, m)
    assert np.allclose(dg.rescale(m, 4.0).distances, m / 2)
    r = dg.rescale(m, 7.3)
    assert abs(r.diameter * math.sqrt(7.3) - 3.0) <= 1e-12
    for bad in (0.0, -1.0):
        with pytest.raises(dg.InvalidEnergyError):
            dg.rescale(m, bad)


def test_metric_check_catches_triangle_failure():
    m = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    with pytest.raises(ValueError):
        dg.RescaledMetric((0, 1, 2), m, 1.0).check()
    dg.RescaledMetric((0, 1, 2), line_metric([0, 1, 2]), 1.0).check()


# ------------------------------------------------------------ four points


def test_four_point_examples():
    assert dg.gromov_delta(line_metric([0, 0.5, 2, 7])) == 0.0
    assert dg.gromov_delta(square) == pytest.approx((2 * SQRT2 - 2) / 2, abs=1e-15)
    assert dg.gromov_delta(line_metric([0, 1, 2])) == 0.0
    delta, quad = dg.four_point(square)
    assert sorted(quad) == [0, 1, 2, 3]


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_tree_metrics_have_zero_delta(seed):
    rng = np.random.default_rng(seed)
    tree = checks.random_tree(rng, int(rng.integers(4, 14)))
    assert dg.gromov_delta(tree._dist) <= 1e-12


def test_sampled_quadruples_are_seeded(monkeypatch):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(20, 2))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    exact = dg.gromov_delta(d)
    monkeypatch.setattr(dg, "EXHAUSTIVE_LIMIT", 1000)
    sampled = dg.gromov_delta(d, seed=3)
    assert sampled == dg.gromov_delta(d, seed=3)
    assert sampled <= exact + 1e-15


def test_thread_cap_does_not_change_the_result(monkeypatch):
    tree = checks.random_tree(np.random.default_rng(1), 30)
    d = tree._dist + 0.01 * np.random.default_rng(2).random((30, 30))
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0)
    monkeypatch.setenv("TREELIMIT_THREADS", "1")
    one = dg.four_point(d)
    monkeypatch.setenv("TREELIMIT_THREADS", "4")
    assert dg.four_point(d) == one


# ---------------------------------------------------------- tree fitting


def test_three_points_give_a_tripod_with_gromov_product_arms():
    a, b, c = 1.0, 2.0, 3.5
    d = np.array([[0, a + b, a + c], [a + b, 0, b + c], [a + c, b + c, 0]])
    fitted = dg.tree_from_metric(d, 0.01)
    lengths = sorted(e.length for e in fitted.tree.edges)
    assert np.allclose(lengths, [a, b, c])
    assert fitted.tree.n_vertices == 4


@pytest.mark.parametrize("seed", range(5))
def test_random_tree_metric_round_trip(seed):
    rng = np.random.default_rng(seed)
    tree = checks.random_tree(rng, 18)
    leaves = tree.leaves()[:10]
    d = tree._dist[np.ix_(leaves, leaves)]
    fitted = dg.tree_from_metric(d, 1e-9)
    assert np.max(np.abs(fitted.sample_distances() - d)) <= 1e-9


def test_interior_points_and_duplicates_are_placed():
    d = line_metric([0, 1, 1, 2.5, 4])
    fitted = dg.tree_from_metric(d, 1e-9)
    assert np.max(np.abs(fitted.sample_distances() - d)) <= 1e-12
    assert fitted.sample_vertex[1] == fitted.sample_vertex[2]


def test_far_from_tree_metric_is_rejected_with_quadruple():
    with pytest.raises(dg.NotTreeLikeError) as err:
        dg.tree_from_metric(square, 0.05)
    assert sorted(err.value.quadruple) == [0, 1, 2, 3]


def test_near_tree_metric_fits_within_three_tolerances():
    rng = np.random.default_rng(4)
    tree = checks.random_tree(rng, 14)
    d = tree._dist + 0.002 * rng.random(tree._dist.shape)
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    tol = 0.01
    fitted = dg.tree_from_metric(d, tol)
    assert fitted.error <= 3 * tol * d.max()


# ---------------------------------------------------------------- actions


def line_run(t=2.0):
    fam = constant_family(F1, [np.diag([math.exp(t), math.exp(-t)])])
    return dg.run_degeneration(fam, hm.rose(1), [F1.word("a")], [1.0], thin_samples=200)


def test_loxodromic_line_action_translates_by_normalized_length():
    run = line_run()
    rec = run.records[-1]
    assert rec.fitted.error <= 1e-9
    assert rec.tree_lengths[0] == pytest.approx(1.0, abs=1e-9)
    assert rec.action.distortion <= 1e-9


def test_trivially_acting_generator_has_no_distortion():
    fam = constant_family(F2, [np.diag([math.e, 1 / math.e]), np.eye(2)])
    run = dg.run_degeneration(fam, hm.rose(2), [F2.word("a"), F2.word("b")], [1.0], thin_samples=200)
    rec = run.records[-1]
    assert rec.tree_lengths[1] == 0.0
    assert rec.action.distortion <= 1e-9


def test_corrupted_labels_are_not_isometric():
    run = line_run()
    rec = run.records[-1]
    labels = list(run.labels)
    labels[0], labels[3] = labels[3], labels[0]
    with pytest.raises(dg.NonIsometricActionError):
        dg.induced_action(rec.fitted, labels, run.presentation)


# ---------------------------------------------------------- projective


def test_projective_compare_examples():
    assert dg.projective_compare([1, 2, 3], [7, 14, 21]) == 0.0
    assert dg.projective_compare([1, 1, 2], [1, 1, 1.9]) == pytest.approx(0.0263, abs=5e-5)
    with pytest.raises(dg.DegenerateLengthError):
        dg.projective_compare([0, 0, 0], [1, 2, 3])


def test_abelian_fit():
    words = [F2.word(w) for w in ("a", "b", "ab", "aB")]
    assert dg.abelian_fit(words, [1, 2, 3, 1], 2) is not None
    assert dg.abelian_fit(words, [1, 1, 2, 2], 2) is None


# -------------------------------------------------------------------- runs


def test_bounded_family_is_case_one():
    a = np.diag([math.e, 1 / math.e])
    rot = np.array([[math.cos(0.7), -math.sin(0.7)], [math.sin(0.7), math.cos(0.7)]])
    fam = constant_family(F2, [a, rot @ a @ rot.T])
    run = dg.run_degeneration(fam, hm.rose(2), [F2.word("a")], [1, 2, 3], threshold=10.0, thin_samples=200)
    assert np.ptp(run.energies) <= 1e-8
    assert run.case == "case (1)"


def test_diagonal_stretch_run():
    words = [F2.word(w) for w in ("a", "b", "ab")]
    run = dg.run_degeneration(diagonal_stretch(), hm.rose(2), words, [1, 2, 4, 8], thin_samples=1000)
    assert np.all(np.diff(run.energies) > 0)
    assert run.case == "case (2)"
    assert run.records[0].tree_lengths is None
    assert dg.projective_compare(run.final_lengths(), [1, 1, 2]) <= 0.05


def test_unreachable_threshold_reports_the_partial_run():
    words = [F2.word("a")]
    with pytest.raises(dg.NotTreeLikeError) as err:
        dg.run_degeneration(diagonal_stretch(), hm.rose(2), words, [1.0], thin_samples=200)
    assert err.value.run is not None and len(err.value.run.records) == 1
    assert len(err.value.quadruple) == 4


def test_schedule_must_increase():
    with pytest.raises(ValueError):
        dg.run_degeneration(diagonal_stretch(), hm.rose(2), [Word.gen(0)], [2.0, 1.0])
