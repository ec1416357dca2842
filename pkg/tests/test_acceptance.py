"""End-to-end acceptance checks A1 to A11.

Each test prints a single ``A<n> PASS|FAIL`` line (visible with ``pytest -s``)
before asserting.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
import pytest

from treelimit import checks
from treelimit import degeneration as dg
from treelimit import harmonic as hm
from treelimit import hyperbolic as hyp
from treelimit import rtree as rt
from treelimit.cli import main
from treelimit.group_rep import diagonal_stretch, family_at, free_group

CONFIG = Path(__file__).resolve().parents[1] / "examples" / "diag_stretch.json"
F1 = free_group("a")
F2 = free_group("a", "b")


def report(tag: str, ok: bool, detail: str) -> None:
    print(f"{tag} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def stretch_run():
    words = [F2.word(w) for w in ("a", "b", "ab")]
    start = time.perf_counter()
    run = dg.run_degeneration(diagonal_stretch(), hm.rose(2), words, list(range(1, 9)), seed=0)
    return run, time.perf_counter() - start


def test_a1_trace_length_inequality():
    start = time.perf_counter()
    res = checks.check_trace_length(seed=0, cases=1000)
    elapsed = time.perf_counter() - start
    report("A1", res.passed and elapsed < 1.0, f"{res.detail}, {elapsed:.2f}s")


def test_a2_solver_soundness():
    start = time.perf_counter()
    rep = family_at(diagonal_stretch(), 1.0)
    graph = hm.rose(2)
    _, best = hm.minimize(graph, rep, tol=1e-8)
    rng = np.random.default_rng(0)
    gaps = []
    for _ in range(20):
        init = hyp._random_points(rng, 1, 2.0)
        _, rep_k = hm.minimize(graph, rep, init=init, tol=1e-8)
        gaps.append(abs(rep_k.energy - best.energy) / best.energy)
    bound = hm.displacement_lower_bound(graph, rep)
    elapsed = time.perf_counter() - start
    ok = (
        best.status == "converged"
        and best.gradient_norm <= 1e-8
        and max(gaps) <= 1e-5
        and best.energy >= bound - 1e-6
        and elapsed < 10.0
    )
    report("A2", ok, f"E={best.energy:.10g}, |grad|={best.gradient_norm:.1e}, restart gap {max(gaps):.1e}, "
                     f"lower bound {bound:.6g}, {elapsed:.2f}s")


def test_a3_gradient_against_finite_differences():
    res = checks.check_gradient(seed=0, cases=100)
    report("A3", res.passed, res.detail)


def test_a4_thinness_decay(stretch_run):
    run, elapsed = stretch_run
    ratios = np.array([r.delta_ratio for r in run.records])
    scaled = np.array([r.delta * math.sqrt(r.energy) for r in run.records])
    decreasing = bool(np.all(np.diff(ratios[1:]) < 0))
    bounded = bool(np.all(scaled <= 2.0 * scaled[2]))
    ok = decreasing and bounded and elapsed < 120.0
    report("A4", ok, "delta/diam " + " ".join(f"{x:.4f}" for x in ratios)
           + f"; delta*sqrt(E) max {scaled.max():.4f} vs 2x{scaled[2]:.4f}; {elapsed:.1f}s")


def test_a5_projective_length_limit(stretch_run):
    run, _ = stretch_run
    lengths = np.asarray(run.final_lengths(), dtype=float)
    gap = dg.projective_compare(lengths, [1.0, 1.0, 2.0])
    report("A5", gap <= 0.05, f"final lengths {np.round(lengths, 4).tolist()}, max-norm gap {gap:.4f}")


def test_a6_sandwich_inequality(stretch_run):
    run, _ = stretch_run
    slack = 2.0 * run.delta_thin * 1.1
    worst_low, worst_high = math.inf, math.inf
    for r in run.records:
        worst_low = min(worst_low, float(np.min(r.sample_lengths - r.rho_lengths)))
        worst_high = min(worst_high, float(np.min(r.rho_lengths + slack - r.sample_lengths)))
    ok = worst_low >= -1e-9 and worst_high >= 0.0
    report("A6", ok, f"min lower margin {worst_low:.2e}, min upper margin {worst_high:.4f} (slack {slack:.4f})")


def test_a7_tree_reconstruction():
    start = time.perf_counter()
    res = checks.check_reconstruction(seed=0, cases=200)
    elapsed = time.perf_counter() - start
    report("A7", res.passed and elapsed < 30.0, f"{res.detail}, {elapsed:.2f}s")


def test_a8_projection_and_minimal_subtree():
    results = [
        checks.check_projection_decreasing(seed=0, cases=1000),
        checks.check_projection_equivariant(seed=0, cases=1000),
        checks.check_minimal_subtree(seed=0, cases=50),
    ]
    report("A8", all(r.passed for r in results), "; ".join(r.detail for r in results))


def _attempt(build):
    try:
        return rt.classify_semisimple(build())
    except rt.TreeError as err:
        return f"unconstructible ({type(err).__name__}: {err})"


def _line_example():
    return checks.line_action(np.random.default_rng(0), ["shift", "shift"], [1.0, 2.5])[0]


def _crossing_axes_example():
    # four infinite arms at one vertex; a translates along arms 0-1, b along arms 2-3
    t = rt.SimplicialTree(1, [(0, None, math.inf)] * 4)
    a = rt.TreeIsometry(t, [t.point(1, 1.0)], {0: 0, 1: 1, 2: 2, 3: 3})
    b = rt.TreeIsometry(t, [t.point(3, 1.0)], {0: 0, 1: 1, 2: 2, 3: 3})
    return rt.TreeAction(t, F2, {"a": a, "b": b})


def _tripod_end_example():
    t = rt.SimplicialTree(1, [(0, None, math.inf)] * 3)
    a = rt.TreeIsometry(t, [t.point(0, 1.0)], {0: 0, 1: 1, 2: 2})
    return rt.TreeAction(t, F1, {"a": a})


def test_a9_shift_properties_and_classification():
    shift = checks.check_shift_decreasing(seed=0, per_case=50)
    equiv = checks.check_shift_equivariant(seed=0, cases=200)
    got = {
        "isometric-to-line-action": _attempt(_line_example),
        "no-fixed-end": _attempt(_crossing_axes_example),
        "fixes-end-not-line": _attempt(_tripod_end_example),
    }
    branches_ok = all(k == v for k, v in got.items())
    detail = f"{shift.detail}; {equiv.detail}; " + "; ".join(f"expected {k}: got {v}" for k, v in got.items())
    report("A9", shift.passed and equiv.passed and branches_ok, detail)


def test_a10_fixed_point_criterion():
    crit = checks.check_fixed_point_criterion(seed=0, count=200, max_len=4)
    serre = checks.check_serre(seed=0, cases=100)
    report("A10", crit.passed and serre.passed, f"{crit.detail}; {serre.detail}")


def test_a11_determinism(tmp_path):
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        out.mkdir()
        assert main(["run", str(CONFIG), "--out", str(out)]) == 0
        outputs.append(((out / "results.csv").read_bytes(), (out / "tree.json").read_bytes()))
    report("A11", outputs[0] == outputs[1], f"csv {len(outputs[0][0])} bytes, tree {len(outputs[0][1])} bytes")
