"""Random instance generators and property suites for the command line ``check``.

Each suite returns a list of :class:`CheckResult`.  A failure records the seed
that reproduces it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import degeneration as dg
from . import harmonic as hm
from . import hyperbolic as hyp
from . import rtree as rt
from .group_rep import Representation, Word, free_group, reduced_words

EXACT = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seed: int | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        seed = "" if self.seed is None else f" (seed {self.seed})"
        return f"{status} {self.name}{seed}: {self.detail}"


# ------------------------------------------------------------- generators


def random_tree(rng: np.random.Generator, n_vertices: int, n_rays: int = 0, lengths=(0.1, 2.0)) -> rt.SimplicialTree:
    """Random finite tree; vertex ``i`` hangs off a random earlier vertex."""
    edges = [(int(rng.integers(i)), i, float(rng.uniform(*lengths))) for i in range(1, n_vertices)]
    edges += [(int(rng.integers(n_vertices)), None, math.inf) for _ in range(n_rays)]
    return rt.SimplicialTree(n_vertices, edges)


def random_point(rng: np.random.Generator, tree: rt.SimplicialTree, ray_reach: float = 3.0) -> rt.TreePoint:
    k = int(rng.integers(len(tree.edges))) if tree.edges else None
    if k is None:
        return rt.TreePoint.at_vertex(0)
    e = tree.edges[k]
    top = ray_reach if e.infinite else e.length
    return tree.point(k, float(rng.uniform(0.0, top)))


def random_subtree(rng: np.random.Generator, tree: rt.SimplicialTree) -> rt.Subtree:
    pts = [random_point(rng, tree) for _ in range(int(rng.integers(1, 4)))]
    sub = rt.hull(tree, [rt.Subtree.from_point(tree, p) for p in pts])
    rays = tree.infinite_edges
    if rays and rng.random() < 0.3:
        k = rays[int(rng.integers(len(rays)))]
        start = tree.point(k, float(rng.uniform(0.0, 2.0)))
        sub = rt.hull(tree, [sub, rt.Subtree(tree, frozenset(), {k: (start.offset if not start.is_vertex else 0.0, math.inf)})])
    return sub


@dataclass
class SymmetricTree:
    """``copies`` identical branches around vertex 0, permuted by the generators."""

    tree: rt.SimplicialTree
    copies: int
    branch_size: int
    center_ray: int | None

    def permutation(self, perm) -> rt.TreeIsometry:
        m = self.branch_size
        vm = [rt.TreePoint.at_vertex(0)]
        for c in range(self.copies):
            for j in range(m):
                vm.append(rt.TreePoint.at_vertex(1 + perm[c] * m + j))
        em = {}
        rays = [k for k in self.tree.infinite_edges if k != self.center_ray]
        per_copy = len(rays) // self.copies if self.copies else 0
        for c in range(self.copies):
            for j in range(per_copy):
                em[rays[c * per_copy + j]] = rays[perm[c] * per_copy + j]
        if self.center_ray is not None:
            em[self.center_ray] = self.center_ray
        return rt.TreeIsometry(self.tree, vm, em)


def symmetric_tree(rng: np.random.Generator, copies: int = 3, branch_size: int = 3, rays_per_copy: int = 0,
                   center_ray: bool = False) -> SymmetricTree:
    branch = [(int(rng.integers(i)), i, float(rng.uniform(0.1, 2.0))) for i in range(1, branch_size)]
    ray_at = [int(rng.integers(branch_size)) for _ in range(rays_per_copy)]
    stem = float(rng.uniform(0.1, 2.0))
    edges = []
    for c in range(copies):
        base = 1 + c * branch_size
        edges.append((0, base, stem))
        edges += [(base + a, base + b, length) for a, b, length in branch]
    for c in range(copies):
        base = 1 + c * branch_size
        edges += [(base + r, None, math.inf) for r in ray_at]
    ray_id = None
    if center_ray:
        ray_id = len(edges)
        edges.append((0, None, math.inf))
    tree = rt.SimplicialTree(1 + copies * branch_size, edges)
    return SymmetricTree(tree, copies, branch_size, ray_id)


def line_action(rng: np.random.Generator, kinds, amounts, breaks=None):
    """Action of a free group on the real line.

    ``kinds[i]`` is ``"shift"`` (x -> x + amounts[i]) or ``"flip"``
    (x -> 2 amounts[i] - x).
    """
    breaks = sorted(set([0.0] + list(breaks if breaks is not None else rng.uniform(-3, 3, size=2))))
    tree, coord = rt.line_tree(breaks)
    gens = {}
    names = [chr(ord("a") + i) for i in range(len(kinds))]
    for name, kind, c in zip(names, kinds, amounts):
        if kind == "shift":
            vm = [coord(x + c) for x in breaks]
            em = {0: 0, 1: 1}
        else:
            vm = [coord(2 * c - x) for x in breaks]
            em = {0: 1, 1: 0}
        gens[name] = rt.TreeIsometry(tree, vm, em)
    return rt.TreeAction(tree, free_group(*names), gens), coord


def random_sl2(rng: np.random.Generator, scale: float = 1.5) -> np.ndarray:
    m = rng.normal(scale=scale, size=(2, 2)) + 1j * rng.normal(scale=scale, size=(2, 2))
    return hyp.normalize_sl2(m)


def orbit(action: rt.TreeAction, p: rt.TreePoint, limit: int = 64) -> list[rt.TreePoint]:
    """Orbit of ``p`` under a finite group action (closure under generators)."""
    tree = action.tree
    pts = [tree.canon(p)]
    frontier = list(pts)
    while frontier and len(pts) < limit:
        nxt = []
        for x in frontier:
            for g in action.isometries():
                y = g(x)
                if all(tree.distance(y, z) > 1e-9 for z in pts):
                    pts.append(y)
                    nxt.append(y)
        frontier = nxt
    return pts


# ---------------------------------------------------------- tree suites


def _path_oracle(tree: rt.SimplicialTree, u: int, v: int) -> float:
    """Depth-first search summing edge lengths; independent of the matrix path."""
    stack = [(u, -1, 0.0)]
    while stack:
        x, parent, acc = stack.pop()
        if x == v:
            return acc
        for k in tree.incident(x):
            e = tree.edges[k]
            if e.infinite:
                continue
            y = e.b if e.a == x else e.a
            if y != parent:
                stack.append((y, x, acc + e.length))
    return math.inf


def check_distance(seed: int, cases: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        tree = random_tree(rng, int(rng.integers(2, 12)))
        u, v = rng.integers(tree.n_vertices, size=2)
        worst = max(worst, abs(tree.distance(rt.TreePoint.at_vertex(u), rt.TreePoint.at_vertex(v)) - _path_oracle(tree, u, v)))
    return CheckResult("distance matches path-sum oracle", worst <= EXACT, f"max error {worst:.2e}", seed)


def check_projection_decreasing(seed: int, cases: int = 1000) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(cases):
        tree = random_tree(rng, int(rng.integers(2, 10)), int(rng.integers(0, 3)))
        sub = random_subtree(rng, tree)
        p, q = random_point(rng, tree), random_point(rng, tree)
        gap = tree.distance(rt.project_to_subtree(tree, p, sub), rt.project_to_subtree(tree, q, sub)) - tree.distance(p, q)
        worst = max(worst, gap)
    return CheckResult("projection is distance decreasing", worst <= EXACT, f"max excess {worst:.2e}", seed)


def check_projection_oracle(seed: int, cases: int = 100, grid: int = 400) -> CheckResult:
    """Nearest point agrees with a dense scan of the subset."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        tree = random_tree(rng, int(rng.integers(2, 8)))
        sub = random_subtree(rng, tree)
        p = random_point(rng, tree)
        best = min(
            tree.distance(p, tree.point(k, s))
            for k, (lo, hi) in sub.intervals.items()
            for s in np.linspace(lo, hi, grid)
        ) if sub.intervals else min(tree.distance(p, rt.TreePoint.at_vertex(v)) for v in sub.vertices)
        got = tree.distance(p, rt.project_to_subtree(tree, p, sub))
        worst = max(worst, got - best)
    return CheckResult("projection matches dense scan", worst <= 1e-6, f"max excess {worst:.2e}", seed)


def check_projection_equivariant(seed: int, cases: int = 1000) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        sym = symmetric_tree(rng, copies=int(rng.integers(2, 5)), branch_size=int(rng.integers(1, 4)),
                             rays_per_copy=int(rng.integers(0, 2)))
        k = sym.copies
        gens = {"a": sym.permutation([(c + 1) % k for c in range(k)]), "b": sym.permutation([1, 0] + list(range(2, k)))}
        action = rt.TreeAction(sym.tree, free_group("a", "b"), gens)
        seed_pt = random_point(rng, sym.tree)
        sub = rt.hull(sym.tree, [rt.Subtree.from_point(sym.tree, x) for x in orbit(action, seed_pt)])
        p = random_point(rng, sym.tree)
        for g in action.isometries():
            a = rt.project_to_subtree(sym.tree, g(p), sub)
            b = g(rt.project_to_subtree(sym.tree, p, sub))
            worst = max(worst, sym.tree.distance(a, b))
    return CheckResult("projection onto an invariant subtree is equivariant", worst <= EXACT, f"max gap {worst:.2e}", seed)


def check_displacement_identity(seed: int, cases: int = 200, fault: float = 0.0) -> CheckResult:
    """d(x, gx) = l(g) + 2 d(x, C_g) on line actions and symmetric trees."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        if i % 2:
            kind = "shift" if rng.random() < 0.5 else "flip"
            action, _ = line_action(rng, [kind], [float(rng.uniform(-3, 3))])
            g = action.isometries()[0]
        else:
            sym = symmetric_tree(rng, copies=3, branch_size=2, rays_per_copy=int(rng.integers(0, 2)))
            g = sym.permutation([1, 2, 0])
            action = None
        tree = g.tree
        ell, c = rt.translation_length(tree, g)
        ell += fault
        for _ in range(5):
            x = random_point(rng, tree)
            worst = max(worst, abs(g.displacement(x) - ell - 2.0 * c.distance_to(x)))
    return CheckResult("displacement equals length plus twice distance to the characteristic set",
                       worst <= 1e-12 * 10, f"max error {worst:.2e}", seed)


def check_serre(seed: int, cases: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        m1, m2 = rng.uniform(-3, 3, size=2)
        action, _ = line_action(rng, ["flip", "flip"], [m1, m2])
        g, h = action.isometries()
        fg, fh = rt.fixed_set(action, g), rt.fixed_set(action, h)
        ell = rt.translation_length(action.tree, g @ h)[0]
        worst = max(worst, abs(ell - 2.0 * rt.subtree_distance(action.tree, fg, fh)))
    return CheckResult("product of two elliptics with disjoint fixed sets", worst <= 1e-11, f"max error {worst:.2e}", seed)


def check_minimal_subtree(seed: int, cases: int = 50) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(cases):
        kinds = [("shift", "flip")[int(rng.integers(2))] for _ in range(2)]
        kinds[0] = "shift"
        action, _ = line_action(rng, kinds, rng.uniform(0.5, 3, size=2))
        sub = rt.minimal_subtree(action, max_len=2)
        if not all(g.image_of(sub).same_as(sub) for g in action.isometries()) or not rt.is_invariant(action, sub):
            bad += 1
    return CheckResult("generators map the minimal subtree onto itself", bad == 0, f"{bad} non-invariant", seed)


def shift_cases(seed: int, per_case: int = 50):
    """Instances ``(tree, end, x, y, eps, case)`` covering each shift situation."""
    rng = np.random.default_rng(seed)
    wanted = {"subray": per_case, "both-far": per_case, "both-near": per_case, "straddle": per_case}
    out = []
    tries = 0
    while any(wanted.values()) and tries < 100 * per_case:
        tries += 1
        tree = random_tree(rng, int(rng.integers(2, 9)), 1)
        end = tree.infinite_edges[0]
        x, y = random_point(rng, tree), random_point(rng, tree)
        if rng.random() < 0.25:
            y = tree.ray_point(x, end, float(rng.uniform(0.1, 3.0)))
        p = rt.merge_point(tree, x, y, end)
        dx, dy = tree.distance(x, p), tree.distance(y, p)
        if min(dx, dy) <= 1e-9:
            case = "subray"
            eps = float(rng.uniform(0.05, 3.0))
        else:
            lo, hi = sorted((dx, dy))
            case = ("both-far", "both-near", "straddle")[int(rng.integers(3))]
            if case == "both-far":
                eps = float(rng.uniform(0.0, lo)) or lo / 2
            elif case == "both-near":
                eps = float(rng.uniform(hi, hi + 2.0))
            else:
                if hi - lo < 1e-6:
                    continue
                eps = float(rng.uniform(lo, hi))
        if wanted[case] and eps > 0:
            wanted[case] -= 1
            out.append((tree, end, x, y, eps, case))
    return out


def shift_formula(dx: float, dy: float, dxy: float, eps: float, case: str) -> float:
    if case == "subray":
        return dxy
    if case == "both-far":
        return dx + dy - 2.0 * eps
    if case == "both-near":
        return abs(dx - dy)
    return max(dx, dy) - min(dx, dy)


def check_shift_decreasing(seed: int, per_case: int = 50) -> CheckResult:
    worst_formula, worst_excess = 0.0, -math.inf
    counts: dict[str, int] = {}
    for tree, end, x, y, eps, case in shift_cases(seed, per_case):
        p = rt.merge_point(tree, x, y, end)
        dx, dy, dxy = tree.distance(x, p), tree.distance(y, p), tree.distance(x, y)
        got = tree.distance(rt.shift_toward_end(tree, x, end, eps), rt.shift_toward_end(tree, y, end, eps))
        worst_formula = max(worst_formula, abs(got - shift_formula(dx, dy, dxy, eps, case)))
        worst_excess = max(worst_excess, got - dxy)
        counts[case] = counts.get(case, 0) + 1
    ok = worst_formula <= 1e-11 and worst_excess <= 1e-11 and len(counts) == 4
    return CheckResult("shift toward an end is distance decreasing", ok,
                       f"cases {counts}, formula error {worst_formula:.2e}, excess {worst_excess:.2e}", seed)


def check_shift_equivariant(seed: int, cases: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        if i % 2:
            action, _ = line_action(rng, ["shift", "shift"], rng.uniform(-3, 3, size=2))
            end = 1
        else:
            sym = symmetric_tree(rng, copies=3, branch_size=2, center_ray=True)
            action = rt.TreeAction(sym.tree, free_group("a"), {"a": sym.permutation([1, 2, 0])})
            end = sym.center_ray
        if end not in rt.fixed_ends(action):
            return CheckResult("shift is equivariant", False, "generated end is not fixed", seed)
        tree = action.tree
        eps = float(rng.uniform(0.05, 2.0))
        p = random_point(rng, tree)
        for g in action.isometries():
            worst = max(worst, tree.distance(rt.shift_toward_end(tree, g(p), end, eps),
                                             g(rt.shift_toward_end(tree, p, end, eps))))
    return CheckResult("shift toward a fixed end is equivariant", worst <= 1e-11, f"max gap {worst:.2e}", seed)


def generated_actions(seed: int, count: int = 200):
    """Mixture of line actions and finite symmetric actions, some with fixed points."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        kind = i % 4
        if kind == 0:
            sym = symmetric_tree(rng, copies=int(rng.integers(2, 4)), branch_size=2, rays_per_copy=int(rng.integers(0, 2)))
            k = sym.copies
            gens = {"a": sym.permutation([(c + 1) % k for c in range(k)]), "b": sym.permutation([1, 0] + list(range(2, k)))}
            yield rt.TreeAction(sym.tree, free_group("a", "b"), gens)
        elif kind == 1:
            m = float(rng.uniform(-2, 2))
            same = rng.random() < 0.5
            yield line_action(rng, ["flip", "flip"], [m, m if same else m + float(rng.uniform(0.2, 2))])[0]
        elif kind == 2:
            c = 0.0 if rng.random() < 0.5 else float(rng.uniform(0.2, 2))
            yield line_action(rng, ["flip", "shift"], [float(rng.uniform(-2, 2)), c])[0]
        else:
            yield line_action(rng, ["shift", "shift"], [float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2))])[0]


def check_fixed_point_criterion(seed: int, count: int = 200, max_len: int = 4) -> CheckResult:
    bad = 0
    words = reduced_words(free_group("a", "b"), max_len)
    for action in generated_actions(seed, count):
        zero = bool(np.all(rt.length_function(action, words) <= 1e-9))
        fixed = rt.global_fixed_point(action) is not None
        if zero != fixed:
            bad += 1
    return CheckResult("lengths vanish exactly when a global fixed point exists", bad == 0, f"{bad} mismatches of {count}", seed)


def check_tree_json(seed: int, cases: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(cases):
        action, _ = line_action(rng, ["shift", "flip"], rng.uniform(-3, 3, size=2))
        text = action.to_json()
        if rt.TreeAction.from_json(text).to_json() != text:
            bad += 1
    return CheckResult("tree JSON round trip is exact", bad == 0, f"{bad} mismatches", seed)


def check_reconstruction(seed: int, cases: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        tree = random_tree(rng, int(rng.integers(3, 16)))
        leaves = tree.leaves()[:12]
        d = tree._dist[np.ix_(leaves, leaves)]
        fitted = dg.tree_from_metric(d, 1e-9)
        worst = max(worst, float(np.max(np.abs(fitted.sample_distances() - d))))
    return CheckResult("tree fitted to a tree metric reproduces it", worst <= 1e-9, f"max error {worst:.2e}", seed)


# --------------------------------------------------- hyperbolic suites


def check_trace_length(seed: int, cases: int = 1000) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    done = 0
    while done < cases:
        m = sl2_with_trace(rng, float(np.exp(rng.uniform(0.0, 5.0))))
        worst = max(worst, abs(hyp.translation_length(m) - 2.0 * math.log(np.trace(m).real)) - 2.0)
        done += 1
    return CheckResult("translation length within 2 of twice log trace", worst <= 1e-9, f"max excess {worst:.2e}", seed)


def sl2_with_trace(rng: np.random.Generator, trace: float) -> np.ndarray:
    """Random complex matrix of determinant 1 and the given trace."""
    d = complex(*rng.normal(size=2))
    b = complex(*rng.normal(size=2))
    c = ((trace - d) * d - 1.0) / b
    return np.array([[trace - d, b], [c, d]])


def _conjugate_randomly(rng, m):
    b = random_sl2(rng, 1.0)
    return hyp.normalize_sl2(b @ m @ hyp.sl2_inverse(b))


def check_metric_axioms(seed: int, cases: int = 300) -> CheckResult:
    rng = np.random.default_rng(seed)
    pts = hyp._random_points(rng, 3 * cases, 8.0).reshape(cases, 3, 4)
    d = lambda a, b: hyp.distance(a, b)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    sym = np.max(np.abs(d(x, y) - d(y, x)))
    tri = np.max(d(x, z) - d(x, y) - d(y, z))
    ok = sym <= 1e-12 and tri <= 1e-9
    return CheckResult("distance is symmetric and satisfies the triangle inequality", ok, f"asym {sym:.1e}, triangle {tri:.1e}", seed)


def check_exp_log(seed: int, cases: int = 300) -> CheckResult:
    rng = np.random.default_rng(seed)
    pts = hyp._random_points(rng, 2 * cases, 3.0).reshape(cases, 2, 4)
    p, q = pts[:, 0], pts[:, 1]
    back = hyp.exp_map(p, hyp.log_map(p, q), check=False)
    err = float(np.max(hyp.distance(back, q) / np.maximum(1.0, hyp.distance(p, q))))
    return CheckResult("exponential map inverts the logarithm", err <= 1e-8, f"max relative error {err:.2e}", seed)


def check_lorentz(seed: int, cases: int = 300) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        a = random_sl2(rng, 0.8)
        p, q = hyp._random_points(rng, 2, 4.0)
        worst = max(worst, abs(hyp.distance(hyp.act(a, p), hyp.act(a, q)) - hyp.distance(p, q)))
    return CheckResult("SL2 action preserves distance", worst <= 1e-8, f"max error {worst:.2e}", seed)


def check_thin_constant(seed: int) -> CheckResult:
    c = hyp.estimate_thin_constant(samples=10_000, seed=seed).delta_thin
    ok = 0.4 <= c <= math.log(math.sqrt(3.0)) + 1e-6
    return CheckResult("thin-triangle constant estimate", ok, f"{c:.4f} (ideal triangles give {math.log(math.sqrt(3)):.4f})", seed)


# ------------------------------------------------------- length suites


def check_gradient(seed: int, cases: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    pres = free_group("a", "b")
    graph = hm.TwistedGraph(2, (hm.Edge(0, 0, 1.0, Word.gen(0)), hm.Edge(0, 1, 0.7, Word.gen(1)), hm.Edge(1, 1, 1.3, Word.gen(0, -1) * Word.gen(1))))
    worst = 0.0
    for _ in range(cases):
        rep = Representation(pres, (random_sl2(rng, 0.6), random_sl2(rng, 0.6)))
        worst = max(worst, gradient_error(rng, graph, rep))
    return CheckResult("energy gradient matches finite differences", worst < 1e-5, f"max relative error {worst:.2e}", seed)


def gradient_error(rng, graph, rep, h: float = 1e-5) -> float:
    u = hyp._random_points(rng, graph.n_vertices, 1.5)
    grad = hm.energy_gradient(graph, rep, u)
    errs = []
    for v in range(graph.n_vertices):
        for b in hyp.tangent_basis(u[v]):
            def moved(s):
                w = u.copy()
                w[v] = hyp.exp_map(u[v], s * b, check=False)
                return hm.energy(graph, rep, w)

            fd = (moved(h) - moved(-h)) / (2 * h)
            an = float(hyp.minkowski_dot(grad[v], b))
            errs.append((fd, an))
    fd, an = np.array(errs).T
    return float(np.max(np.abs(fd - an)) / max(1.0, np.max(np.abs(an))))


def check_projective(seed: int) -> CheckResult:
    a = dg.projective_compare([1, 2, 3], [7, 14, 21])
    b = dg.projective_compare([1, 1, 2], [1, 1, 1.9])
    ok = a <= 1e-15 and abs(b - (1 / 1.9 - 0.5)) <= 1e-12
    return CheckResult("projective comparison", ok, f"{a:.2e}, {b:.5f}", seed)


def check_tree_lengths(seed: int, cases: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    words = reduced_words(free_group("a", "b"), 3)
    worst = 0.0
    for _ in range(cases):
        c = rng.uniform(-2, 2, size=2)
        action, _ = line_action(rng, ["shift", "shift"], c)
        got = rt.length_function(action, words)
        want = np.array([abs(sum(c[g] * e for g, e in w)) for w in words])
        worst = max(worst, float(np.max(np.abs(got - want))))
    return CheckResult("line translations have abelian lengths", worst <= 1e-11, f"max error {worst:.2e}", seed)


def check_tree_metric_delta(seed: int, cases: int = 50) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        tree = random_tree(rng, int(rng.integers(4, 12)))
        worst = max(worst, dg.gromov_delta(tree._dist))
    return CheckResult("tree metrics have zero four-point constant", worst <= 1e-12, f"max {worst:.2e}", seed)


SUITES: dict[str, list[Callable[..., CheckResult]]] = {
    "tree-ops": [
        check_distance,
        check_projection_decreasing,
        check_projection_oracle,
        check_projection_equivariant,
        check_displacement_identity,
        check_serre,
        check_minimal_subtree,
        check_shift_decreasing,
        check_shift_equivariant,
        check_fixed_point_criterion,
        check_tree_json,
    ],
    "hyperbolic": [check_trace_length, check_metric_axioms, check_exp_log, check_lorentz, check_thin_constant],
    "lengths": [check_gradient, check_projective, check_tree_lengths, check_tree_metric_delta, check_reconstruction],
}


def run_suite(name: str, seed: int = 0, inject_fault: bool = False) -> list[CheckResult]:
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(name)
    out = []
    for n in names:
        for check in SUITES[n]:
            t0 = time.perf_counter()
            if inject_fault and check is check_displacement_identity:
                res = check(seed, fault=1e-3)
            else:
                res = check(seed)
            res.detail += f" [{time.perf_counter() - t0:.2f}s]"
            out.append(res)
    return out
