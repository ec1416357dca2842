"""Degenerating families: rescaled pull-back metrics, their thinness, and limit trees.

For each parameter value the harmonic map is recomputed (warm-started), the
orbit metric on a finite sample is divided by the square root of the
energy, and the four-point constant of the result is measured.  Once the
rescaled metric is thin enough relative to its diameter a finite metric
tree is fitted to it and the group acts on the fitted tree by relabelling
samples.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import harmonic as hm
from . import hyperbolic as hyp
from .group_rep import Presentation, RepresentationFamily, Word, evaluate, family_at, reduced_words
from .rtree import SimplicialTree, TreePoint

EXHAUSTIVE_LIMIT = 1_000_000
TREE_THRESHOLD = 0.05
SNAP_FACTOR = 2.0


class DegenerationError(ValueError):
    pass


class InvalidEnergyError(DegenerationError):
    pass


class NotTreeLikeError(DegenerationError):
    """Carries the worst quadruple of sample indices, and the partial run if any."""

    def __init__(self, message: str, quadruple=None, run=None):
        super().__init__(message)
        self.quadruple = quadruple
        self.run = run


class NonIsometricActionError(DegenerationError):
    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


class DegenerateLengthError(DegenerationError):
    pass


def worker_count() -> int:
    """Thread cap from ``TREELIMIT_THREADS`` (default: CPU count, at most 8)."""
    raw = os.environ.get("TREELIMIT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


# ------------------------------------------------------------------ metrics


@dataclass(frozen=True)
class RescaledMetric:
    labels: tuple
    distances: np.ndarray = field(repr=False)
    energy: float

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if len(self.labels) != d.shape[0]:
            raise ValueError("one label per sample required")
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def size(self) -> int:
        return self.distances.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.distances.max()) if self.size else 0.0

    def check(self, tol: float = 1e-9) -> None:
        d = self.distances
        scale = max(1.0, self.diameter)
        if np.any(np.abs(np.diag(d)) > tol * scale) or np.any(np.abs(d - d.T) > tol * scale) or np.any(d < -tol):
            raise ValueError("not a symmetric nonnegative matrix with zero diagonal")
        viol = d[:, None, :] - d[:, :, None] - d[None, :, :]  # d(i,k) - d(i,j) - d(j,k)
        if self.size and viol.max() > tol * scale:
            raise ValueError("triangle inequality fails")


def rescale(m, energy: float, labels: Sequence | None = None) -> RescaledMetric:
    """Divide a pull-back distance matrix by ``sqrt(energy)``."""
    if not energy > 0:
        raise InvalidEnergyError(f"energy must be positive, got {energy}")
    m = np.asarray(m, dtype=float)
    labels = tuple(range(m.shape[0])) if labels is None else tuple(labels)
    return RescaledMetric(labels, m / math.sqrt(energy), float(energy))


def _matrix(m) -> np.ndarray:
    return m.distances if isinstance(m, RescaledMetric) else np.asarray(m, dtype=float)


def _quad_deltas(d: np.ndarray, q: np.ndarray) -> np.ndarray:
    w, x, y, z = q.T
    s = np.stack([d[w, x] + d[y, z], d[w, y] + d[x, z], d[w, z] + d[x, y]])
    s.sort(axis=0)
    return (s[2] - s[1]) / 2.0


def _chunks(n: int, seed: int, chunk: int = 200_000):
    total = math.comb(n, 4)
    if total <= EXHAUSTIVE_LIMIT:
        combos = np.fromiter(itertools.combinations(range(n), 4), dtype=np.dtype((np.intp, 4)), count=total)
        for i in range(0, total, chunk):
            yield combos[i : i + chunk]
        return
    rng = np.random.default_rng(seed)
    left = EXHAUSTIVE_LIMIT
    while left > 0:
        q = rng.integers(0, n, size=(min(chunk, left), 4))
        s = np.sort(q, axis=1)
        q = q[np.all(s[:, 1:] != s[:, :-1], axis=1)]
        left -= len(q)
        yield q


def four_point(m, seed: int = 0) -> tuple[float, tuple[int, int, int, int] | None]:
    """Four-point constant and a quadruple attaining it.

    Exhaustive while the number of quadruples is at most a million,
    otherwise a seeded random sample of a million quadruples.
    """
    d = _matrix(m)
    n = d.shape[0]
    if n < 4:
        return 0.0, None

    def scan(q):
        vals = _quad_deltas(d, q)
        k = int(np.argmax(vals))
        return float(vals[k]), tuple(int(i) for i in q[k])

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(scan, _chunks(n, seed)))
    best = max(results, key=lambda r: r[0])
    return best


def gromov_delta(m, seed: int = 0) -> float:
    return four_point(m, seed)[0]


# --------------------------------------------------------- tree fitting


@dataclass
class FittedTree:
    """A fitted tree plus the vertex carrying each sample."""

    tree: SimplicialTree
    sample_vertex: list[int]
    error: float

    def point(self, i: int) -> TreePoint:
        return TreePoint.at_vertex(self.sample_vertex[i])

    def sample_distances(self) -> np.ndarray:
        idx = np.array(self.sample_vertex)
        return self.tree._dist[np.ix_(idx, idx)]


class _Builder:
    def __init__(self, snap: float):
        self.adj: list[dict[int, float]] = []
        self.snap = snap

    def node(self) -> int:
        self.adj.append({})
        return len(self.adj) - 1

    def link(self, a: int, b: int, length: float):
        self.adj[a][b] = length
        self.adj[b][a] = length

    def path(self, a: int, b: int) -> list[int]:
        prev = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y in self.adj[x]:
                if y not in prev:
                    prev[y] = x
                    stack.append(y)
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out[::-1]

    def locate(self, a: int, b: int, s: float) -> int:
        """Node at distance ``s`` from ``a`` toward ``b``, splitting an edge if needed."""
        path = self.path(a, b)
        if s <= self.snap:
            return a
        walked = 0.0
        for x, y in zip(path, path[1:]):
            length = self.adj[x][y]
            if s <= walked + length + self.snap:
                if s >= walked + length - self.snap:
                    return y
                cut = s - walked
                if cut <= self.snap:
                    return x
                mid = self.node()
                del self.adj[x][y], self.adj[y][x]
                self.link(x, mid, cut)
                self.link(mid, y, length - cut)
                return mid
            walked += length
        return path[-1]


def tree_from_metric(m, tol: float, seed: int = 0) -> FittedTree:
    """Fit a finite metric tree by inserting samples one at a time.

    Each new point ``z`` hangs off the arc between the already placed pair
    ``(x, y)`` minimizing the Gromov product ``(x|y)_z``, at distance
    ``(y|z)_x`` from ``x`` and with pendant length ``(x|y)_z``.  On an exact
    tree metric this reproduces every distance.  The first two points are a
    diameter pair.
    """
    d = _matrix(m)
    n = d.shape[0]
    if n == 0:
        raise ValueError("empty metric")
    diam = float(d.max())
    delta, quad = four_point(d, seed)
    if delta > tol * diam + 1e-12 * max(1.0, diam):
        raise NotTreeLikeError(
            f"four-point constant {delta:.6g} exceeds {tol:g} x diameter {diam:.6g} at samples {quad}", quad
        )
    snap = max(SNAP_FACTOR * delta, 1e-12 * max(1.0, diam))
    b = _Builder(snap)
    where = [-1] * n
    if n == 1 or diam <= snap:
        root = b.node()
        where = [root] * n
        return _finish(b, where, d)
    x0, y0 = np.unravel_index(np.argmax(d), d.shape)
    x0, y0 = int(x0), int(y0)
    where[x0] = b.node()
    where[y0] = b.node()
    b.link(where[x0], where[y0], float(d[x0, y0]))
    placed = [x0, y0]
    order = sorted(set(range(n)) - {x0, y0}, key=lambda z: (-max(d[z, x0], d[z, y0]), z))
    for z in order:
        pa = np.array(placed)
        gp = 0.5 * (d[z, pa][:, None] + d[z, pa][None, :] - d[np.ix_(pa, pa)])
        np.fill_diagonal(gp, np.inf)
        if len(placed) == 1:
            i = j = 0
        else:
            i, j = np.unravel_index(np.argmin(gp), gp.shape)
        x, y = placed[int(i)], placed[int(j)]
        h = max(0.0, float(gp[i, j])) if x != y else float(d[z, x])
        along = min(max(float(d[z, x]) - h, 0.0), float(d[x, y]))
        anchor = b.locate(where[x], where[y], along)
        if h <= snap:
            where[z] = anchor
        else:
            leaf = b.node()
            b.link(anchor, leaf, h)
            where[z] = leaf
        placed.append(z)
    return _finish(b, where, d)


def _finish(b: _Builder, where: list[int], d: np.ndarray) -> FittedTree:
    # drop degree-2 Steiner nodes that carry no sample
    carriers = set(where)
    for v in range(len(b.adj)):
        if v not in carriers and len(b.adj[v]) == 2:
            (x, lx), (y, ly) = b.adj[v].items()
            del b.adj[x][v], b.adj[y][v]
            b.adj[v] = {}
            b.link(x, y, lx + ly)
    alive = [v for v in range(len(b.adj)) if b.adj[v] or v in carriers]
    index = {v: i for i, v in enumerate(alive)}
    edges = []
    for v in alive:
        for y, length in b.adj[v].items():
            if v < y:
                edges.append((index[v], index[y], length))
    tree = SimplicialTree(len(alive), edges)
    fitted = FittedTree(tree, [index[v] for v in where], 0.0)
    fitted.error = float(np.max(np.abs(fitted.sample_distances() - d))) if d.size else 0.0
    return fitted


# ------------------------------------------------------------- actions


@dataclass
class SampledAction:
    """Generators acting on fitted-tree sample points by relabelling.

    ``maps[name][i] = j`` when generator ``name`` sends sample ``i`` to
    sample ``j``; samples whose image falls outside the word ball are
    left out of that generator's domain.
    """

    fitted: FittedTree
    labels: tuple
    presentation: Presentation
    maps: dict[str, dict[int, int]]
    distortion: float

    def word_map(self, w: Word) -> dict[int, int]:
        index = {lab: i for i, lab in enumerate(self.labels)}
        out = {}
        for i, (v, x) in enumerate(self.labels):
            j = index.get((v, w * x))
            if j is not None:
                out[i] = j
        return out

    def translation_length(self, w: Word) -> float:
        """Least tree displacement over samples whose image is sampled; NaN if none."""
        pairs = self.word_map(w)
        if not pairs:
            return math.nan
        dist = self.fitted.sample_distances()
        return float(min(dist[i, j] for i, j in pairs.items()))

    def length_function(self, words: Sequence[Word]) -> np.ndarray:
        return np.array([self.translation_length(w) for w in words])


def induced_action(
    fitted: FittedTree,
    labels: Sequence[tuple[int, Word]],
    presentation: Presentation,
    tol: float | None = None,
) -> SampledAction:
    """Let each generator act on the fitted tree through the sample labels.

    The default tolerance is twice the fitting error plus a relative
    rounding allowance, since the fitted distances themselves are only
    that accurate.
    """
    labels = tuple(labels)
    if len(labels) != len(fitted.sample_vertex):
        raise ValueError("one label per fitted sample required")
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise ValueError("duplicate sample labels")
    dist = fitted.sample_distances()
    diam = float(dist.max()) if dist.size else 0.0
    tol = 2.0 * fitted.error + 1e-9 * max(1.0, diam) if tol is None else tol
    maps: dict[str, dict[int, int]] = {}
    worst = (0.0, None)
    for gi, name in enumerate(presentation.generators):
        g = Word.gen(gi)
        mp = {}
        for i, (v, w) in enumerate(labels):
            j = index.get((v, g * w))
            if j is not None:
                mp[i] = j
        maps[name] = mp
        if mp:
            src = np.fromiter(mp.keys(), dtype=int)
            dst = np.fromiter(mp.values(), dtype=int)
            gap = np.abs(dist[np.ix_(dst, dst)] - dist[np.ix_(src, src)])
            k = np.unravel_index(np.argmax(gap), gap.shape)
            if gap[k] > worst[0]:
                worst = (float(gap[k]), (name, labels[src[k[0]]], labels[src[k[1]]]))
    if worst[0] > tol:
        raise NonIsometricActionError(
            f"generator moves a sample pair by {worst[0]:.3g} (tolerance {tol:.3g}): {worst[1]}", worst[1]
        )
    return SampledAction(fitted, labels, presentation, maps, worst[0])


def projective_compare(l1, l2) -> float:
    """Max-norm gap between two length vectors each scaled to unit maximum."""
    a = np.asarray(l1, dtype=float)
    b = np.asarray(l2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("length vectors must match")
    ma, mb = np.max(np.abs(a)), np.max(np.abs(b))
    if ma == 0 or mb == 0:
        raise DegenerateLengthError("length vector is identically zero")
    return float(np.max(np.abs(a / ma - b / mb)))


def abelian_fit(words: Sequence[Word], lengths, rank: int, tol: float = 0.05) -> np.ndarray | None:
    """A homomorphism ``h`` with ``l(w) = |h(w)|`` within ``tol * max l``, if one exists.

    Generator values are read off the single-letter words, so every
    generator must appear in ``words``; otherwise nothing is decided.
    """
    lengths = np.asarray(lengths, dtype=float)
    scale = float(np.nanmax(np.abs(lengths))) if lengths.size else 0.0
    gen_len = {}
    for w, x in zip(words, lengths):
        if len(w) == 1 and w.letters[0][1] == 1:
            gen_len[w.letters[0][0]] = x
    if len(gen_len) < rank or scale == 0:
        return None
    expo = np.zeros((len(words), rank))
    for r, w in enumerate(words):
        for g, e in w:
            expo[r, g] += e
    base = np.array([gen_len[i] for i in range(rank)])
    for signs in itertools.product((1.0, -1.0), repeat=rank - 1):
        h = base * np.array((1.0,) + signs)
        if np.nanmax(np.abs(np.abs(expo @ h) - lengths)) <= tol * scale:
            return h
    return None


# ---------------------------------------------------------------- runs


@dataclass
class StepRecord:
    t: float
    energy: float
    delta: float
    diameter: float
    status: str
    rho_lengths: np.ndarray
    sample_lengths: np.ndarray
    tree_lengths: np.ndarray | None = None
    quadruple: tuple | None = None
    lipschitz: float = math.nan
    max_trace: float = math.nan
    fitted: FittedTree | None = field(default=None, repr=False)
    action: SampledAction | None = field(default=None, repr=False)

    @property
    def delta_ratio(self) -> float:
        return self.delta / self.diameter if self.diameter > 0 else math.nan


@dataclass
class DegenerationRun:
    family: str
    words: list[Word]
    schedule: list[float]
    records: list[StepRecord]
    labels: tuple
    delta_thin: float
    presentation: Presentation

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def case(self) -> str:
        """``case (1)`` when traces stay bounded along the run, ``case (2)`` otherwise."""
        tr = np.array([r.max_trace for r in self.records])
        if len(tr) < 2 or tr[-1] <= 2.0 * tr[0] + 2.0:
            return "case (1)"
        return "case (2)"

    def final_lengths(self) -> np.ndarray | None:
        for r in reversed(self.records):
            if r.tree_lengths is not None:
                return r.tree_lengths
        return None

    def abelian(self, tol: float = 0.05) -> np.ndarray | None:
        lengths = self.final_lengths()
        if lengths is None:
            return None
        return abelian_fit(self.words, lengths, self.presentation.rank, tol)


def sample_labels(graph: hm.TwistedGraph, presentation: Presentation, max_len: int = 3) -> list[tuple[int, Word]]:
    ball = reduced_words(presentation, max_len)
    return [(v, w) for v in range(graph.n_vertices) for w in ball]


def sample_displacements(metric: np.ndarray, labels, words: Sequence[Word]) -> np.ndarray:
    """For each word g, least ``d(x, g x)`` over samples ``x`` with ``g x`` also sampled."""
    index = {lab: i for i, lab in enumerate(labels)}
    out = []
    for g in words:
        vals = [metric[i, index[(v, g * w)]] for i, (v, w) in enumerate(labels) if (v, g * w) in index]
        out.append(min(vals) if vals else math.nan)
    return np.array(out)


def run_degeneration(
    family: RepresentationFamily,
    graph: hm.TwistedGraph,
    words: Sequence[Word],
    schedule: Sequence[float],
    tol: float = 1e-8,
    max_iter: int = 10_000,
    max_len: int = 3,
    threshold: float = TREE_THRESHOLD,
    seed: int = 0,
    thin_samples: int = 10_000,
) -> DegenerationRun:
    schedule = [float(t) for t in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be nonempty and strictly increasing")
    pres = family.presentation()
    words = list(words)
    labels = tuple(sample_labels(graph, pres, max_len))
    thin = hyp.estimate_thin_constant(samples=thin_samples, seed=seed).delta_thin
    run = DegenerationRun(family.name, words, schedule, [], labels, thin, pres)
    u = None
    for t in schedule:
        rep = family_at(family, t)
        u, report = hm.minimize(graph, rep, init=u, tol=tol, max_iter=max_iter)
        raw = hm.pullback_metric(graph, rep, u, labels)
        rho = np.array([hyp.translation_length(evaluate(rep, w)) for w in words])
        traces = [abs(np.trace(evaluate(rep, w))) for w in reduced_words(pres, 2)]
        rec = StepRecord(
            t=t,
            energy=report.energy,
            delta=math.nan,
            diameter=math.nan,
            status=report.status,
            rho_lengths=rho,
            sample_lengths=sample_displacements(raw, labels, words),
            lipschitz=hm.lipschitz_ratio(graph, rep, u),
            max_trace=float(max(traces)),
        )
        run.records.append(rec)
        if not report.energy > 0:
            continue
        metric = rescale(raw, report.energy, labels)
        rec.delta, rec.quadruple = four_point(metric, seed)
        rec.diameter = metric.diameter
        if rec.delta <= threshold * rec.diameter:
            rec.fitted = tree_from_metric(metric, threshold, seed)
            rec.action = induced_action(rec.fitted, labels, pres)
            rec.tree_lengths = rec.action.length_function(words)
    last = run.records[-1]
    if last.tree_lengths is None:
        quad = None if last.quadruple is None else tuple(labels[i] for i in last.quadruple)
        shown = None if quad is None else ", ".join(f"{v}:{pres.name(w) or 'e'}" for v, w in quad)
        raise NotTreeLikeError(
            f"at t = {last.t:g} the rescaled metric has delta/diameter {last.delta_ratio:.4g} > {threshold:g};"
            f" worst quadruple ({shown})",
            quad,
            run,
        )
    return run
