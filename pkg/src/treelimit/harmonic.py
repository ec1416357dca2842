"""Equivariant discrete harmonic maps from twisted graphs into H^3.

A twisted graph edge ``(tail, head, w, h)`` joins the lift of ``tail`` to the
``h``-translate of the lift of ``head`` in the cover, so a vertex map ``u``
has energy

    E(u) = sum_e w_e * d(u[tail], rho(h_e) u[head])**2 .
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hyperbolic as hyp
from .group_rep import Representation, Word, evaluate


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    weight: float
    holonomy: Word


@dataclass(frozen=True)
class TwistedGraph:
    n_vertices: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple(Edge(int(e.tail), int(e.head), float(e.weight), e.holonomy) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n_vertices < 1:
            raise ValueError("graph needs a vertex")
        for e in edges:
            if not (0 <= e.tail < self.n_vertices and 0 <= e.head < self.n_vertices):
                raise ValueError(f"edge {e} references a missing vertex")
            if not e.weight > 0:
                raise ValueError("edge weights must be positive")
        # undirected connectivity
        parent = list(range(self.n_vertices))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for e in edges:
            parent[find(e.tail)] = find(e.head)
        if len({find(i) for i in range(self.n_vertices)}) != 1:
            raise ValueError("twisted graph must be connected")


def rose(rank: int, weights: Sequence[float] | None = None) -> TwistedGraph:
    """One vertex with a loop per generator."""
    weights = [1.0] * rank if weights is None else list(weights)
    return TwistedGraph(1, tuple(Edge(0, 0, weights[i], Word.gen(i)) for i in range(rank)))


def initial_map(g: TwistedGraph) -> np.ndarray:
    return np.tile(hyp.ORIGIN, (g.n_vertices, 1))


def _edge_lorentz(g: TwistedGraph, rep: Representation):
    return [hyp.to_lorentz(evaluate(rep, e.holonomy)) for e in g.edges]


def _edge_lengths(g, u, mats):
    return np.array([hyp.distance(u[e.tail], hyp.project_to_hyperboloid(m @ u[e.head])) for e, m in zip(g.edges, mats)])


def energy(g: TwistedGraph, rep: Representation, u, _mats=None) -> float:
    u = np.asarray(u, dtype=float)
    mats = _edge_lorentz(g, rep) if _mats is None else _mats
    d = _edge_lengths(g, u, mats)
    return float(sum(e.weight * x * x for e, x in zip(g.edges, d)))


def energy_gradient(g: TwistedGraph, rep: Representation, u, _mats=None) -> np.ndarray:
    """Riemannian gradient, one tangent vector per vertex.

    grad_v = -2 sum w_e log_{u_v}(other endpoint transported into v's frame);
    the tail slot sees rho(h) u[head], the head slot sees rho(h)^-1 u[tail].
    A loop contributes through both slots.
    """
    u = np.asarray(u, dtype=float)
    mats = _edge_lorentz(g, rep) if _mats is None else _mats
    grad = np.zeros_like(u)
    for e, m in zip(g.edges, mats):
        minv = hyp.ETA @ m.T @ hyp.ETA
        to_tail = hyp.project_to_hyperboloid(m @ u[e.head])
        to_head = hyp.project_to_hyperboloid(minv @ u[e.tail])
        grad[e.tail] -= 2.0 * e.weight * hyp.log_map(u[e.tail], to_tail)
        grad[e.head] -= 2.0 * e.weight * hyp.log_map(u[e.head], to_head)
    return grad


def _grad_norm(u, grad) -> float:
    return float(np.sqrt(np.sum(np.maximum(hyp.minkowski_dot(grad, grad), 0.0))))


def karcher_mean(points, weights, x0=None, iters: int = 20) -> np.ndarray:
    """Weighted Frechet mean by ``iters`` Riemannian gradient steps."""
    points = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    x = points[np.argmax(w)] if x0 is None else np.asarray(x0, dtype=float)
    for _ in range(iters):
        step = np.sum(w[:, None] * hyp.log_map(np.broadcast_to(x, points.shape), points), axis=0)
        x = hyp.exp_map(x, step, check=False)
    return x


def _karcher_sweep(g, u, mats):
    """Jacobi sweep: each vertex moves to the mean of its transported neighbours."""
    nbrs: list[list] = [[] for _ in range(g.n_vertices)]
    for e, m in zip(g.edges, mats):
        minv = hyp.ETA @ m.T @ hyp.ETA
        nbrs[e.tail].append((hyp.project_to_hyperboloid(m @ u[e.head]), e.weight))
        nbrs[e.head].append((hyp.project_to_hyperboloid(minv @ u[e.tail]), e.weight))
    new = u.copy()
    for v, items in enumerate(nbrs):
        if items:
            pts = np.array([p for p, _ in items])
            ws = np.array([w for _, w in items])
            new[v] = karcher_mean(pts, ws, x0=u[v])
    return new


@dataclass
class SolveReport:
    energy: float
    gradient_norm: float
    iterations: int
    status: str  # "converged" | "max-iterations" | "escaped"
    history: list[float] = field(default_factory=list, repr=False)


def escape_radius(g: TwistedGraph, rep: Representation, init) -> float:
    init = np.asarray(init, dtype=float)
    diam = max(
        (hyp.distance(init[i], init[j]) for i in range(len(init)) for j in range(i + 1, len(init))),
        default=0.0,
    )
    lmax = max((hyp.translation_length(m) for m in rep.images), default=0.0)
    return 10.0 * (1.0 + diam + lmax)


def minimize(
    g: TwistedGraph,
    rep: Representation,
    init=None,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    radius: float | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Armijo gradient descent on the hyperboloid with a Karcher-sweep fallback.

    The trial step starts at 1.0 and doubles after every accepted step, so
    descent can follow unattained infima off to infinity.  A vertex farther
    than ``radius`` from its start, with gradient norm below ``10 * tol``,
    means the infimum is not attained ("escaped").
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = initial_map(g) if init is None else hyp.check_point(np.array(init, dtype=float))
    u = hyp.project_to_hyperboloid(u)
    start = u.copy()
    radius = escape_radius(g, rep, start) if radius is None else radius
    mats = _edge_lorentz(g, rep)
    e_cur = energy(g, rep, u, mats)
    history = [e_cur]
    step = 1.0
    status = "max-iterations"
    gnorm = np.inf
    it = 0
    for it in range(max_iter + 1):
        grad = energy_gradient(g, rep, u, mats)
        gnorm = _grad_norm(u, grad)
        far = float(np.max(hyp.distance(u, start))) > radius
        if far and gnorm <= 10.0 * tol:
            status = "escaped"
            break
        if gnorm <= tol:
            status = "converged"
            break
        if it == max_iter:
            break
        # Armijo backtracking; once the required decrease is below the
        # energy's rounding level, ask for a smaller gradient instead
        alpha = step
        accepted = False
        resolution = 64.0 * np.finfo(float).eps * max(abs(e_cur), 1.0)
        while alpha > 1e-20:
            trial = hyp.exp_map(u, -alpha * grad, check=False)
            e_new = energy(g, rep, trial, mats)
            wanted = 1e-4 * alpha * gnorm**2
            if wanted > resolution:
                if e_new <= e_cur - wanted:
                    accepted = True
                    break
            elif e_new <= e_cur + resolution:
                if _grad_norm(trial, energy_gradient(g, rep, trial, mats)) <= (1.0 - 1e-4) * gnorm:
                    accepted = True
                    break
            alpha *= 0.5
        if accepted:
            u, e_cur = trial, e_new
            step = min(2.0 * alpha, 1e12)
        else:
            trial = _karcher_sweep(g, u, mats)
            e_new = energy(g, rep, trial, mats)
            if e_new < e_cur:
                u, e_cur = trial, e_new
                step = 1.0
            else:
                # no descent possible at floating-point resolution
                break
        history.append(e_cur)
    return u, SolveReport(e_cur, gnorm, it, status, history)


def pullback_metric(
    g: TwistedGraph,
    rep: Representation,
    u,
    samples: Sequence[tuple[int, Word]],
) -> np.ndarray:
    """Distances between orbit points ``rho(w) u(v)`` for samples ``(v, w)``.

    Entry (i, j) is computed as ``d(u(v_i), rho(w_i^-1 w_j) u(v_j))`` so both
    points stay near the fundamental domain.
    """
    u = np.asarray(u, dtype=float)
    n = len(samples)
    out = np.zeros((n, n))
    cache: dict[Word, np.ndarray] = {}

    def lor(w):
        if w not in cache:
            cache[w] = hyp.to_lorentz(evaluate(rep, w))
        return cache[w]

    for i in range(n):
        vi, wi = samples[i]
        wi_inv = wi.inverse()
        for j in range(i + 1, n):
            vj, wj = samples[j]
            q = hyp.project_to_hyperboloid(lor(wi_inv * wj) @ u[vj])
            out[i, j] = out[j, i] = hyp.distance(u[vi], q)
    return out


def displacement_lower_bound(g: TwistedGraph, rep: Representation) -> float:
    """Sum over loops of w * l(rho(h))**2, a lower bound for every map's energy."""
    return float(
        sum(e.weight * hyp.translation_length(evaluate(rep, e.holonomy)) ** 2 for e in g.edges if e.tail == e.head)
    )


def lipschitz_ratio(g: TwistedGraph, rep: Representation, u) -> float:
    """max_e (edge length**2 / w_e) / E(u): how concentrated the energy is."""
    mats = _edge_lorentz(g, rep)
    d = _edge_lengths(g, np.asarray(u, dtype=float), mats)
    e = float(sum(ed.weight * x * x for ed, x in zip(g.edges, d)))
    if e == 0:
        return 0.0
    return float(max(x * x / ed.weight for ed, x in zip(g.edges, d)) / e)
