"""Geometry of hyperbolic 3-space in the hyperboloid model.

Points are Minkowski 4-vectors ``x`` with ``<x, x> = -1`` and ``x[0] > 0``,
where ``<x, y> = -x0*y0 + x1*y1 + x2*y2 + x3*y3``.  Isometries come from
``SL(2, C)`` acting on Hermitian matrices

    X(x) = [[x0 + x3, x1 + i x2],
            [x1 - i x2, x0 - x3]]

by ``X -> A X A^*``.  The upper half-space model is provided only as an
independent cross-check of the distance function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
ORIGIN = np.array([1.0, 0.0, 0.0, 0.0])

POINT_TOL = 1e-10
DET_TOL = 1e-12


class HyperbolicError(ValueError):
    """Raised for inputs that are not points, tangent vectors or SL2 matrices."""


class InvalidPointError(HyperbolicError):
    pass


class TangencyError(HyperbolicError):
    pass


def minkowski_dot(x, y):
    """Minkowski product along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def minkowski_norm(v):
    """Norm of a spacelike (tangent) vector; negative squares clip to 0."""
    return np.sqrt(np.maximum(minkowski_dot(v, v), 0.0))


def project_to_hyperboloid(x):
    """Recompute the time coordinate so that ``x`` lies on the upper sheet."""
    x = np.array(x, dtype=float, copy=True)
    x[..., 0] = np.sqrt(1.0 + np.sum(x[..., 1:] ** 2, axis=-1))
    return x


def check_point(x, tol: float = POINT_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise InvalidPointError(f"expected 4-vectors, got shape {x.shape}")
    # relative check: far-out points carry absolute error ~ eps * x0^2
    scale = np.maximum(1.0, x[..., 0] ** 2)
    err = np.abs(minkowski_dot(x, x) + 1.0) / scale
    if np.any(err > tol) or np.any(x[..., 0] <= 0):
        raise InvalidPointError("point is not on the upper sheet of the hyperboloid")
    return x


def point_from_spatial(v) -> np.ndarray:
    """Hyperboloid point with the given spatial coordinates ``(x1, x2, x3)``."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.sqrt(1.0 + np.sum(v**2, axis=-1, keepdims=True)), v], axis=-1)


def _cosh_dist(p, q):
    return -minkowski_dot(p, q)


def distance(p, q):
    """Hyperbolic distance; broadcasts over leading axes.

    Uses ``2 asinh(|p - q| / 2)`` for nearby points, where ``arccosh`` loses
    half the significant digits.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    c = _cosh_dist(p, q)
    if np.any(c < 1.0 - 1e-9 * np.maximum(1.0, np.abs(p[..., 0] * q[..., 0]))):
        raise InvalidPointError("-<p, q> < 1: inputs are not hyperboloid points")
    diff = p - q
    chord2 = np.maximum(minkowski_dot(diff, diff), 0.0)
    near = 2.0 * np.arcsinh(0.5 * np.sqrt(chord2))
    far = np.arccosh(np.maximum(c, 1.0))
    out = np.where(c < 2.0, near, far)
    return out if out.ndim else float(out)


def log_map(p, q):
    """Tangent vector at ``p`` pointing to ``q`` with length ``distance(p, q)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = np.asarray(distance(p, q))
    c = _cosh_dist(p, q)
    u = q - c[..., None] * p if np.ndim(c) else q - c * p
    # u = q + <p,q> p has Minkowski norm sinh(d)
    n = minkowski_norm(u)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(n > 1e-300, d / np.where(n > 1e-300, n, 1.0), 1.0)
    v = u * (scale[..., None] if np.ndim(scale) else scale)
    # re-project into the tangent space to kill the residual <v, p>
    corr = minkowski_dot(v, p)
    v = v + (corr[..., None] if np.ndim(corr) else corr) * p
    return v


def exp_map(p, v, check: bool = True):
    """Point reached from ``p`` by the geodesic with initial velocity ``v``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if check:
        tang = np.abs(minkowski_dot(p, v))
        if np.any(tang > 1e-9 * np.maximum(1.0, p[..., 0] * np.abs(v).max(axis=-1))):
            raise TangencyError("vector is not tangent to the hyperboloid at p")
    n = minkowski_norm(v)
    n_ = n[..., None] if np.ndim(n) else n
    with np.errstate(invalid="ignore", divide="ignore"):
        sinhc = np.where(n_ > 1e-12, np.sinh(n_) / np.where(n_ > 1e-12, n_, 1.0), 1.0 + n_**2 / 6)
    out = np.cosh(n_) * p + sinhc * v
    return project_to_hyperboloid(out)


def geodesic_point(p, q, s):
    """Point at fraction ``s`` in ``[0, 1]`` along the segment from ``p`` to ``q``.

    Positive combination ``(sinh((1-s)d) p + sinh(sd) q) / sinh d``: unlike
    ``exp_map(p, s * log_map(p, q))`` it does not cancel for far points.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = np.asarray(distance(p, q))
    s = np.asarray(s, dtype=float)
    small = d < 1e-12
    safe = np.where(small, 1.0, d)
    with np.errstate(over="ignore", invalid="ignore"):
        w1 = np.where(small, 1.0 - s, np.sinh((1.0 - s) * safe) / np.sinh(safe))
        w2 = np.where(small, s, np.sinh(s * safe) / np.sinh(safe))
    w1 = w1[..., None] if w1.ndim else w1
    w2 = w2[..., None] if w2.ndim else w2
    return project_to_hyperboloid(w1 * p + w2 * q)


def tangent_basis(p) -> np.ndarray:
    """Minkowski-orthonormal basis (3 x 4) of the tangent space at ``p``."""
    p = np.asarray(p, dtype=float)
    basis = []
    for e in np.eye(4)[1:]:
        v = e + minkowski_dot(e, p) * p
        for b in basis:
            v = v - minkowski_dot(v, b) * b
        basis.append(v / minkowski_norm(v))
    return np.array(basis)


# ---------------------------------------------------------------- SL(2, C)


def as_sl2(m, tol: float = DET_TOL) -> np.ndarray:
    """Validate a 2x2 complex matrix of determinant one (relative tolerance)."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise HyperbolicError(f"expected a 2x2 matrix, got shape {m.shape}")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1.0) > tol * max(1.0, float(np.sum(np.abs(m) ** 2))):
        raise HyperbolicError(f"determinant {det} is not 1")
    return m


def normalize_sl2(m) -> np.ndarray:
    """Rescale a nonsingular 2x2 matrix to determinant one."""
    m = np.asarray(m, dtype=complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0:
        raise HyperbolicError("singular matrix")
    return m / np.sqrt(det)


def sl2_inverse(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def hermitian(x) -> np.ndarray:
    x0, x1, x2, x3 = np.asarray(x, dtype=float)
    return np.array([[x0 + x3, x1 + 1j * x2], [x1 - 1j * x2, x0 - x3]])


def from_hermitian(h) -> np.ndarray:
    h = np.asarray(h)
    return np.array(
        [
            0.5 * (h[0, 0] + h[1, 1]).real,
            h[0, 1].real,
            h[0, 1].imag,
            0.5 * (h[0, 0] - h[1, 1]).real,
        ]
    )


def to_lorentz(a) -> np.ndarray:
    """4x4 Lorentz matrix of ``X -> A X A^*`` in the coordinates above."""
    a = as_sl2(a, tol=1e-8)
    ah = a.conj().T
    cols = [from_hermitian(a @ hermitian(e) @ ah) for e in np.eye(4)]
    return np.array(cols).T


def is_lorentz(m, tol: float = POINT_TOL) -> bool:
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.abs(m).max()) ** 2)
    return bool(np.allclose(m.T @ ETA @ m, ETA, atol=tol * scale) and m[0, 0] > 0)


def act(a, x) -> np.ndarray:
    """Apply the isometry of ``A`` in SL(2, C) to point(s) ``x``."""
    return project_to_hyperboloid(np.asarray(x, dtype=float) @ to_lorentz(a).T)


def translation_length(a) -> float:
    """Minimal displacement ``2 |ln|lambda||`` of ``A``, lambda the larger eigenvalue.

    Exactly zero for elliptic and parabolic elements (``|lambda| = 1``).
    """
    a = np.asarray(a, dtype=complex)
    tr = a[0, 0] + a[1, 1]
    disc = np.sqrt(tr * tr - 4.0)
    lam = max((tr + disc) / 2.0, (tr - disc) / 2.0, key=abs)
    mod = abs(lam)
    if mod <= 1.0:
        return 0.0
    return 2.0 * float(np.log(mod))


def displacement(a, x):
    """``d(x, A x)`` for point(s) ``x``."""
    return distance(x, act(a, x))


# ------------------------------------------------------------ cross-check


def to_upper_half_space(x) -> tuple[complex, float]:
    """Point ``(z, h)`` of the upper half-space with ``X(x) ~ [[|z|^2 + h^2, z], [conj z, 1]] / h``."""
    x = np.asarray(x, dtype=float)
    delta = x[0] - x[3]
    return complex(x[1], x[2]) / delta, 1.0 / delta


def upper_half_space_distance(p: tuple[complex, float], q: tuple[complex, float]) -> float:
    (z1, h1), (z2, h2) = p, q
    return float(np.arccosh(1.0 + (abs(z1 - z2) ** 2 + (h1 - h2) ** 2) / (2.0 * h1 * h2)))


# ------------------------------------------------------- thin triangles


@dataclass(frozen=True)
class HyperbolicConstants:
    """Empirical thin-triangle constant of H^3."""

    delta_thin: float
    samples: int
    seed: int


def segment_distance(x, p, q):
    """Distance from point(s) ``x`` to the geodesic segment ``[p, q]``.

    Works from the three pairwise distances: with the foot of the
    perpendicular at arc length ``s`` from the endpoint ``n`` nearer to ``x``,
    ``tanh s = (cosh d(x,n) cosh L - cosh d(x,f)) / (cosh d(x,n) sinh L)``
    and ``cosh h = cosh d(x,n) / cosh s``.  Measuring from the nearer end
    keeps the foot well conditioned; coordinate formulas cancel badly once
    the triangle is far from the origin.
    """
    dxp = np.asarray(distance(x, p))
    dxq = np.asarray(distance(x, q))
    length = np.asarray(distance(p, q))
    dn = np.minimum(dxp, dxq)
    df = np.maximum(dxp, dxq)
    cn = np.cosh(dn)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        th = (cn * np.cosh(length) - np.cosh(df)) / (cn * np.sinh(length))
        s = np.arctanh(np.clip(th, 0.0, 1.0 - 1e-16))
        h = np.arccosh(np.maximum(cn / np.cosh(s), 1.0))
    out = np.where((length > 0) & (th > 0), np.minimum(h, dn), dn)
    return out if out.ndim else float(out)


def triangle_thinness(a, b, c, n_points: int = 32, rng=None) -> float:
    """Largest sampled distance from an interior point of triangle ``abc`` to its sides.

    Interior points are taken on geodesics joining random points of two
    different sides.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    sides = [(a, b), (b, c), (c, a)]
    worst = 0.0
    for _ in range(n_points):
        i, j = rng.choice(3, size=2, replace=False)
        e1 = geodesic_point(*sides[i], rng.random())
        e2 = geodesic_point(*sides[j], rng.random())
        x = geodesic_point(e1, e2, rng.random())
        d = min(float(segment_distance(x, *s)) for s in sides)
        worst = max(worst, d)
    return worst


def _random_points(rng, n, max_radius):
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = rng.uniform(0.0, max_radius, size=n)
    return point_from_spatial(np.sinh(r)[:, None] * dirs)


def estimate_thin_constant(
    samples: int = 10_000,
    seed: int = 0,
    max_side: float = 20.0,
    points_per_triangle: int = 8,
) -> HyperbolicConstants:
    """Empirical thin-triangle constant from ``samples`` random triangles.

    Vertices are drawn within ``max_side / 2`` of the origin so every side is
    at most ``max_side``.  Deterministic for a fixed seed.
    """
    if samples < 100:
        raise ValueError("need at least 100 sample triangles")
    rng = np.random.default_rng(seed)
    tri = [_random_points(rng, samples, max_side / 2) for _ in range(3)]
    sides = [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
    worst = 0.0
    for _ in range(points_per_triangle):
        pick = rng.integers(0, 3, size=samples)
        shift = rng.integers(1, 3, size=samples)
        other = (pick + shift) % 3
        ends = []
        for idx in (pick, other):
            conds = [(idx == k)[:, None] for k in range(3)]
            start = np.select(conds, [sides[k][0] for k in range(3)])
            stop = np.select(conds, [sides[k][1] for k in range(3)])
            ends.append(geodesic_point(start, stop, rng.random(samples)))
        x = geodesic_point(ends[0], ends[1], rng.random(samples))
        d = np.min([segment_distance(x, p, q) for p, q in sides], axis=0)
        worst = max(worst, float(d.max()))
    return HyperbolicConstants(delta_thin=worst, samples=samples, seed=seed)
