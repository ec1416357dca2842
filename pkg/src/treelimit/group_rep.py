"""Finitely presented groups, words and SL(2, C) representations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hyperbolic as hyp

RELATOR_TOL = 1e-8


class GroupError(ValueError):
    pass


class MalformedWordError(GroupError):
    pass


class FamilyRangeError(GroupError):
    pass


def free_reduce(letters) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    for g, e in letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((int(g), int(e)))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word; letters are ``(generator index, +1 or -1)``."""

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        letters = tuple((int(g), int(e)) for g, e in self.letters)
        for g, e in letters:
            if e not in (1, -1) or g < 0:
                raise MalformedWordError(f"bad letter {(g, e)}")
        object.__setattr__(self, "letters", free_reduce(letters))

    @classmethod
    def gen(cls, i: int, e: int = 1) -> Word:
        return cls(((i, e),))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def __pow__(self, k: int) -> Word:
        base = self if k >= 0 else self.inverse()
        return Word(base.letters * abs(k))

    def inverse(self) -> Word:
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def is_cyclically_reduced(self) -> bool:
        if len(self.letters) < 2:
            return True
        (g0, e0), (g1, e1) = self.letters[0], self.letters[-1]
        return not (g0 == g1 and e0 == -e1)

    def key(self) -> tuple:
        # generator order a < a^-1 < b < b^-1 < ...
        return tuple(2 * g + (e < 0) for g, e in self.letters)

    def canonical(self) -> Word:
        """Least representative among rotations of the word and of its inverse."""
        if not self.letters:
            return self
        best = None
        for w in (self, self.inverse()):
            n = len(w.letters)
            for k in range(n):
                cand = w.letters[k:] + w.letters[:k]
                kk = tuple(2 * g + (e < 0) for g, e in cand)
                if best is None or kk < best[0]:
                    best = (kk, cand)
        return Word(best[1])

    def format(self, names: Sequence[str]) -> str:
        if not self.letters:
            return "1"
        single = all(len(n) == 1 and n.islower() for n in names)
        parts = []
        for g, e in self.letters:
            if single:
                parts.append(names[g] if e > 0 else names[g].upper())
            else:
                parts.append(names[g] if e > 0 else f"{names[g]}^-1")
        return "".join(parts) if single else ".".join(parts)


def parse_word(text: str, names: Sequence[str]) -> Word:
    """Parse ``"aB"`` (upper case = inverse) or ``"a1.b1^-1"`` style words."""
    text = text.strip()
    if text in ("", "1"):
        return Word()
    index = {n: i for i, n in enumerate(names)}
    if all(len(n) == 1 and n.islower() for n in names):
        letters = []
        for ch in text:
            if ch in index:
                letters.append((index[ch], 1))
            elif ch.lower() in index:
                letters.append((index[ch.lower()], -1))
            else:
                raise MalformedWordError(f"unknown generator {ch!r} in {text!r}")
        return Word(tuple(letters))
    letters = []
    for tok in text.replace("*", ".").split("."):
        e = 1
        if tok.endswith("^-1"):
            tok, e = tok[:-3], -1
        if tok not in index:
            raise MalformedWordError(f"unknown generator {tok!r} in {text!r}")
        letters.append((index[tok], e))
    return Word(tuple(letters))


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise GroupError("generator names must be distinct")
        object.__setattr__(self, "generators", gens)
        rels = tuple(self.relators)
        for r in rels:
            if not len(r):
                raise GroupError("relators must be nonempty")
            if any(g >= len(gens) for g, _ in r):
                raise MalformedWordError("relator uses an unknown generator")
        object.__setattr__(self, "relators", rels)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def word(self, text: str) -> Word:
        return parse_word(text, self.generators)

    def name(self, w: Word) -> str:
        return w.format(self.generators)


def free_group(*names: str) -> Presentation:
    return Presentation(tuple(names))


def surface_group(genus: int = 2) -> Presentation:
    names = []
    for i in range(1, genus + 1):
        names += [f"a{i}", f"b{i}"]
    rel = []
    for i in range(genus):
        a, b = 2 * i, 2 * i + 1
        rel += [(a, 1), (b, 1), (a, -1), (b, -1)]
    return Presentation(tuple(names), (Word(tuple(rel)),))


def _letters_of_length(rank: int, n: int):
    alphabet = [(g, e) for g in range(rank) for e in (1, -1)]
    for combo in itertools.product(alphabet, repeat=n):
        if all(not (x[0] == y[0] and x[1] == -y[1]) for x, y in zip(combo, combo[1:])):
            yield combo


def reduced_words(pres: Presentation, max_len: int) -> list[Word]:
    """All freely reduced words of length <= max_len (the ball), identity first."""
    out = [Word()]
    for n in range(1, max_len + 1):
        out += [Word(c) for c in _letters_of_length(pres.rank, n)]
    return out


def word_list(pres: Presentation, max_len: int) -> list[Word]:
    """Cyclically reduced words up to ``max_len``, one per rotation/inversion class."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    out = []
    for n in range(1, max_len + 1):
        for combo in _letters_of_length(pres.rank, n):
            w = Word(combo)
            if w.is_cyclically_reduced() and w.canonical() == w:
                out.append(w)
    return out


# ------------------------------------------------------------ representations


@dataclass(frozen=True)
class Representation:
    """Generator images in SL(2, C); relators must map to +-I."""

    presentation: Presentation
    images: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        imgs = tuple(hyp.as_sl2(m, tol=1e-10) for m in self.images)
        if len(imgs) != self.presentation.rank:
            raise GroupError("one image per generator required")
        object.__setattr__(self, "images", imgs)
        for r in self.presentation.relators:
            m = evaluate(self, r)
            err = min(np.abs(m - np.eye(2)).max(), np.abs(m + np.eye(2)).max())
            if err > RELATOR_TOL:
                raise GroupError(f"relator {self.presentation.name(r)} maps {err:.2e} away from +-I")

    def __call__(self, w: Word) -> np.ndarray:
        return evaluate(self, w)

    def conjugate(self, b) -> Representation:
        b = hyp.as_sl2(b)
        bi = hyp.sl2_inverse(b)
        return Representation(self.presentation, tuple(b @ m @ bi for m in self.images))


def evaluate(rep: Representation, w: Word) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    for g, e in w:
        if g >= len(rep.images):
            raise MalformedWordError(f"generator index {g} out of range")
        m = rep.images[g]
        out = out @ (m if e > 0 else hyp.sl2_inverse(m))
    return out


def _eigenvectors(m, tol=1e-9):
    """Eigenvector directions of a non-scalar 2x2 matrix (one if parabolic)."""
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.abs(m).max()))
    tr = m[0, 0] + m[1, 1]
    disc = np.sqrt(tr * tr - 4.0)
    out = []
    for lam in {(tr + disc) / 2, (tr - disc) / 2}:
        k = m - lam * np.eye(2)
        # kernel of a rank-one matrix: orthogonal complement of its largest row
        row = k[0] if np.abs(k[0]).sum() >= np.abs(k[1]).sum() else k[1]
        if np.abs(row).max() <= tol * scale:
            continue
        v = np.array([-row[1], row[0]])
        v = v / np.linalg.norm(v)
        if not any(abs(np.vdot(u, v)) > 1 - 1e-12 for u in out):
            out.append(v)
    return out


def _shares_eigenvector(v, m, tol=1e-8) -> bool:
    mv = np.asarray(m) @ v
    n = np.linalg.norm(mv)
    return abs(v[0] * mv[1] - v[1] * mv[0]) <= tol * max(n, 1e-300)


def is_irreducible(rep: Representation, tol: float = 1e-8) -> bool:
    """True iff the generator images have no common eigenvector."""
    mats = [m for m in rep.images if np.abs(m - m[0, 0] * np.eye(2)).max() > tol * max(1, np.abs(m).max())]
    if not mats:
        return False
    for v in _eigenvectors(mats[0]):
        if all(_shares_eigenvector(v, m, tol) for m in mats[1:]):
            return False
    return True


def length_function(rep: Representation, words: Sequence[Word]) -> np.ndarray:
    return np.array([hyp.translation_length(evaluate(rep, w)) for w in words])


def identity_representation(pres: Presentation) -> Representation:
    return Representation(pres, tuple(np.eye(2, dtype=complex) for _ in range(pres.rank)))


# ----------------------------------------------------------------- families


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _hyperbolic_power(m, s):
    """``m**s`` along the one-parameter subgroup through a loxodromic ``m``."""
    m = np.asarray(m, dtype=complex)
    w, v = np.linalg.eig(m)
    return v @ np.diag(w.astype(complex) ** s) @ np.linalg.inv(v)


def _octagon_pairings():
    """Side pairings of the regular hyperbolic octagon with angles pi/4.

    Real matrices acting on the upper half-plane, which sits in H^3 as the
    vertical plane over the real axis.  Side ``k`` has outward normal at
    angle ``k pi / 4`` and lies at distance ``arccosh(cot(pi/8))`` from i.
    """
    r = np.arccosh(1.0 / np.tan(np.pi / 8))

    def rot(theta):
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        return np.array([[c, s], [-s, c]], dtype=complex)

    shift = np.diag([np.exp(r), np.exp(-r)]).astype(complex)

    def pairing(src, dst):
        return rot(dst * np.pi / 4) @ shift @ rot(np.pi) @ rot(-src * np.pi / 4)

    return (pairing(2, 0), pairing(1, 3), pairing(6, 4), pairing(5, 7))


@dataclass(frozen=True)
class RepresentationFamily:
    """Built-in one-parameter families ``t -> rho_t``.

    ``diagonal_stretch``  F2 = <a, b>, a = diag(e^t, e^-t), b = R a R^-1 with R
        the real rotation by ``angle``.  tr rho_t(a) = 2 cosh t is unbounded.
    ``octagon_twist``  genus-2 surface group; at t = 1 the side pairings of the
        regular octagon, for other t the twist b1 -> b1 a1^(t-1) along the
        one-parameter subgroup of a1.  The relator holds for every t and
        tr rho_t(b1) grows like exp((t-1) l(a1) / 2).
    ``constant``  fixed generator matrices; bounded by construction.
    """

    name: str
    params: dict = field(default_factory=dict)
    t_min: float = 0.0
    t_max: float = float("inf")

    def presentation(self) -> Presentation:
        if self.name == "diagonal_stretch":
            return free_group("a", "b")
        if self.name == "octagon_twist":
            return surface_group(2)
        if self.name == "constant":
            return self.params["presentation"]
        raise GroupError(f"unknown family {self.name!r}")


def diagonal_stretch(angle: float = np.pi / 4) -> RepresentationFamily:
    return RepresentationFamily("diagonal_stretch", {"angle": float(angle)}, t_min=0.0)


def octagon_twist() -> RepresentationFamily:
    return RepresentationFamily("octagon_twist", {}, t_min=0.0)


def constant_family(pres: Presentation, matrices) -> RepresentationFamily:
    mats = tuple(hyp.as_sl2(m, tol=1e-10) for m in matrices)
    return RepresentationFamily("constant", {"presentation": pres, "matrices": mats}, t_min=0.0)


def family_at(fam: RepresentationFamily, t: float) -> Representation:
    if not (fam.t_min < t <= fam.t_max):
        raise FamilyRangeError(f"t = {t} outside ({fam.t_min}, {fam.t_max}] for {fam.name}")
    pres = fam.presentation()
    if fam.name == "diagonal_stretch":
        a = np.diag([np.exp(t), np.exp(-t)]).astype(complex)
        r = _rotation(fam.params.get("angle", np.pi / 4))
        b = r @ a @ r.T.conj()
        return Representation(pres, (a, b))
    if fam.name == "octagon_twist":
        a1, b1, a2, b2 = _octagon_pairings()
        b1 = b1 @ _hyperbolic_power(a1, t - 1.0)
        return Representation(pres, (a1, b1, a2, b2))
    return Representation(pres, fam.params["matrices"])
