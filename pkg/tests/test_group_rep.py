from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from treelimit import hyperbolic as hyp
from treelimit.group_rep import (
    FamilyRangeError,
    GroupError,
    MalformedWordError,
    Presentation,
    Representation,
    Word,
    constant_family,
    diagonal_stretch,
    evaluate,
    family_at,
    free_group,
    identity_representation,
    is_irreducible,
    length_function,
    octagon_twist,
    reduced_words,
    surface_group,
    word_list,
)

F2 = free_group("a", "b")
letters = st.lists(st.tuples(st.integers(0, 1), st.sampled_from([1, -1])), max_size=8)


def brute_force_length(m, grid: int = 7) -> float:
    """Minimize the displacement over points near the origin, refined by Nelder-Mead."""
    from scipy.optimize import minimize

    def disp(x):
        return hyp.displacement(m, hyp.point_from_spatial(x))

    best = min((minimize(disp, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 4000})
                for x0 in np.random.default_rng(0).uniform(-2, 2, size=(grid, 3))), key=lambda r: r.fun)
    return float(best.fun)


def test_empty_and_cancelling_words_are_identity():
    rep = family_at(diagonal_stretch(), 1.0)
    assert np.allclose(evaluate(rep, Word()), np.eye(2))
    assert np.allclose(evaluate(rep, F2.word("aA")), np.eye(2))
    assert F2.word("aA") == Word()


@given(letters, letters)
def test_words_multiply_like_a_free_group(x, y):
    u, v = Word(tuple(x)), Word(tuple(y))
    rep = family_at(diagonal_stretch(), 0.3)
    assert np.allclose(evaluate(rep, u * v), evaluate(rep, u) @ evaluate(rep, v), atol=1e-6, rtol=1e-9)
    assert (u * u.inverse()) == Word()


def test_word_parsing_and_formatting():
    assert F2.name(F2.word("abAB")) == "abAB"
    s = surface_group(2)
    w = s.word("a1.b1^-1")
    assert s.name(w) == "a1.b1^-1"
    with pytest.raises(MalformedWordError):
        F2.word("ac")


def test_surface_relator_holds_for_octagon_family():
    fam = octagon_twist()
    pres = fam.presentation()
    for t in (0.5, 1.0, 2.0, 4.0):
        rep = family_at(fam, t)
        m = evaluate(rep, pres.relators[0])
        assert min(np.abs(m - np.eye(2)).max(), np.abs(m + np.eye(2)).max()) <= 1e-8


def test_relator_violation_is_rejected():
    pres = Presentation(("a", "b"), (F2.word("abAB"),))
    a = np.diag([2.0, 0.5])
    b = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(GroupError):
        Representation(pres, (a, b))


def test_irreducibility_cases():
    e = math.e
    diag = Representation(F2, (np.diag([e, 1 / e]), np.diag([2.0, 0.5])))
    assert not is_irreducible(diag)
    assert not is_irreducible(identity_representation(F2))
    rot = np.array([[math.cos(math.pi / 4), -math.sin(math.pi / 4)], [math.sin(math.pi / 4), math.cos(math.pi / 4)]])
    a = np.diag([e, 1 / e])
    assert is_irreducible(Representation(F2, (a, rot @ a @ rot.T)))


def test_quarter_turn_gives_the_inverse_matrix():
    # with the real rotation by pi/2 the second generator is a^-1, so the pair is reducible
    rep = family_at(diagonal_stretch(math.pi / 2), 1.0)
    assert np.allclose(rep.images[1], np.linalg.inv(rep.images[0]))
    assert not is_irreducible(rep)


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_built_in_families_are_irreducible(t):
    assert is_irreducible(family_at(diagonal_stretch(), t))
    assert is_irreducible(family_at(octagon_twist(), t))


def test_family_closed_forms():
    t = 1.7
    rep = family_at(diagonal_stretch(), t)
    assert np.trace(rep.images[0]).real == pytest.approx(math.exp(t) + math.exp(-t))
    assert length_function(rep, [F2.word("a")])[0] == pytest.approx(2 * t)
    with pytest.raises(FamilyRangeError):
        family_at(diagonal_stretch(), -1.0)


def test_identity_representation_has_zero_lengths():
    lengths = length_function(identity_representation(F2), word_list(F2, 3))
    assert np.all(lengths == 0)


def test_length_of_ab_matches_displacement_oracle():
    rep = family_at(diagonal_stretch(), 3.0)
    m = evaluate(rep, F2.word("ab"))
    assert length_function(rep, [F2.word("ab")])[0] == pytest.approx(brute_force_length(m), abs=1e-6)


def test_word_lists():
    assert [F2.name(w) for w in word_list(F2, 1)] == ["a", "b"]
    assert [F2.name(w) for w in word_list(F2, 2)] == ["a", "b", "aa", "ab", "aB", "bb"]
    with pytest.raises(ValueError):
        word_list(F2, 0)


def test_word_list_is_one_per_conjugacy_and_inversion_class():
    words = word_list(F2, 4)
    keys = [w.canonical() for w in words]
    assert len(set(keys)) == len(keys)
    for w in reduced_words(F2, 4):
        if len(w) and w.is_cyclically_reduced():
            assert w.canonical() in set(keys)


def test_ball_sizes():
    # 1 + 4 + 12 + 36 reduced words of length <= 3 in a free group of rank 2
    assert len(reduced_words(F2, 3)) == 53


def test_constant_family_returns_its_matrices():
    a = np.array([[1, 1], [0, 1]], dtype=complex)
    fam = constant_family(F2, [a, a.T])
    assert np.allclose(family_at(fam, 5.0).images[0], a)


def test_conjugation_preserves_lengths():
    rep = family_at(octagon_twist(), 1.5)
    b = hyp.normalize_sl2(np.array([[1.0, 2.0 + 1j], [0.3, 1.5]]))
    words = word_list(rep.presentation, 2)
    assert np.allclose(length_function(rep, words), length_function(rep.conjugate(b), words), atol=1e-8)
