from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncergo.algebra import AlgebraShape, is_positive, make_element, operator_norm
from ncergo.dynamics import (
    Automorphism,
    FolnerSchedule,
    GroupAction,
    GroupPresentation,
    apply,
    check_ideal,
    enumerate_folner,
    folner_defect,
    validate_action,
)
from ncergo.errors import DimensionMismatch, FolnerCapExceeded, IdealError, InvalidWord
from ncergo.sampling import random_action, random_positive

from systems import cyclic_plus_block, cyclic_shift, diag_element, phase_m2

M2 = AlgebraShape((2,))


def test_identity_automorphism():
    x = make_element(AlgebraShape((1, 2)), [[[3]], [[1, 2], [3, 4]]])
    assert apply(Automorphism.identity(x.shape), x).allclose(x)


def test_cyclic_shift_moves_coordinates():
    act = cyclic_shift(3)
    y = apply(act, diag_element(1, 2, 3), word=1)
    assert y.allclose(diag_element(3, 1, 2))


def test_inner_automorphism_against_hand_conjugation():
    x = make_element(M2, [[[0, 1], [0, 0]]])
    y = apply(Automorphism.inner(M2, [np.diag([1, 1j])]), x)
    # diag(1,i) E12 diag(1,-i) = -i E12
    assert y.allclose(make_element(M2, [[[0, -1j], [0, 0]]]))


def test_group_action_needs_word():
    with pytest.raises(InvalidWord):
        apply(cyclic_shift(3), diag_element(1, 2, 3))


def test_invalid_word_length():
    with pytest.raises(InvalidWord):
        cyclic_shift(3).apply((1, 2), diag_element(1, 2, 3))


def test_shape_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        cyclic_shift(3).apply(1, diag_element(1, 2))


def test_negative_and_cyclic_words():
    act = cyclic_shift(3, GroupPresentation.cyclic(3))
    x = diag_element(1, 2, 3)
    assert act.apply(-1, x).allclose(act.apply(2, x))
    assert act.apply(4, x).allclose(act.apply(1, x))


def test_inverse_and_compose():
    rng = np.random.default_rng(5)
    act = random_action(rng, "Z", AlgebraShape((2, 2, 1)))
    g = act.generators[0]
    x = random_positive(rng, act.shape)
    assert g.inverse().apply(g.apply(x)).allclose(x, 1e-10)
    assert g.compose(g).apply(x).allclose(g.apply(g.apply(x)), 1e-10)
    assert g.power(-3).apply(g.power(3).apply(x)).allclose(x, 1e-10)


# -- validation -------------------------------------------------------------

def test_validate_cyclic_shift_as_finite_group():
    rep = validate_action(cyclic_shift(3, GroupPresentation.cyclic(3)))
    assert rep.valid and rep.max_violation == 0


def test_validate_wrong_order_against_matrix_powers():
    rep = validate_action(phase_m2(3))
    assert not rep.valid
    # oracle: Ad_u^3 e12 = (-i)^3 e12 = i e12, so |i - 1| = sqrt 2
    u3 = np.linalg.matrix_power(np.diag([1, 1j]), 3)
    e12 = np.array([[0, 1], [0, 0]])
    expected = np.linalg.norm(u3 @ e12 @ u3.conj().T - e12, 2)
    assert rep.max_violation == pytest.approx(expected)
    assert validate_action(phase_m2(4)).valid


def test_validate_noncommuting_pair_named():
    x = np.array([[0, 1], [1, 0]])
    # Ad_x and Ad_diag(1,-1) would commute; a quarter phase does not
    z = np.diag([1, 1j])
    act = GroupAction(GroupPresentation.Zd(2), (Automorphism.inner(M2, [x]), Automorphism.inner(M2, [z])), M2)
    rep = validate_action(act)
    assert not rep.valid
    assert any("0" in v and "1" in v and "commute" in v for v in rep.violations)
    # oracle: commutator of the two superoperators
    sx, sz = (np.kron(u, u.conj()) for u in (x, z))
    assert np.abs(sx @ sz - sz @ sx).max() > 0


def test_validate_non_unitary_names_generator():
    act = GroupAction(GroupPresentation.Z(), (Automorphism.inner(M2, [np.diag([2, 1])]),), M2)
    rep = validate_action(act)
    assert not rep.valid
    assert rep.violations[0].startswith("generator 0")


def test_validate_size_mismatch():
    shape = AlgebraShape((1, 2, 3))
    act = GroupAction(GroupPresentation.Z(), (Automorphism.permutation(shape, [0, 2, 1]),), shape)
    rep = validate_action(act)
    assert not rep.valid
    assert "block 1 (dim 2)" in rep.violations[0]


def test_automorphism_rejects_bad_permutation():
    with pytest.raises(DimensionMismatch):
        Automorphism.permutation(AlgebraShape((1, 1)), [0, 0])


# -- ideals -----------------------------------------------------------------

def test_check_ideal_accepts_invariant_union():
    act = cyclic_plus_block(3, 2)
    assert check_ideal(act, [3]) == (3,)
    assert check_ideal(act, [2, 0, 1]) == (0, 1, 2)
    assert check_ideal(act, []) == ()


def test_check_ideal_rejects():
    act = cyclic_plus_block(3, 2)
    with pytest.raises(IdealError, match="generator 0"):
        check_ideal(act, [0])
    with pytest.raises(IdealError, match="whole algebra"):
        check_ideal(act, [0, 1, 2, 3])
    with pytest.raises(IdealError, match="out of range"):
        check_ideal(act, [7])


# -- Følner schedules -------------------------------------------------------

def test_folner_defect_examples():
    z = FolnerSchedule(GroupPresentation.Z())
    assert folner_defect(z, 10, 1) == Fraction(1, 5)
    assert folner_defect(FolnerSchedule(GroupPresentation.cyclic(5)), 7, 3) == 0
    # box-shift oracle: F_4 + (1,0) misses one column of 4 and adds one
    z2 = FolnerSchedule(GroupPresentation.Zd(2))
    box = {(i, j) for i in range(4) for j in range(4)}
    shifted = {(i + 1, j) for i, j in box}
    assert folner_defect(z2, 4, (1, 0)) == Fraction(len(box ^ shifted), len(box)) == Fraction(1, 2)


def test_enumerate_folner_examples():
    assert enumerate_folner(FolnerSchedule(GroupPresentation.Z()), 3) == [(0,), (1,), (2,)]
    assert enumerate_folner(FolnerSchedule(GroupPresentation.Zd(2)), 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(enumerate_folner(FolnerSchedule(GroupPresentation.cyclic(2, 2)), 17)) == 4


def test_enumerate_folner_cap():
    with pytest.raises(FolnerCapExceeded):
        enumerate_folner(FolnerSchedule(GroupPresentation.Zd(3)), 1000)
    with pytest.raises(FolnerCapExceeded):
        enumerate_folner(FolnerSchedule(GroupPresentation.Z()), 11, cap=10)


# -- properties -------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random_word(rng, pres):
    return tuple(int(n) for n in rng.integers(-7, 8, size=pres.num_generators))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_random_actions_are_valid(seed):
    rng = np.random.default_rng(seed)
    assert validate_action(random_action(rng)).valid


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_automorphisms_are_isometric_and_positive(seed):
    rng = np.random.default_rng(seed)
    act = random_action(rng)
    x = random_positive(rng, act.shape)
    y = act.apply(_random_word(rng, act.presentation), x)
    assert operator_norm(y) == pytest.approx(operator_norm(x), rel=1e-10)
    assert is_positive(y)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_action_is_a_homomorphism(seed):
    rng = np.random.default_rng(seed)
    act = random_action(rng)
    g, h = _random_word(rng, act.presentation), _random_word(rng, act.presentation)
    gh = tuple(a + b for a, b in zip(g, h))
    for e in act.shape.basis():
        lhs = act.apply(gh, e)
        rhs = act.apply(g, act.apply(h, e))
        assert lhs.allclose(rhs, 1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 60), st.data())
def test_folner_defect_decay(d, k, data):
    pres = GroupPresentation.Zd(d) if d > 1 else GroupPresentation.Z()
    word = tuple(data.draw(st.integers(-5, 5)) for _ in range(d))
    length = sum(abs(n) for n in word)
    assert folner_defect(FolnerSchedule(pres), k, word) <= Fraction(2 * length * d, k)
