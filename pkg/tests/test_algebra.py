import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncergo.algebra import (
    AlgebraShape,
    Element,
    SelfAdjointFunctional,
    State,
    commutator_norm,
    eigh_desc,
    evaluate,
    hermitian_frame,
    is_positive,
    is_tracial,
    jordan_decompose,
    make_element,
    max_eigenvalue,
    operator_norm,
    spectral_projection,
)
from ncergo.errors import DimensionMismatch, NotSelfAdjoint
from ncergo.sampling import random_positive, random_self_adjoint, random_shape, random_state

from oracles import eig2_hermitian, singular2

M2 = AlgebraShape((2,))
C2 = AlgebraShape((1, 1))


# -- construction -----------------------------------------------------------

def test_make_element_commutative_diagonal():
    x = make_element(C2, [[[2]], [[5]]])
    assert [b[0, 0] for b in x.blocks] == [2, 5]


def test_make_element_accepts_non_self_adjoint():
    x = make_element(M2, [[[0, 1], [0, 0]]])
    assert not x.is_self_adjoint()


def test_make_element_rejects_wrong_block_size():
    with pytest.raises(DimensionMismatch, match="block 0"):
        make_element(M2, [np.eye(3)])


def test_make_element_rejects_wrong_block_count():
    with pytest.raises(DimensionMismatch):
        make_element(C2, [[[1]]])


def test_shape_rejects_empty_block():
    with pytest.raises(ValueError):
        AlgebraShape((2, 0))


def test_elements_are_immutable():
    x = make_element(M2, [np.eye(2)])
    with pytest.raises(ValueError):
        x.blocks[0][0, 0] = 5


def test_hermitian_frame_is_unitary():
    shape = AlgebraShape((1, 2, 3))
    f = hermitian_frame(shape)
    assert np.allclose(f.conj().T @ f, np.eye(shape.dim))


# -- norms, positivity ------------------------------------------------------

def test_operator_norm_unit():
    assert operator_norm(AlgebraShape((1, 2, 3)).unit()) == pytest.approx(1.0)


def test_operator_norm_diagonal():
    assert operator_norm(make_element(C2, [[[2]], [[5]]])) == pytest.approx(5.0)


def test_operator_norm_against_2x2_svd_oracle():
    m = np.array([[0, 3], [0, 0]])
    assert operator_norm(make_element(M2, [m])) == pytest.approx(singular2(m)[0]) == pytest.approx(3.0)


def test_is_positive_examples():
    assert is_positive(M2.unit())
    assert not is_positive(make_element(C2, [[[1]], [[-1]]]))
    h = np.array([[1, 0.5], [0.5, 1]])
    assert eig2_hermitian(h) == pytest.approx((1.5, 0.5))
    assert is_positive(make_element(M2, [h]))


def test_eigh_desc_is_descending_and_deterministic():
    h = np.diag([1.0, 3.0, 3.0, 2.0])
    w, v = eigh_desc(h)
    assert list(w) == [3.0, 3.0, 2.0, 1.0]
    w2, v2 = eigh_desc(h.copy())
    assert np.array_equal(v, v2)


def test_spectral_projection_selects_range():
    x = make_element(C2, [[[2]], [[5]]])
    p = spectral_projection(x, 3.0)
    assert p.allclose(make_element(C2, [[[0]], [[1]]]))


# -- states and evaluation --------------------------------------------------

def test_evaluate_uniform_state():
    shape = AlgebraShape((1, 1, 1))
    phi = State(shape, [[[1 / 3]]] * 3)
    x = make_element(shape, [[[1]], [[2]], [[3]]])
    assert evaluate(phi, x) == pytest.approx(2.0)


def test_evaluate_unit_is_one():
    phi = random_state(np.random.default_rng(3), AlgebraShape((2, 3)))
    assert evaluate(phi, phi.shape.unit()) == pytest.approx(1.0)


def test_evaluate_maximally_mixed_hand_computation():
    phi = State.maximally_mixed(M2)
    x = make_element(M2, [[[1, 0.5], [0.5, 1]]])
    # trace(I/2 x) = (1 + 1) / 2
    assert evaluate(phi, x) == pytest.approx(1.0)


def test_state_validation():
    with pytest.raises(ValueError, match="trace"):
        State(C2, [[[0.5]], [[0.6]]])
    with pytest.raises(ValueError, match="negative"):
        State(C2, [[[1.5]], [[-0.5]]])
    with pytest.raises(NotSelfAdjoint):
        State(M2, [[[0.5, 1], [0, 0.5]]])


def test_faithfulness():
    assert State.maximally_mixed(M2).is_faithful()
    assert not State(C2, [[[1]], [[0]]]).is_faithful()


# -- Jordan decomposition ---------------------------------------------------

def test_jordan_diagonal_example():
    phi = SelfAdjointFunctional(make_element(C2, [[[1]], [[-2]]]))
    jd = jordan_decompose(phi)
    assert jd.positive.witness.allclose(make_element(C2, [[[1]], [[0]]]))
    assert jd.negative.witness.allclose(make_element(C2, [[[0]], [[2]]]))
    assert phi.norm == pytest.approx(3.0)
    assert jd.support.allclose(make_element(C2, [[[1]], [[0]]]))


def test_jordan_positive_witness_has_no_negative_part():
    h = random_positive(np.random.default_rng(0), AlgebraShape((3,)))
    jd = jordan_decompose(SelfAdjointFunctional(h))
    assert operator_norm(jd.negative.witness) == pytest.approx(0.0, abs=1e-12)
    assert jd.support.allclose(h.shape.unit())


def test_jordan_swap_matrix_against_eigenvector_oracle():
    phi = SelfAdjointFunctional(make_element(M2, [[[0, 1], [1, 0]]]))
    jd = jordan_decompose(phi)
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    assert np.allclose(jd.positive.witness.blocks[0], np.outer(plus, plus))
    assert np.allclose(jd.negative.witness.blocks[0], np.outer(minus, minus))
    assert jd.positive.norm == pytest.approx(1.0)
    assert jd.negative.norm == pytest.approx(1.0)


def test_jordan_rejects_states():
    with pytest.raises(NotSelfAdjoint):
        jordan_decompose(State.maximally_mixed(M2))


# -- traciality and commutators ---------------------------------------------

def test_tracial_examples():
    assert is_tracial(State.maximally_mixed(M2))
    assert is_tracial(random_state(np.random.default_rng(1), AlgebraShape((1, 1, 1))))
    rho = State(M2, [np.diag([0.7, 0.3])])
    assert not is_tracial(rho)
    # witness pair: trace(rho [x, y]) != 0
    x = make_element(M2, [[[0, 1], [0, 0]]])
    assert abs(evaluate(rho, x @ x.H - x.H @ x)) > 0.1


def test_commutator_examples():
    x = make_element(M2, [[[0, 1], [0, 0]]])
    assert commutator_norm(x, x.H) == pytest.approx(1.0)
    assert commutator_norm(x, x) == 0.0
    a, b = make_element(C2, [[[1]], [[2]]]), make_element(C2, [[[3]], [[-1]]])
    assert commutator_norm(a, b) == 0.0


# -- properties -------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random_element(rng, shape):
    return Element(
        shape,
        [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for n in shape.block_dims],
    )


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_c_star_identity(seed):
    rng = np.random.default_rng(seed)
    x = _random_element(rng, random_shape(rng))
    assert operator_norm(x.H @ x) == pytest.approx(operator_norm(x) ** 2, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_adjoint_reverses_products(seed):
    rng = np.random.default_rng(seed)
    shape = random_shape(rng)
    x, y = _random_element(rng, shape), _random_element(rng, shape)
    assert (x @ y).H.allclose(y.H @ x.H, 1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_states_are_positive_on_squares(seed):
    rng = np.random.default_rng(seed)
    shape = random_shape(rng)
    phi = random_state(rng, shape, rank=int(rng.integers(1, 4)))
    x = _random_element(rng, shape)
    val = evaluate(phi, x.H @ x)
    assert val.real >= -1e-10
    assert abs(val.imag) < 1e-10
    assert evaluate(phi, x.H) == pytest.approx(np.conj(evaluate(phi, x)))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_jordan_reconstruction_and_norm(seed):
    rng = np.random.default_rng(seed)
    shape = random_shape(rng)
    phi = SelfAdjointFunctional(random_self_adjoint(rng, shape))
    jd = jordan_decompose(phi)
    x = _random_element(rng, shape)
    assert evaluate(jd.positive, x) - evaluate(jd.negative, x) == pytest.approx(evaluate(phi, x), abs=1e-12)
    assert phi.norm == pytest.approx(jd.positive.norm + jd.negative.norm, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_functional_norm_duality(seed):
    rng = np.random.default_rng(seed)
    shape = random_shape(rng)
    h = random_self_adjoint(rng, shape)
    phi = SelfAdjointFunctional(h)
    for _ in range(5):
        x = _random_element(rng, shape)
        x = x / operator_norm(x)
        assert abs(evaluate(phi, x)) <= phi.norm + 1e-10
    # the sign of h attains the norm
    signs = []
    for b in h.blocks:
        w, v = eigh_desc(b)
        signs.append((v * np.sign(w)) @ v.conj().T)
    assert evaluate(phi, Element(shape, signs)).real == pytest.approx(phi.norm)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_tracial_jordan_parts_stay_tracial(seed):
    rng = np.random.default_rng(seed)
    shape = random_shape(rng)
    h = Element(shape, [rng.standard_normal() * np.eye(n) for n in shape.block_dims])
    jd = jordan_decompose(SelfAdjointFunctional(h))
    assert is_tracial(jd.positive) and is_tracial(jd.negative)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_max_eigenvalue_matches_dense_eigensolver(seed):
    rng = np.random.default_rng(seed)
    shape = random_shape(rng)
    h = random_self_adjoint(rng, shape)
    dense = max(np.linalg.eigvalsh(b).max() for b in h.blocks)
    assert max_eigenvalue(h) == pytest.approx(dense, abs=1e-12)
