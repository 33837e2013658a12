"""Finite-dimensional C*-algebras realized as direct sums of matrix blocks.

An algebra ``M_{n_1} + ... + M_{n_B}`` is described by an :class:`AlgebraShape`.
Its members are :class:`Element` values, states are block density matrices
paired with elements through the trace, and self-adjoint functionals are
represented by a self-adjoint witness under the same pairing.

Elements are flattened ("vectorized") by concatenating the row-major ravel of
each block.  Under this flattening the Hilbert-Schmidt pairing
``sum_i trace(x_i^* y_i)`` is the ordinary complex dot product, which is what
the linear-map machinery in :mod:`ncergo.dynamics` and :mod:`ncergo.averaging`
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NotSelfAdjoint

# input validation tolerance for densities and witnesses
TOL_INPUT = 1e-9
# comparison tolerance for derived equalities
TOL_COMPARE = 1e-8


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes ``(n_1, ..., n_B)`` of ``M_{n_1}(C) + ... + M_{n_B}(C)``."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise DimensionMismatch("an algebra needs at least one block")
        for i, n in enumerate(dims):
            if n < 1:
                raise DimensionMismatch(f"block {i} has size {n}; sizes must be >= 1")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @cached_property
    def dim(self) -> int:
        """Complex dimension ``sum n_i^2``."""
        return sum(n * n for n in self.block_dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out = [0]
        for n in self.block_dims:
            out.append(out[-1] + n * n)
        return tuple(out)

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    def unit(self) -> Element:
        return Element(self, [np.eye(n, dtype=complex) for n in self.block_dims])

    def zero(self) -> Element:
        return Element(self, [np.zeros((n, n), dtype=complex) for n in self.block_dims])

    def basis(self) -> list[Element]:
        """Matrix units ``e_{b,j,k}``, in flattening order."""
        return [Element.from_vec(self, col) for col in np.eye(self.dim, dtype=complex)]

    def block_slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])


def hermitian_frame(shape: AlgebraShape) -> np.ndarray:
    """Columns are flattened self-adjoint elements forming an orthonormal basis.

    Per block: ``E_jj``, ``(E_jk + E_kj)/sqrt 2`` and ``i(E_jk - E_kj)/sqrt 2``
    for ``j < k``.  The matrix is unitary, and any real-linear map preserving
    self-adjointness becomes a real matrix in this frame.
    """
    cols = []
    r = 1 / np.sqrt(2)
    for b, n in enumerate(shape.block_dims):
        off = shape.offsets[b]
        for j in range(n):
            v = np.zeros(shape.dim, dtype=complex)
            v[off + j * n + j] = 1
            cols.append(v)
        for j in range(n):
            for k in range(j + 1, n):
                v = np.zeros(shape.dim, dtype=complex)
                v[off + j * n + k] = r
                v[off + k * n + j] = r
                cols.append(v)
                w = np.zeros(shape.dim, dtype=complex)
                w[off + j * n + k] = 1j * r
                w[off + k * n + j] = -1j * r
                cols.append(w)
    return np.column_stack(cols)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class Element:
    """A member of a block algebra.  Immutable."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Sequence[np.ndarray]):
        blocks = list(blocks)
        if len(blocks) != shape.num_blocks:
            raise DimensionMismatch(
                f"expected {shape.num_blocks} blocks, got {len(blocks)}"
            )
        frozen = []
        for i, (b, n) in enumerate(zip(blocks, shape.block_dims)):
            arr = np.atleast_2d(np.asarray(b, dtype=complex))
            if arr.shape != (n, n):
                raise DimensionMismatch(
                    f"block {i} has shape {arr.shape}, expected ({n}, {n})"
                )
            frozen.append(_frozen(arr))
        self.shape = shape
        self.blocks = tuple(frozen)

    @classmethod
    def from_vec(cls, shape: AlgebraShape, v: np.ndarray) -> Element:
        v = np.asarray(v, dtype=complex)
        if v.shape != (shape.dim,):
            raise DimensionMismatch(f"vector of length {v.shape} for algebra of dim {shape.dim}")
        return cls(
            shape,
            [v[shape.block_slice(i)].reshape(n, n) for i, n in enumerate(shape.block_dims)],
        )

    @classmethod
    def scalar(cls, shape: AlgebraShape, c: complex) -> Element:
        return c * shape.unit()

    def vec(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks])

    def _check(self, other: Element):
        if self.shape != other.shape:
            raise DimensionMismatch(
                f"shape mismatch: {self.shape.block_dims} vs {other.shape.block_dims}"
            )

    @property
    def H(self) -> Element:
        """Adjoint."""
        return Element(self.shape, [b.conj().T for b in self.blocks])

    def __add__(self, other):
        if isinstance(other, Element):
            self._check(other)
            return Element(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])
        if np.isscalar(other):
            return self + Element.scalar(self.shape, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Element(self.shape, [-b for b in self.blocks])

    def __sub__(self, other):
        if isinstance(other, Element) or np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if np.isscalar(c):
            return Element(self.shape, [c * b for b in self.blocks])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if np.isscalar(c):
            return Element(self.shape, [b / c for b in self.blocks])
        return NotImplemented

    def __matmul__(self, other: Element) -> Element:
        self._check(other)
        return Element(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def is_self_adjoint(self, tol: float = TOL_INPUT) -> bool:
        return all(np.max(np.abs(b - b.conj().T), initial=0.0) <= tol for b in self.blocks)

    def allclose(self, other: Element, atol: float = TOL_COMPARE) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.vec() - other.vec())) <= atol)

    def __repr__(self):
        return f"Element(block_dims={self.shape.block_dims}, blocks={[b.tolist() for b in self.blocks]})"


def make_element(shape: AlgebraShape, blocks: Sequence) -> Element:
    return Element(shape, blocks)


def hs_inner(x: Element, y: Element) -> complex:
    """Hilbert-Schmidt pairing ``sum_i trace(x_i^* y_i)``."""
    x._check(y)
    return complex(np.vdot(x.vec(), y.vec()))


# -- Hermitian eigendecomposition kernel ------------------------------------

def eigh_desc(h: np.ndarray, tie_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with a reproducible ordering.

    Eigenvalues come out descending.  Each eigenvector is rotated so its first
    non-negligible entry is real positive, and eigenvectors sharing an
    eigenvalue (up to ``tie_tol`` relative) are ordered lexicographically by
    the magnitudes of their entries, largest leading entries first.
    """
    h = np.asarray(h, dtype=complex)
    h = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            ph = col[idx[0]] / abs(col[idx[0]])
            v[:, j] = col / ph
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    order = []
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop] - w[start]) <= tie_tol * scale:
            stop += 1
        group = list(range(start, stop))
        group.sort(key=lambda j: tuple(-np.round(np.abs(v[:, j]), 10)))
        order.extend(group)
        start = stop
    return w[order], v[:, order]


class Eigenpair(NamedTuple):
    value: float
    block: int
    vector: np.ndarray


def spectral_data(x: Element) -> list[Eigenpair]:
    """All eigenpairs of a self-adjoint element, descending, ties by block index."""
    pairs = []
    for i, b in enumerate(x.blocks):
        w, v = eigh_desc(b)
        pairs.extend(Eigenpair(float(w[j]), i, v[:, j]) for j in range(len(w)))
    pairs.sort(key=lambda p: (-round(p.value, 12), p.block))
    return pairs


def max_eigenvalue(x: Element) -> float:
    return max(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[-1]) for b in x.blocks)


def min_eigenvalue(x: Element) -> float:
    return min(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[0]) for b in x.blocks)


def spectral_projection(x: Element, lo: float, hi: float = np.inf) -> Element:
    """Projection onto the eigenvectors of ``x`` with eigenvalue in ``[lo, hi]``."""
    blocks = []
    for b in x.blocks:
        w, v = eigh_desc(b)
        sel = v[:, (w >= lo) & (w <= hi)]
        blocks.append(sel @ sel.conj().T)
    return Element(x.shape, blocks)


def operator_norm(x: Element) -> float:
    """Largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks)


def is_positive(x: Element, tol: float = TOL_INPUT) -> bool:
    if not x.is_self_adjoint(tol):
        return False
    return min_eigenvalue(x) >= -tol


def commutator_norm(x: Element, y: Element) -> float:
    return operator_norm(x @ y - y @ x)


# -- states and functionals --------------------------------------------------

class State:
    """A state given by block density matrices, ``phi(x) = sum_i trace(rho_i x_i)``."""

    __slots__ = ("density",)

    def __init__(self, shape: AlgebraShape, densities: Sequence[np.ndarray], tol: float = TOL_INPUT):
        rho = Element(shape, densities)
        for i, b in enumerate(rho.blocks):
            if np.max(np.abs(b - b.conj().T), initial=0.0) > tol:
                raise NotSelfAdjoint(f"density block {i} is not Hermitian")
            lo = np.linalg.eigvalsh((b + b.conj().T) / 2)[0]
            if lo < -tol:
                raise ValueError(f"density block {i} has negative eigenvalue {lo:.3g}")
        total = sum(np.trace(b) for b in rho.blocks)
        if abs(total - 1) > tol:
            raise ValueError(f"densities have total trace {total.real:.12g}, expected 1")
        self.density = rho

    @classmethod
    def from_density(cls, rho: Element, tol: float = TOL_INPUT) -> State:
        return cls(rho.shape, rho.blocks, tol)

    @classmethod
    def maximally_mixed(cls, shape: AlgebraShape) -> State:
        total = sum(shape.block_dims)
        return cls(shape, [np.eye(n) / total for n in shape.block_dims])

    @classmethod
    def tracial(cls, shape: AlgebraShape, weights: Sequence[float]) -> State:
        """``sum_i w_i tr_i / n_i`` for a probability vector ``w`` over blocks."""
        return cls(shape, [w * np.eye(n) / n for w, n in zip(weights, shape.block_dims)])

    @classmethod
    def vector_state(cls, shape: AlgebraShape, block: int, vector: np.ndarray) -> State:
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        blocks = [np.zeros((n, n), dtype=complex) for n in shape.block_dims]
        blocks[block] = np.outer(v, v.conj())
        return cls(shape, blocks)

    @property
    def shape(self) -> AlgebraShape:
        return self.density.shape

    @property
    def densities(self) -> tuple[np.ndarray, ...]:
        return self.density.blocks

    def is_faithful(self, tol: float = 1e-10) -> bool:
        return all(np.linalg.eigvalsh(b)[0] > tol for b in self.densities)

    def __call__(self, x: Element) -> complex:
        return evaluate(self, x)

    def __repr__(self):
        return f"State(block_dims={self.shape.block_dims}, densities={[b.tolist() for b in self.densities]})"


class SelfAdjointFunctional:
    """A real functional ``x -> sum_i trace(h_i x_i)`` with self-adjoint witness ``h``."""

    __slots__ = ("witness",)

    def __init__(self, witness: Element, tol: float = TOL_INPUT):
        if not witness.is_self_adjoint(tol):
            raise NotSelfAdjoint("functional witness must be self-adjoint")
        self.witness = witness

    @property
    def shape(self) -> AlgebraShape:
        return self.witness.shape

    @property
    def norm(self) -> float:
        """Trace norm of the witness."""
        return float(sum(np.sum(np.abs(np.linalg.eigvalsh(b))) for b in self.witness.blocks))

    def __call__(self, x: Element) -> complex:
        return evaluate(self, x)

    def __sub__(self, other: SelfAdjointFunctional) -> SelfAdjointFunctional:
        return SelfAdjointFunctional(self.witness - other.witness)


Functional = Union[State, SelfAdjointFunctional]


def _witness(phi: Functional) -> Element:
    return phi.density if isinstance(phi, State) else phi.witness


def evaluate(phi: Functional, x: Element) -> complex:
    w = _witness(phi)
    w._check(x)
    return complex(sum(np.sum(r.T * b) for r, b in zip(w.blocks, x.blocks)))


class JordanDecomposition(NamedTuple):
    positive: SelfAdjointFunctional
    negative: SelfAdjointFunctional
    support: Element


def jordan_decompose(phi: SelfAdjointFunctional) -> JordanDecomposition:
    """Split ``phi`` into orthogonal positive parts ``phi+ - phi-``.

    The witnesses are the positive and negative spectral parts of ``h``;
    ``support`` is the spectral projection of ``h`` onto ``(0, inf)``, so that
    ``phi+(1 - z) = 0`` and ``phi-(z) = 0``.
    """
    if not isinstance(phi, SelfAdjointFunctional):
        raise NotSelfAdjoint("Jordan decomposition needs a self-adjoint functional")
    pos, neg, sup = [], [], []
    for b in phi.witness.blocks:
        w, v = eigh_desc(b)
        vh = v.conj().T
        pos.append((v * np.maximum(w, 0)) @ vh)
        neg.append((v * np.maximum(-w, 0)) @ vh)
        p = v[:, w > 0]
        sup.append(p @ p.conj().T)
    shape = phi.shape
    return JordanDecomposition(
        SelfAdjointFunctional(Element(shape, pos)),
        SelfAdjointFunctional(Element(shape, neg)),
        Element(shape, sup),
    )


def is_central(x: Element, tol: float = TOL_INPUT) -> bool:
    """Every block a scalar multiple of the identity."""
    for b in x.blocks:
        n = b.shape[0]
        if np.max(np.abs(b - np.trace(b) / n * np.eye(n)), initial=0.0) > tol:
            return False
    return True


def is_tracial(phi: Functional, tol: float = TOL_INPUT) -> bool:
    return is_central(_witness(phi), tol)
