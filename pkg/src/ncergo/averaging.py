"""Ergodic averages and the mean-ergodic projection.

At finite dimension the averages ``Avg_{F_k} x`` converge in norm to ``P x``,
where ``P`` is the Hilbert-Schmidt orthogonal projection onto the common
fixed space of the generators.  ``P`` is computed from a null space, never by
long averaging; the averages themselves are produced incrementally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .algebra import AlgebraShape, Element, State, hermitian_frame, operator_norm
from .dynamics import FolnerSchedule, GroupAction
from .errors import FolnerCapExceeded

SVD_CUTOFF = 1e-10
# eigenvalues of a generator within this distance of 1 count as fixed directions
FIXED_EIG_TOL = 1e-9


def average_over(action: GroupAction, words: Iterable, x: Element) -> Element:
    words = list(words)
    if not words:
        raise ValueError("cannot average over an empty set of words")
    acc = np.zeros(action.shape.dim, dtype=complex)
    v = x.vec()
    for w in words:
        acc += action.matrix(w) @ v
    return Element.from_vec(action.shape, acc / len(words))


@dataclass(frozen=True)
class FixedPointProjection:
    """Orthogonal projection onto the fixed-point subalgebra.

    ``matrix`` acts on flattened elements; ``basis`` is a Hilbert-Schmidt
    orthonormal family of self-adjoint fixed elements spanning the image.
    """

    shape: AlgebraShape
    matrix: np.ndarray
    basis: tuple[Element, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __call__(self, x: Element) -> Element:
        return Element.from_vec(self.shape, self.matrix @ x.vec())

    def dual(self, phi: State) -> State:
        """The state ``phi o P``.

        ``P`` is self-adjoint for the trace pairing, so the new density is
        ``P`` applied to the old one.
        """
        return State.from_density(self(phi.density))


def fixed_point_projection(action: GroupAction) -> FixedPointProjection:
    shape = action.shape
    frame = hermitian_frame(shape)
    eye = np.eye(shape.dim)
    # real coordinates: each (T_g - 1) preserves self-adjointness
    rows = [(frame.conj().T @ (g.matrix - eye) @ frame).real for g in action.generators]
    stacked = np.vstack(rows) if rows else np.zeros((1, shape.dim))
    _, s, vt = np.linalg.svd(stacked)
    # T_g - 1 has norm at most 2, so an absolute floor avoids cutting round-off
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > SVD_CUTOFF * max(1.0, smax)))
    null = vt[rank:].T
    coords = frame @ null
    matrix = coords @ coords.conj().T
    matrix.setflags(write=False)
    basis = tuple(Element.from_vec(shape, coords[:, j]) for j in range(coords.shape[1]))
    return FixedPointProjection(shape, matrix, basis)


def group_average_matrix(action: GroupAction) -> np.ndarray:
    """Exact average over a finite group, as a product of cyclic averages."""
    pres = action.presentation
    if not pres.is_finite:
        raise ValueError("group is infinite")
    dim = action.shape.dim
    out = np.eye(dim, dtype=complex)
    for g, m in zip(action.generators, pres.orders):
        acc = np.zeros((dim, dim), dtype=complex)
        power = np.eye(dim, dtype=complex)
        for _ in range(m):
            acc += power
            power = g.matrix @ power
        out = (acc / m) @ out
    return out


def iter_averages(action: GroupAction, schedule: FolnerSchedule, v: np.ndarray, k_max: int) -> Iterator[np.ndarray]:
    """Yield ``Avg_{F_k} v`` for ``k = 1..k_max``.

    ``v`` may be a flattened element or a matrix whose columns are flattened
    elements.  Interval and box schedules reuse running partial sums, so the
    total cost is linear in ``k_max``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    pres = action.presentation
    if schedule.presentation != pres:
        raise ValueError("schedule and action use different groups")
    if schedule.size(k_max) > schedule.cap:
        raise FolnerCapExceeded(f"|F_{k_max}| = {schedule.size(k_max)} exceeds the cap {schedule.cap}")
    if pres.is_finite:
        avg = group_average_matrix(action) @ v
        for _ in range(k_max):
            yield avg
        return
    gens = [g.matrix for g in action.generators]
    dim = action.shape.dim
    # last generator acts on v directly; the others are kept as operator sums
    last = gens[-1]
    cur = np.array(v, dtype=complex)
    partial = np.zeros_like(cur)
    op_sums = [np.zeros((dim, dim), dtype=complex) for _ in gens[:-1]]
    op_pows = [np.eye(dim, dtype=complex) for _ in gens[:-1]]
    for k in range(1, k_max + 1):
        partial = partial + cur
        cur = last @ cur
        out = partial / k
        for j in reversed(range(len(op_sums))):
            op_sums[j] += op_pows[j]
            op_pows[j] = gens[j] @ op_pows[j]
            out = (op_sums[j] / k) @ out
        yield out


def averaging_rate(action: GroupAction, ks) -> np.ndarray:
    """Bound on the norm of ``Avg_{F_k} - P`` restricted to the complement of the fixed space."""
    ks = np.asarray(list(ks), dtype=float)
    if action.presentation.is_finite:
        return np.zeros_like(ks)
    total = np.zeros_like(ks)
    for gap in _generator_gaps(action):
        if np.isfinite(gap):
            total += np.minimum(1.0, 2.0 / (ks * gap))
    return total


def _generator_gaps(action: GroupAction) -> list[float]:
    gaps = []
    for g in action.generators:
        mu = np.linalg.eigvals(g.matrix)
        dist = np.abs(1 - mu)
        moving = dist[dist > FIXED_EIG_TOL]
        gaps.append(float(moving.min()) if moving.size else np.inf)
    return gaps


def convergence_envelope(action: GroupAction, x: Element, ks, projection: FixedPointProjection | None = None) -> np.ndarray:
    """Upper bounds on ``||Avg_{F_k} x - P x||`` for the canonical schedule.

    Each generator ``T`` is unitary for the Hilbert-Schmidt product, so on the
    complement of its fixed space ``(1/k) sum_{j<k} T^j`` has norm at most
    ``min(1, 2 / (k * gap))`` with ``gap`` the distance from 1 to the rest of
    the spectrum.  Box averages telescope into a sum of such terms.  The
    bound is zero for finite groups, where every Følner set is the whole group.
    """
    rate = averaging_rate(action, ks)
    if not rate.any():
        return rate
    P = projection or fixed_point_projection(action)
    resid = float(np.linalg.norm(x.vec() - P.matrix @ x.vec()))
    return rate * resid


class AverageTerm(NamedTuple):
    k: int
    average: Element
    distance: float


class ErgodicAverageSequence:
    """Terms ``A_k = Avg_{F_k} x`` with diagnostics ``d_k = ||A_k - P x||``.

    Iterating produces the terms lazily; :meth:`terms` materializes them.
    """

    def __init__(self, action: GroupAction, schedule: FolnerSchedule, x: Element, k_max: int,
                 projection: FixedPointProjection | None = None):
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        self.action = action
        self.schedule = schedule
        self.x = x
        self.k_max = k_max
        self.projection = projection or fixed_point_projection(action)
        self.limit = self.projection(x)
        self._cache: list[AverageTerm] | None = None

    def __iter__(self) -> Iterator[AverageTerm]:
        if self._cache is not None:
            yield from self._cache
            return
        shape = self.action.shape
        for k, v in enumerate(iter_averages(self.action, self.schedule, self.x.vec(), self.k_max), start=1):
            a = Element.from_vec(shape, v)
            yield AverageTerm(k, a, operator_norm(a - self.limit))

    def terms(self) -> list[AverageTerm]:
        if self._cache is None:
            self._cache = list(iter(self))
        return self._cache

    def diagnostics(self) -> np.ndarray:
        return np.array([t.distance for t in self.terms()])


def average_sequence(action: GroupAction, schedule: FolnerSchedule, x: Element, k_max: int) -> ErgodicAverageSequence:
    return ErgodicAverageSequence(action, schedule, x, k_max)


def krylov_bogolyubov(action: GroupAction, phi: State, projection: FixedPointProjection | None = None) -> State:
    """The limit of ``phi o Avg_{F_k}``, which is ``phi o P``."""
    P = projection or fixed_point_projection(action)
    return P.dual(phi)
