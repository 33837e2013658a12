"""Group actions on block algebras and their Følner schedules.

Every *-automorphism of a block algebra is a permutation of equal-sized
blocks followed by conjugation with a unitary in each slot.  An
:class:`Automorphism` stores exactly that data: block ``i`` is moved to slot
``perm[i]`` and conjugated there by ``unitaries[perm[i]]``.

Supported phase groups are ``Z``, ``Z^d`` and finite products of cyclic
groups.  Group elements ("words") are tuples of generator exponents.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import prod
from typing import Iterator, Sequence

import numpy as np

from .algebra import AlgebraShape, Element, operator_norm
from .errors import DimensionMismatch, FolnerCapExceeded, IdealError, InvalidWord

TOL_RELATION = 1e-9
FOLNER_CAP = 10**7

Word = tuple[int, ...]


class Automorphism:
    """Block permutation composed with slotwise unitary conjugation."""

    __slots__ = ("shape", "perm", "unitaries", "__dict__")

    def __init__(self, shape: AlgebraShape, perm: Sequence[int], unitaries: Sequence[np.ndarray]):
        perm = tuple(int(p) for p in perm)
        if sorted(perm) != list(range(shape.num_blocks)):
            raise DimensionMismatch(
                f"permutation {list(perm)} is not a permutation of {shape.num_blocks} blocks"
            )
        if len(unitaries) != shape.num_blocks:
            raise DimensionMismatch(
                f"expected {shape.num_blocks} unitaries, got {len(unitaries)}"
            )
        us = []
        for j, (u, n) in enumerate(zip(unitaries, shape.block_dims)):
            u = np.array(np.atleast_2d(u), dtype=complex)
            if u.shape != (n, n):
                raise DimensionMismatch(f"unitary {j} has shape {u.shape}, expected ({n}, {n})")
            u.setflags(write=False)
            us.append(u)
        self.shape = shape
        self.perm = perm
        self.unitaries = tuple(us)

    @classmethod
    def identity(cls, shape: AlgebraShape) -> Automorphism:
        return cls(shape, range(shape.num_blocks), [np.eye(n) for n in shape.block_dims])

    @classmethod
    def inner(cls, shape: AlgebraShape, unitaries: Sequence[np.ndarray]) -> Automorphism:
        """``Ad_u`` with ``u`` given blockwise."""
        return cls(shape, range(shape.num_blocks), unitaries)

    @classmethod
    def permutation(cls, shape: AlgebraShape, perm: Sequence[int]) -> Automorphism:
        return cls(shape, perm, [np.eye(n) for n in shape.block_dims])

    def size_compatible(self) -> bool:
        dims = self.shape.block_dims
        return all(dims[p] == dims[i] for i, p in enumerate(self.perm))

    def _require_compatible(self):
        if not self.size_compatible():
            raise DimensionMismatch("permutation moves a block into a slot of different size")

    def __call__(self, x: Element) -> Element:
        return self.apply(x)

    def apply(self, x: Element) -> Element:
        if x.shape != self.shape:
            raise DimensionMismatch(
                f"shape mismatch: {x.shape.block_dims} vs {self.shape.block_dims}"
            )
        self._require_compatible()
        out = [None] * self.shape.num_blocks
        for i, p in enumerate(self.perm):
            u = self.unitaries[p]
            out[p] = u @ x.blocks[i] @ u.conj().T
        return Element(self.shape, out)

    def inverse(self) -> Automorphism:
        self._require_compatible()
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        # x_i = u_{p}^* y_p u_p  with p = perm[i]
        us = [self.unitaries[self.perm[i]].conj().T for i in range(len(self.perm))]
        return Automorphism(self.shape, inv, us)

    def compose(self, other: Automorphism) -> Automorphism:
        """``self o other``: apply ``other`` first."""
        self._require_compatible()
        other._require_compatible()
        perm = [self.perm[other.perm[i]] for i in range(len(self.perm))]
        inv_self = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv_self[p] = i
        us = [
            self.unitaries[j] @ other.unitaries[inv_self[j]]
            for j in range(len(self.perm))
        ]
        return Automorphism(self.shape, perm, us)

    def power(self, n: int) -> Automorphism:
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = Automorphism.identity(self.shape)
        while n:
            if n & 1:
                result = base.compose(result)
            base = base.compose(base)
            n >>= 1
        return result

    @cached_property
    def matrix(self) -> np.ndarray:
        """The induced linear map on flattened elements."""
        self._require_compatible()
        shape = self.shape
        m = np.zeros((shape.dim, shape.dim), dtype=complex)
        for i, p in enumerate(self.perm):
            u = self.unitaries[p]
            m[shape.block_slice(p), shape.block_slice(i)] = np.kron(u, u.conj())
        m.setflags(write=False)
        return m

    def unitarity_defect(self) -> list[float]:
        return [float(np.max(np.abs(u @ u.conj().T - np.eye(len(u))), initial=0.0)) for u in self.unitaries]


@dataclass(frozen=True)
class GroupPresentation:
    """``Z``, ``Z^d`` or ``Z_{m_1} x ... x Z_{m_r}``."""

    kind: str
    d: int = 1
    orders: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "Z":
            object.__setattr__(self, "d", 1)
        elif self.kind == "Zd":
            if self.d < 1:
                raise ValueError("Zd needs d >= 1")
        elif self.kind == "CyclicProduct":
            orders = tuple(int(m) for m in self.orders)
            if not orders or any(m < 1 for m in orders):
                raise ValueError(f"cyclic orders must be positive, got {orders}")
            object.__setattr__(self, "orders", orders)
            object.__setattr__(self, "d", len(orders))
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @classmethod
    def Z(cls) -> GroupPresentation:
        return cls("Z")

    @classmethod
    def Zd(cls, d: int) -> GroupPresentation:
        return cls("Zd", d=d)

    @classmethod
    def cyclic(cls, *orders: int) -> GroupPresentation:
        return cls("CyclicProduct", orders=tuple(orders))

    @property
    def num_generators(self) -> int:
        return self.d

    @property
    def is_finite(self) -> bool:
        return self.kind == "CyclicProduct"

    @property
    def order(self) -> int | None:
        return prod(self.orders) if self.is_finite else None

    def normalize(self, word) -> Word:
        if isinstance(word, (int, np.integer)):
            word = (int(word),)
        try:
            word = tuple(int(n) for n in word)
        except TypeError as exc:
            raise InvalidWord(f"word {word!r} is not a sequence of integers") from exc
        if len(word) != self.num_generators:
            raise InvalidWord(f"word {word} has {len(word)} exponents, group has {self.num_generators} generators")
        if self.is_finite:
            word = tuple(n % m for n, m in zip(word, self.orders))
        return word

    def generator_word(self, j: int) -> Word:
        return tuple(1 if i == j else 0 for i in range(self.num_generators))


@dataclass(frozen=True)
class GroupAction:
    presentation: GroupPresentation
    generators: tuple[Automorphism, ...]
    shape: AlgebraShape = field(default=None)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if len(gens) != self.presentation.num_generators:
            raise InvalidWord(
                f"{self.presentation.kind} needs {self.presentation.num_generators} generators, got {len(gens)}"
            )
        shape = self.shape if self.shape is not None else gens[0].shape
        object.__setattr__(self, "shape", shape)
        for j, g in enumerate(gens):
            if g.shape != shape:
                raise DimensionMismatch(f"generator {j} acts on a different algebra")

    @classmethod
    def trivial(cls, shape: AlgebraShape, presentation: GroupPresentation | None = None) -> GroupAction:
        pres = presentation or GroupPresentation.Z()
        return cls(pres, tuple(Automorphism.identity(shape) for _ in range(pres.num_generators)), shape)

    def automorphism(self, word) -> Automorphism:
        word = self.presentation.normalize(word)
        out = Automorphism.identity(self.shape)
        for g, n in zip(self.generators, word):
            out = g.power(n).compose(out)
        return out

    def matrix(self, word) -> np.ndarray:
        word = self.presentation.normalize(word)
        m = np.eye(self.shape.dim, dtype=complex)
        for g, n in zip(self.generators, word):
            base = g.matrix if n >= 0 else g.inverse().matrix
            m = np.linalg.matrix_power(base, abs(n)) @ m
        return m

    def apply(self, word, x: Element) -> Element:
        if x.shape != self.shape:
            raise DimensionMismatch(
                f"shape mismatch: {x.shape.block_dims} vs {self.shape.block_dims}"
            )
        return Element.from_vec(self.shape, self.matrix(word) @ x.vec())

    def block_orbits(self) -> list[tuple[int, ...]]:
        """Orbits of blocks under the group generated by the block permutations."""
        parent = list(range(self.shape.num_blocks))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for g in self.generators:
            for i, p in enumerate(g.perm):
                a, b = find(i), find(p)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: dict[int, list[int]] = {}
        for i in range(self.shape.num_blocks):
            groups.setdefault(find(i), []).append(i)
        return [tuple(v) for _, v in sorted(groups.items())]


def apply(theta: Automorphism | GroupAction, x: Element, word=None) -> Element:
    """Apply an automorphism, or the image of ``word`` under an action."""
    if isinstance(theta, GroupAction):
        if word is None:
            raise InvalidWord("a group action needs a word")
        return theta.apply(word, x)
    return theta.apply(x)


def check_ideal(action: GroupAction, ideal) -> tuple[int, ...]:
    """Normalize a block subset and check it is a proper invariant ideal.

    Two-sided ideals of a block algebra are exactly the sums of blocks; the
    ideal is invariant when every generator permutes its blocks among
    themselves.
    """
    blocks = tuple(sorted({int(i) for i in ideal}))
    nb = action.shape.num_blocks
    for i in blocks:
        if not 0 <= i < nb:
            raise IdealError(f"block index {i} out of range for {nb} blocks")
    if len(blocks) == nb:
        raise IdealError("ideal is the whole algebra; no state vanishes on it")
    members = set(blocks)
    for j, g in enumerate(action.generators):
        for i in blocks:
            if g.perm[i] not in members:
                raise IdealError(
                    f"ideal is not invariant: generator {j} moves block {i} to block {g.perm[i]}"
                )
    return blocks


@dataclass
class ActionValidation:
    valid: bool
    max_violation: float
    violations: list[str]

    def __bool__(self):
        return self.valid


def _max_image_norm(shape: AlgebraShape, m: np.ndarray) -> float:
    """``max_e ||m(e)||`` over matrix units ``e``."""
    return max(
        (operator_norm(Element.from_vec(shape, m[:, c])) for c in range(shape.dim)),
        default=0.0,
    )


def validate_action(action: GroupAction, tol: float = TOL_RELATION) -> ActionValidation:
    """Check unitarity, block-size compatibility and the presentation's relations."""
    shape = action.shape
    violations: list[str] = []
    worst = 0.0
    dims = shape.block_dims
    structural = False
    for j, g in enumerate(action.generators):
        for i, p in enumerate(g.perm):
            if dims[p] != dims[i]:
                violations.append(
                    f"generator {j}: permutation moves block {i} (dim {dims[i]}) to slot {p} (dim {dims[p]})"
                )
                worst = float("inf")
                structural = True
        for b, dev in enumerate(g.unitarity_defect()):
            worst = max(worst, dev)
            if dev > tol:
                violations.append(
                    f"generator {j}: unitary for block {b} is not unitary (deviation {dev:.3g})"
                )
                structural = True
    if not structural:
        pres = action.presentation
        mats = [g.matrix for g in action.generators]
        eye = np.eye(shape.dim)
        if pres.kind in ("Zd", "CyclicProduct"):
            for a, b in itertools.combinations(range(len(mats)), 2):
                dev = _max_image_norm(shape, mats[a] @ mats[b] - mats[b] @ mats[a])
                worst = max(worst, dev)
                if dev > tol:
                    violations.append(
                        f"generators {a} and {b} do not commute (violation {dev:.3g})"
                    )
        if pres.is_finite:
            for j, (m, order) in enumerate(zip(mats, pres.orders)):
                dev = _max_image_norm(shape, np.linalg.matrix_power(m, order) - eye)
                worst = max(worst, dev)
                if dev > tol:
                    violations.append(
                        f"generator {j}: relation g^{order} = 1 fails (violation {dev:.3g})"
                    )
    return ActionValidation(not violations, worst, violations)


@dataclass(frozen=True)
class FolnerSchedule:
    """Canonical Følner sets: intervals for ``Z``, boxes for ``Z^d``, the whole group otherwise."""

    presentation: GroupPresentation
    cap: int = FOLNER_CAP

    def size(self, k: int) -> int:
        if k < 1:
            raise ValueError("k must be >= 1")
        pres = self.presentation
        if pres.is_finite:
            return pres.order
        return k ** pres.d

    def ranges(self, k: int) -> list[range]:
        pres = self.presentation
        if pres.is_finite:
            return [range(m) for m in pres.orders]
        return [range(k)] * pres.d

    def words(self, k: int) -> Iterator[Word]:
        return itertools.product(*self.ranges(k))

    def defect(self, k: int, word) -> Fraction:
        return folner_defect(self, k, word)


def folner_defect(schedule: FolnerSchedule, k: int, word) -> Fraction:
    """Exact ``|F_k g  symmetric-difference  F_k| / |F_k|``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pres = schedule.presentation
    word = pres.normalize(word)
    if pres.is_finite:
        return Fraction(0)
    overlap = prod(max(k - abs(n), 0) for n in word)
    size = k ** pres.d
    return Fraction(2 * (size - overlap), size)


def enumerate_folner(schedule: FolnerSchedule, k: int, cap: int | None = None) -> list[Word]:
    cap = schedule.cap if cap is None else cap
    n = schedule.size(k)
    if n > cap:
        raise FolnerCapExceeded(f"|F_{k}| = {n} exceeds the cap {cap}")
    return list(schedule.words(k))
