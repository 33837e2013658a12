"""Small named systems shared by the tests."""

from __future__ import annotations

import numpy as np

from ncergo.algebra import AlgebraShape, Element, make_element
from ncergo.dynamics import Automorphism, GroupAction, GroupPresentation

GOLDEN_ANGLE = 2 * np.pi * (np.sqrt(5) - 1) / 2


def diag_element(*values) -> Element:
    shape = AlgebraShape((1,) * len(values))
    return make_element(shape, [[[v]] for v in values])


def cyclic_shift(n: int = 3, presentation: GroupPresentation | None = None) -> GroupAction:
    shape = AlgebraShape((1,) * n)
    perm = [(i + 1) % n for i in range(n)]
    pres = presentation or GroupPresentation.Z()
    return GroupAction(pres, (Automorphism.permutation(shape, perm),), shape)


def identity_action(block_dims=(1, 1)) -> GroupAction:
    return GroupAction.trivial(AlgebraShape(tuple(block_dims)))


def phase_m2(order: int = 4) -> GroupAction:
    """``Ad diag(1, i)`` on ``M_2``, declared with the given cyclic order."""
    shape = AlgebraShape((2,))
    return GroupAction(
        GroupPresentation.cyclic(order), (Automorphism.inner(shape, [np.diag([1, 1j])]),), shape
    )


def rotation_m2(theta: float = GOLDEN_ANGLE) -> GroupAction:
    shape = AlgebraShape((2,))
    u = np.diag([1, np.exp(1j * theta)])
    return GroupAction(GroupPresentation.Z(), (Automorphism.inner(shape, [u]),), shape)


def two_orbits(sizes=(3, 2)) -> GroupAction:
    """Disjoint cyclic shifts on ``C^{sizes[0]} + C^{sizes[1]} + ...``."""
    n = sum(sizes)
    perm = []
    start = 0
    for s in sizes:
        perm += [start + (i + 1) % s for i in range(s)]
        start += s
    shape = AlgebraShape((1,) * n)
    return GroupAction(GroupPresentation.Z(), (Automorphism.permutation(shape, perm),), shape)


def cyclic_plus_block(n: int = 3, extra_dim: int = 2) -> GroupAction:
    """Cyclic shift on ``C^n`` together with a fixed ``M_extra`` block."""
    shape = AlgebraShape((1,) * n + (extra_dim,))
    perm = [(i + 1) % n for i in range(n)] + [n]
    return GroupAction(GroupPresentation.Z(), (Automorphism.permutation(shape, perm),), shape)
