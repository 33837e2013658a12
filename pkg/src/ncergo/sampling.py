"""Seeded random systems, observables and states for property checks."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .algebra import AlgebraShape, Element, State
from .dynamics import Automorphism, GroupAction, GroupPresentation


def random_shape(rng: np.random.Generator, max_blocks: int = 3, max_dim: int = 4) -> AlgebraShape:
    nb = int(rng.integers(1, max_blocks + 1))
    return AlgebraShape(tuple(int(n) for n in rng.integers(1, max_dim + 1, size=nb)))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_block_permutation(rng: np.random.Generator, shape: AlgebraShape) -> list[int]:
    """A uniformly random permutation mixing only blocks of equal size."""
    perm = list(range(shape.num_blocks))
    by_dim: dict[int, list[int]] = {}
    for i, n in enumerate(shape.block_dims):
        by_dim.setdefault(n, []).append(i)
    for idx in by_dim.values():
        for i, p in zip(idx, rng.permutation(idx)):
            perm[i] = int(p)
    return perm


def random_automorphism(rng: np.random.Generator, shape: AlgebraShape) -> Automorphism:
    return Automorphism(
        shape, random_block_permutation(rng, shape), [haar_unitary(rng, n) for n in shape.block_dims]
    )


def _cyclic_permutation(rng, shape, order):
    """A size-compatible block permutation whose cycle lengths divide ``order``."""
    perm = list(range(shape.num_blocks))
    by_dim: dict[int, list[int]] = {}
    for i, n in enumerate(shape.block_dims):
        by_dim.setdefault(n, []).append(i)
    for idx in by_dim.values():
        idx = list(rng.permutation(idx))
        while idx:
            lengths = [L for L in range(1, len(idx) + 1) if order % L == 0]
            L = int(rng.choice(lengths))
            cyc, idx = idx[:L], idx[L:]
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                perm[int(a)] = int(b)
    return perm


def random_action(rng: np.random.Generator, kind: str | None = None, shape: AlgebraShape | None = None,
                  max_order: int = 6) -> GroupAction:
    """A random valid action of ``Z``, ``Z^2`` or a product of cyclic groups.

    ``Z^2`` and cyclic-product actions use inner parts built from one common
    eigenbasis per block and block permutations that are powers of a single
    permutation, so that the generators commute.
    """
    shape = shape or random_shape(rng)
    kind = kind or str(rng.choice(["Z", "Zd", "cyclic"]))
    if kind == "Z":
        return GroupAction(GroupPresentation.Z(), (random_automorphism(rng, shape),), shape)
    if kind == "Zd":
        pres = GroupPresentation.Zd(2)
        orders = None
    else:
        ng = int(rng.integers(1, 3))
        orders = tuple(int(m) for m in rng.integers(2, max_order + 1, size=ng))
        pres = GroupPresentation.cyclic(*orders)
    return GroupAction(pres, _commuting_generators(rng, shape, pres.num_generators, orders), shape)


def _commuting_generators(rng, shape, count, orders):
    """Commuting automorphisms; with ``orders``, generator ``j`` has order dividing ``orders[j]``.

    All generators share one block permutation power structure: generator
    ``j`` uses ``sigma^{e_j}`` with slot unitaries diagonal in a fixed
    cycle-compatible frame.
    """
    if orders is None:
        sigma = random_block_permutation(rng, shape)
        exps = [int(e) for e in rng.integers(0, 3, size=count)]
    else:
        from math import gcd

        g = 0
        for m in orders:
            g = gcd(g, m)
        sigma = _cyclic_permutation(rng, shape, g) if g > 1 else list(range(shape.num_blocks))
        exps = [int(rng.integers(0, g)) if g > 1 else 0 for _ in orders]
    frames = _cycle_frames(rng, shape, sigma)
    gens = []
    for j in range(count):
        perm = _perm_power(sigma, exps[j])
        us = []
        for s, n in enumerate(shape.block_dims):
            if orders is None:
                phases = np.exp(2j * np.pi * rng.random(n))
            else:
                phases = np.exp(2j * np.pi * rng.integers(0, orders[j], size=n) / orders[j])
            us.append(phases)
        gens.append(_diagonal_in_frames(shape, perm, frames, us, sigma))
    return tuple(gens)


def _perm_power(sigma, e):
    out = list(range(len(sigma)))
    for _ in range(e):
        out = [sigma[i] for i in out]
    return out


def _cycle_frames(rng, shape, sigma):
    """One Haar frame per block cycle of ``sigma``, shared by every block in the cycle."""
    frames = [None] * shape.num_blocks
    for i in range(shape.num_blocks):
        if frames[i] is not None:
            continue
        v = haar_unitary(rng, shape.block_dims[i])
        j = i
        while frames[j] is None:
            frames[j] = v
            j = sigma[j]
    return frames


def _diagonal_in_frames(shape, perm, frames, phases, sigma):
    """Automorphism moving blocks by ``perm`` and conjugating by ``V diag(phases) V^*``.

    Phases are made constant along cycles of ``sigma`` so that automorphisms
    built this way commute.
    """
    fixed = [None] * shape.num_blocks
    for i in range(shape.num_blocks):
        if fixed[i] is not None:
            continue
        j = i
        while fixed[j] is None:
            fixed[j] = phases[i]
            j = sigma[j]
    us = [(frames[s] * fixed[s]) @ frames[s].conj().T for s in range(shape.num_blocks)]
    return Automorphism(shape, perm, us)


def random_positive(rng: np.random.Generator, shape: AlgebraShape, rank: int | None = None) -> Element:
    blocks = []
    for n in shape.block_dims:
        r = n if rank is None else min(rank, n)
        g = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
        blocks.append(g @ g.conj().T / max(1, r))
    return Element(shape, blocks)


def random_self_adjoint(rng: np.random.Generator, shape: AlgebraShape) -> Element:
    blocks = []
    for n in shape.block_dims:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks.append((g + g.conj().T) / 2)
    return Element(shape, blocks)


def random_state(rng: np.random.Generator, shape: AlgebraShape, rank: int | None = None) -> State:
    rho = random_positive(rng, shape, rank)
    total = sum(np.trace(b).real for b in rho.blocks)
    return State.from_density(rho / total)
