"""Equivariant *-homomorphisms, quotients by invariant ideals and models.

A unital *-homomorphism between block algebras sends each target block
either to zero or to a unitary conjugate of one source block of the same
size.  Its kernel is the sum of the source blocks that are never used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraShape, Element, State, is_central
from .averaging import fixed_point_projection, krylov_bogolyubov
from .dynamics import Automorphism, GroupAction, check_ideal
from .errors import DimensionMismatch

HOM_TOL = 1e-10


class BlockHomomorphism:
    """``pi(x)_t = u_t x_{s(t)} u_t^*`` for each target block ``t``.

    ``assignment[t]`` is ``(s, u)`` or ``(None, None)`` when block ``t``
    receives zero.
    """

    def __init__(self, source: AlgebraShape, target: AlgebraShape, assignment: Sequence):
        if len(assignment) != target.num_blocks:
            raise DimensionMismatch(
                f"need one assignment per target block ({target.num_blocks}), got {len(assignment)}"
            )
        norm = []
        for t, (s, u) in enumerate(assignment):
            n = target.block_dims[t]
            if s is None:
                norm.append((None, None))
                continue
            s = int(s)
            if not 0 <= s < source.num_blocks:
                raise DimensionMismatch(f"target block {t}: source block {s} out of range")
            if source.block_dims[s] != n:
                raise DimensionMismatch(
                    f"target block {t} (dim {n}) cannot receive source block {s} (dim {source.block_dims[s]})"
                )
            u = np.eye(n, dtype=complex) if u is None else np.array(u, dtype=complex)
            if u.shape != (n, n):
                raise DimensionMismatch(f"target block {t}: unitary has shape {u.shape}")
            norm.append((s, u))
        self.source = source
        self.target = target
        self.assignment = tuple(norm)

    @classmethod
    def identity(cls, shape: AlgebraShape) -> BlockHomomorphism:
        return cls(shape, shape, [(i, None) for i in range(shape.num_blocks)])

    @classmethod
    def block_projection(cls, source: AlgebraShape, keep: Sequence[int]) -> BlockHomomorphism:
        keep = list(keep)
        target = AlgebraShape(tuple(source.block_dims[i] for i in keep))
        return cls(source, target, [(i, None) for i in keep])

    def __call__(self, x: Element) -> Element:
        return self.apply(x)

    def apply(self, x: Element) -> Element:
        if x.shape != self.source:
            raise DimensionMismatch("element does not live on the source algebra")
        out = []
        for t, (s, u) in enumerate(self.assignment):
            n = self.target.block_dims[t]
            out.append(np.zeros((n, n), dtype=complex) if s is None else u @ x.blocks[s] @ u.conj().T)
        return Element(self.target, out)

    @property
    def kernel(self) -> tuple[int, ...]:
        used = {s for s, _ in self.assignment if s is not None}
        return tuple(i for i in range(self.source.num_blocks) if i not in used)

    @property
    def injective(self) -> bool:
        return not self.kernel

    @property
    def unital(self) -> bool:
        return all(s is not None for s, _ in self.assignment)

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.target.dim, self.source.dim), dtype=complex)
        for t, (s, u) in enumerate(self.assignment):
            if s is not None:
                m[self.target.block_slice(t), self.source.block_slice(s)] = np.kron(u, u.conj())
        return m

    def pullback(self, phi: State) -> State:
        """The state ``phi o pi`` on the source; needs ``pi`` unital."""
        if phi.shape != self.target:
            raise DimensionMismatch("state does not live on the target algebra")
        if not self.unital:
            raise ValueError("pullback of a state through a non-unital map is not a state")
        dens = [np.zeros((n, n), dtype=complex) for n in self.source.block_dims]
        for t, (s, u) in enumerate(self.assignment):
            dens[s] += u.conj().T @ phi.densities[t] @ u
        return State(self.source, dens)

    def pushforward(self, phi: State, tol: float = 1e-9) -> State:
        """The state ``psi`` on the target with ``psi o pi = phi``.

        Defined when every non-kernel source block feeds exactly one target
        block and ``phi`` vanishes on the kernel.
        """
        if phi.shape != self.source:
            raise DimensionMismatch("state does not live on the source algebra")
        uses: dict[int, int] = {}
        for s, _ in self.assignment:
            if s is not None:
                uses[s] = uses.get(s, 0) + 1
        if any(c > 1 for c in uses.values()):
            raise ValueError("a source block feeds several target blocks; pushforward is not unique")
        for i in self.kernel:
            if abs(np.trace(phi.densities[i])) > tol:
                raise ValueError(f"state does not vanish on kernel block {i}")
        dens = []
        for t, (s, u) in enumerate(self.assignment):
            n = self.target.block_dims[t]
            dens.append(np.zeros((n, n), dtype=complex) if s is None else u @ phi.densities[s] @ u.conj().T)
        return State(self.target, dens)

    def homomorphism_defect(self) -> float:
        """Largest violation of multiplicativity, *-preservation and unitality over matrix units."""
        basis = self.source.basis()
        worst = 0.0
        images = [self.apply(e) for e in basis]
        for e, pe in zip(basis, images):
            worst = max(worst, float(np.max(np.abs((self.apply(e.H) - pe.H).vec()))))
        for i, e in enumerate(basis):
            for j, f in enumerate(basis):
                d = self.apply(e @ f) - images[i] @ images[j]
                worst = max(worst, float(np.max(np.abs(d.vec()))))
        if self.unital:
            d = self.apply(self.source.unit()) - self.target.unit()
            worst = max(worst, float(np.max(np.abs(d.vec()))))
        return worst

    def equivariance_defect(self, source_action: GroupAction, target_action: GroupAction) -> list[float]:
        """Per generator, ``max |Xi_g pi(e) - pi(Theta_g e)|`` over matrix units ``e``."""
        if source_action.presentation != target_action.presentation:
            raise ValueError("actions use different groups")
        M = self.matrix
        return [
            float(np.max(np.abs(xi.matrix @ M - M @ th.matrix), initial=0.0))
            for th, xi in zip(source_action.generators, target_action.generators)
        ]


def quotient_system(action: GroupAction, ideal) -> tuple[GroupAction, BlockHomomorphism]:
    """The action induced on the blocks outside an invariant ideal, and the quotient map."""
    ideal = check_ideal(action, ideal)
    keep = [i for i in range(action.shape.num_blocks) if i not in ideal]
    pi = BlockHomomorphism.block_projection(action.shape, keep)
    new_index = {b: t for t, b in enumerate(keep)}
    gens = []
    for g in action.generators:
        perm = [new_index[g.perm[b]] for b in keep]
        gens.append(Automorphism(pi.target, perm, [g.unitaries[b] for b in keep]))
    return GroupAction(action.presentation, tuple(gens), pi.target), pi


def annihilator_state(action: GroupAction, ideal) -> State:
    """An invariant state vanishing on the ideal: the quotient's averaged maximally mixed state, pulled back."""
    q_action, pi = quotient_system(action, ideal)
    psi = krylov_bogolyubov(q_action, State.maximally_mixed(q_action.shape))
    return pi.pullback(psi)


@dataclass
class WStarModel:
    """A finite-dimensional model: ``iota`` maps the source system into a target system carrying ``rho``."""

    source: GroupAction
    target: GroupAction
    rho: State
    iota: BlockHomomorphism


@dataclass
class ModelReport:
    violations: list[str]
    equivariant: bool
    image_invariant: bool
    dense: bool
    rho_invariant: bool
    rho_faithful: bool
    rho_tracial: bool
    gamma_checks: list[tuple[float, float]] = field(default_factory=list)
    unique: bool = False
    strict: bool = False
    witness: Element | None = None
    repaired: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations


def _rank(cols: list[np.ndarray], tol: float = 1e-9) -> int:
    if not cols:
        return 0
    s = np.linalg.svd(np.column_stack(cols), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _orthonormal_span(cols: list[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    u, s, _ = np.linalg.svd(np.column_stack(cols), full_matrices=False)
    return u[:, s > tol * max(1.0, s[0])]


def generated_dimension(target_action: GroupAction, generators: list[Element]) -> int:
    """Dimension of the *-algebra generated by ``generators`` and all their translates."""
    shape = target_action.shape
    cols = [shape.unit().vec()] + [g.vec() for g in generators] + [g.H.vec() for g in generators]
    span = _orthonormal_span(cols)
    while True:
        elems = [Element.from_vec(shape, span[:, j]) for j in range(span.shape[1])]
        new = list(span.T)
        for g in target_action.generators:
            new += [g.matrix @ c for c in span.T]
            new += [g.inverse().matrix @ c for c in span.T]
        for x in elems:
            for y in elems:
                new.append((x @ y).vec())
        grown = _orthonormal_span(new)
        if grown.shape[1] == span.shape[1]:
            return span.shape[1]
        span = grown


def model_check(model: WStarModel, positives: Sequence[Element] | None = None,
                repair: bool = False) -> ModelReport:
    """Check the model axioms and the identity ``Gamma(iota(a)) = m(a | Ann(ker iota))``.

    With ``repair``, a non-injective ``iota`` is first factored through the
    quotient by its kernel; otherwise the kernel is only reported.
    """
    from .optimization import Annihilator, InvariantStates, gauge_witness, m_value

    src, tgt, rho, iota = model.source, model.target, model.rho, model.iota
    violations: list[str] = []
    repaired = False
    if iota.source != src.shape or iota.target != tgt.shape:
        raise DimensionMismatch("model map does not match the source and target algebras")
    if rho.shape != tgt.shape:
        raise DimensionMismatch("distinguished state does not live on the target algebra")

    hd = iota.homomorphism_defect()
    if hd > HOM_TOL:
        violations.append(f"iota is not a *-homomorphism (defect {hd:.3g})")
    if not iota.unital:
        violations.append("iota is not unital")

    eq = iota.equivariance_defect(src, tgt)
    equivariant = all(d <= HOM_TOL for d in eq)
    for j, d in enumerate(eq):
        if d > HOM_TOL:
            violations.append(f"generator {j}: iota is not equivariant (defect {d:.3g})")

    images = [iota(e) for e in src.shape.basis()]
    base_rank = _rank([x.vec() for x in images])
    image_invariant = True
    for j, g in enumerate(tgt.generators):
        moved = [g.matrix @ x.vec() for x in images]
        if _rank([x.vec() for x in images] + moved) != base_rank:
            image_invariant = False
            violations.append(f"generator {j}: image of iota is not invariant")

    dense = generated_dimension(tgt, images) == tgt.shape.dim
    if not dense:
        violations.append("image of iota does not generate the target algebra")

    rho_t = np.concatenate([b.T.ravel() for b in rho.densities])
    rho_invariant = True
    for j, g in enumerate(tgt.generators):
        if np.max(np.abs(rho_t @ g.matrix - rho_t)) > 1e-9:
            rho_invariant = False
            violations.append(f"generator {j}: distinguished state is not invariant")
    rho_faithful = rho.is_faithful(1e-10)
    rho_tracial = is_central(rho.density)

    if iota.kernel and repair:
        q_src, pi = quotient_system(src, iota.kernel)
        keep = [i for i in range(src.shape.num_blocks) if i not in iota.kernel]
        pos = {b: t for t, b in enumerate(keep)}
        iota = BlockHomomorphism(
            q_src.shape, tgt.shape,
            [(None, None) if s is None else (pos[s], u) for s, u in iota.assignment],
        )
        positives = None if positives is None else [pi(a) for a in positives]
        src = q_src
        repaired = True

    report = ModelReport(
        violations, equivariant, image_invariant, dense, rho_invariant, rho_faithful, rho_tracial,
        repaired=repaired,
    )
    if not (equivariant and iota.unital and hd <= HOM_TOL):
        return report

    if positives is None:
        positives = _positive_battery(src.shape)
    P_tgt = fixed_point_projection(tgt)
    P_src = fixed_point_projection(src)
    ann = Annihilator(iota.kernel) if iota.kernel else InvariantStates()
    for a in positives:
        gamma = m_value(tgt, iota(a), InvariantStates(), P_tgt).value
        m = m_value(src, a, ann, P_src).value
        report.gamma_checks.append((gamma, m))
        if abs(gamma - m) > 1e-8:
            violations.append(f"Gamma(iota(a)) = {gamma!r} differs from m(a | Ann(ker iota)) = {m!r}")

    report.unique = P_src.rank == 1
    if rho_invariant:
        phi = iota.pullback(rho)
        report.strict = report.unique and phi.is_faithful(1e-10)
        if not report.unique:
            report.witness = gauge_witness(src, phi, P_src)
    return report


def _positive_battery(shape: AlgebraShape) -> list[Element]:
    """Diagonal matrix units, the unit and a few fixed-seed random positives."""
    out = [e for e in shape.basis() if e.is_self_adjoint()]
    out.append(shape.unit())
    rng = np.random.default_rng(0)
    for _ in range(3):
        blocks = []
        for n in shape.block_dims:
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            blocks.append(g @ g.conj().T)
        out.append(Element(shape, blocks))
    return out

