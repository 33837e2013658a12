"""Ergodic optimization over sets of invariant states.

The central closed form: invariant states are exactly the states ``psi o P``
with ``P`` the fixed-point projection, so

    m(a | invariant states) = sup_psi psi(P a) = largest eigenvalue of P a.

The gauge ``lim ||Avg_{F_k} a||`` is computed alongside as an independent
numerical witness of the same number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .algebra import (
    TOL_COMPARE,
    Element,
    State,
    commutator_norm,
    eigh_desc,
    evaluate,
    is_positive,
    max_eigenvalue,
    min_eigenvalue,
    operator_norm,
    spectral_data,
    spectral_projection,
)
from .averaging import (
    FixedPointProjection,
    averaging_rate,
    convergence_envelope,
    fixed_point_projection,
    iter_averages,
)
from .dynamics import FolnerSchedule, GroupAction, check_ideal, folner_defect
from .errors import NotAbelian, NotPositive, NotSelfAdjoint, NumericalFailure

SINGLETON_TOL = 1e-8
SEMINORM_TOL = 1e-6
SUBADDITIVITY_TOL = 1e-10


# -- state sets -------------------------------------------------------------

@dataclass(frozen=True)
class InvariantStates:
    pass


@dataclass(frozen=True)
class InvariantTracialStates:
    pass


@dataclass(frozen=True)
class Annihilator:
    """Invariant states vanishing on the ideal spanned by ``ideal`` blocks."""

    ideal: tuple[int, ...]


@dataclass(frozen=True)
class FiniteHull:
    """Convex hull of finitely many states, not necessarily invariant."""

    states: tuple[State, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ValueError("a finite hull needs at least one state")


StateSetDescriptor = Union[InvariantStates, InvariantTracialStates, Annihilator, FiniteHull]


@dataclass
class Face:
    """Description of the set of maximizing states.

    ``projector`` is the spectral projection onto the top eigenspace of
    ``P a`` (for the spectral cases); ``vertex_weights`` lists, for the
    polytope cases, which vertices attain the maximum.
    """

    kind: str
    projector: Element | None = None
    multiplicity: int | None = None
    vertex_weights: tuple[float, ...] | None = None


@dataclass
class OptimizationReport:
    value: float
    face: Face
    certificate: State


def _require_self_adjoint(a: Element):
    if not a.is_self_adjoint():
        raise NotSelfAdjoint("observable must be self-adjoint")


def _top_face(Pa: Element, blocks: Sequence[int] | None = None, tol: float = 1e-9):
    pairs = spectral_data(Pa)
    if blocks is not None:
        allowed = set(blocks)
        pairs = [p for p in pairs if p.block in allowed]
    top = pairs[0]
    scale = max(1.0, abs(top.value))
    proj_blocks = []
    mult = 0
    for i, b in enumerate(Pa.blocks):
        if blocks is not None and i not in allowed:
            proj_blocks.append(np.zeros_like(b))
            continue
        w, v = eigh_desc(b)
        sel = v[:, w >= top.value - tol * scale]
        mult += sel.shape[1]
        proj_blocks.append(sel @ sel.conj().T)
    return top, Element(Pa.shape, proj_blocks), mult


def m_value(action: GroupAction, a: Element, states: StateSetDescriptor = InvariantStates(),
            projection: FixedPointProjection | None = None) -> OptimizationReport:
    """``sup psi(a)`` over the described set of invariant states."""
    _require_self_adjoint(a)
    shape = action.shape
    P = projection or fixed_point_projection(action)

    if isinstance(states, InvariantStates):
        Pa = P(a)
        top, proj, mult = _top_face(Pa)
        cert = P.dual(State.vector_state(shape, top.block, top.vector))
        return OptimizationReport(top.value, Face("spectral", proj, mult), cert)

    if isinstance(states, Annihilator):
        ideal = check_ideal(action, states.ideal)
        keep = [i for i in range(shape.num_blocks) if i not in ideal]
        Pa = P(a)
        top, proj, mult = _top_face(Pa, keep)
        cert = P.dual(State.vector_state(shape, top.block, top.vector))
        return OptimizationReport(top.value, Face("spectral", proj, mult), cert)

    if isinstance(states, InvariantTracialStates):
        orbits = action.block_orbits()
        vals = [
            float(np.mean([np.trace(a.blocks[i]).real / shape.block_dims[i] for i in orb]))
            for orb in orbits
        ]
        best = int(np.argmax(vals))
        weights = np.zeros(shape.num_blocks)
        weights[list(orbits[best])] = 1 / len(orbits[best])
        tol = TOL_COMPARE * max(1.0, abs(vals[best]))
        attaining = tuple(1.0 if v >= vals[best] - tol else 0.0 for v in vals)
        return OptimizationReport(
            vals[best], Face("orbit", vertex_weights=attaining), State.tracial(shape, weights)
        )

    if isinstance(states, FiniteHull):
        images = [P.dual(phi) for phi in states.states]
        vals = [evaluate(psi, a).real for psi in images]
        best = int(np.argmax(vals))
        tol = TOL_COMPARE * max(1.0, abs(vals[best]))
        attaining = tuple(1.0 if v >= vals[best] - tol else 0.0 for v in vals)
        return OptimizationReport(vals[best], Face("hull", vertex_weights=attaining), images[best])

    raise TypeError(f"unknown state set {states!r}")


# -- gauge ------------------------------------------------------------------

@dataclass
class GaugeReport:
    """The sequence ``gamma_k = ||Avg_{F_k} a||`` and what it converges to.

    ``limit`` is the closed-form value ``lambda_max(P a)``; ``estimate`` is read
    off the sequence alone (the infimum for ``Z``, the last term otherwise).
    ``envelope`` bounds ``|gamma_k - limit|`` via the spectral gaps of the
    generators; ``folner_bound`` is the cruder ``2 ||a|| sum_g defect(k, g)``.
    """

    gammas: np.ndarray
    defects: np.ndarray
    distances: np.ndarray
    limit: float
    estimate: float
    m: float
    infimum: float
    subadditive: bool | None
    subadditivity_violation: float | None
    envelope: np.ndarray
    envelope_ok: bool
    folner_bound: np.ndarray
    folner_bound_ok: bool

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, len(self.gammas) + 1)


def subadditivity_violation(values: np.ndarray, n_max: int | None = None) -> float:
    """``max (s_{k+l} - s_k - s_l)`` over ``k + l <= n_max`` for ``s_k = values[k-1]``."""
    s = np.asarray(values, dtype=float)
    n_max = len(s) if n_max is None else min(n_max, len(s))
    worst = -np.inf
    for n in range(2, n_max + 1):
        k = np.arange(1, n)
        worst = max(worst, float(np.max(s[n - 1] - s[k - 1] - s[n - k - 1])))
    return worst if np.isfinite(worst) else 0.0


def gauge(action: GroupAction, schedule: FolnerSchedule, a: Element, k_max: int = 1024,
          projection: FixedPointProjection | None = None) -> GaugeReport:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if not is_positive(a):
        raise NotPositive("the gauge is defined for positive elements only")
    shape = action.shape
    P = projection or fixed_point_projection(action)
    Pa = P(a)
    limit = max_eigenvalue(Pa)
    gammas = np.empty(k_max)
    dists = np.empty(k_max)
    for k, v in enumerate(iter_averages(action, schedule, a.vec(), k_max)):
        avg = Element.from_vec(shape, v)
        gammas[k] = operator_norm(avg)
        dists[k] = operator_norm(avg - Pa)
    ks = np.arange(1, k_max + 1)
    gens = [action.presentation.generator_word(j) for j in range(action.presentation.num_generators)]
    defect_sums = np.array([sum(float(folner_defect(schedule, k, g)) for g in gens) for k in ks])
    defect_max = np.array([max(float(folner_defect(schedule, k, g)) for g in gens) for k in ks])

    pres = action.presentation
    if pres.kind == "Z":
        viol = subadditivity_violation(ks * gammas)
        subadd = viol <= SUBADDITIVITY_TOL
        estimate = float(gammas.min())
    else:
        viol, subadd = None, None
        estimate = float(gammas[-1])
    envelope = convergence_envelope(action, a, ks, P)
    dev = np.abs(gammas - limit)
    num = 1e-10 * max(1.0, operator_norm(a))
    folner_bound = 2 * operator_norm(a) * defect_sums
    m = m_value(action, a, InvariantStates(), P).value
    return GaugeReport(
        gammas=gammas,
        defects=defect_max,
        distances=dists,
        limit=limit,
        estimate=estimate,
        m=m,
        infimum=float(gammas.min()),
        subadditive=subadd,
        subadditivity_violation=viol,
        envelope=envelope,
        envelope_ok=bool(np.all(dev <= envelope + num)),
        folner_bound=folner_bound,
        folner_bound_ok=bool(np.all(dev <= folner_bound + num)),
    )


# -- unique ergodicity ------------------------------------------------------

@dataclass
class UniqueErgodicityReport:
    unique: bool
    strict: bool
    fixed_dimension: int
    invariant_state: State | None = None
    residuals: dict[int, float] = field(default_factory=dict)
    envelopes: dict[int, float] = field(default_factory=dict)
    averages_converge: bool | None = None


def unique_ergodicity(action: GroupAction, schedule: FolnerSchedule | None = None,
                      sample_ks: Sequence[int] = (64, 256, 1024),
                      projection: FixedPointProjection | None = None) -> UniqueErgodicityReport:
    """Unique and strict ergodicity from the rank of ``P``.

    When unique, also checks that ``Avg_{F_k} x`` approaches ``phi(x) 1`` on
    every matrix unit ``x`` at the sampled ``k``, within the spectral-gap
    envelope.
    """
    shape = action.shape
    P = projection or fixed_point_projection(action)
    if P.rank != 1:
        return UniqueErgodicityReport(False, False, P.rank)
    phi = P.dual(State.maximally_mixed(shape))
    strict = phi.is_faithful(1e-10)
    schedule = schedule or FolnerSchedule(action.presentation)
    ks = sorted(set(int(k) for k in sample_ks))
    eye = np.eye(shape.dim, dtype=complex)
    rate = dict(zip(ks, averaging_rate(action, ks)))
    resid_norms = np.linalg.norm(eye - P.matrix, axis=0)
    residuals, envelopes = {}, {}
    ok = True
    if ks:
        for k, M in enumerate(iter_averages(action, schedule, eye, ks[-1]), start=1):
            if k not in rate:
                continue
            worst, worst_env = 0.0, 0.0
            for b in range(shape.dim):
                diff = Element.from_vec(shape, M[:, b] - P.matrix[:, b])
                r = operator_norm(diff)
                e = rate[k] * resid_norms[b]
                ok &= r <= e + 1e-9
                worst = max(worst, r)
                worst_env = max(worst_env, e)
            residuals[k], envelopes[k] = worst, worst_env
    return UniqueErgodicityReport(True, strict, 1, phi, residuals, envelopes, bool(ok))


# -- Herman and Jenkinson ---------------------------------------------------

@dataclass
class HermanReport:
    interval: tuple[float, float]
    lam: float
    spectrum_singleton: bool
    seminorm_sequence: np.ndarray
    envelope: np.ndarray
    seminorm_converges: bool

    @property
    def consistent(self) -> bool:
        return self.spectrum_singleton == self.seminorm_converges


def herman_check(action: GroupAction, schedule: FolnerSchedule, states: FiniteHull | InvariantStates,
                 x: Element, lam: float | None = None, k_max: int = 1024,
                 projection: FixedPointProjection | None = None) -> HermanReport:
    """Compare the limiting values of ``x`` with convergence of ``||Avg_{F_k} x - lam||_S``.

    With ``S`` a finite hull, the limit states are the images of the hull under
    ``P``, so ``x`` takes values in ``[min_j phi_j(P x), max_j phi_j(P x)]``.
    With ``S`` all states the interval is the spectrum range of ``P x``.

    Convergence is judged on the last quarter of the sequence: ``s_k`` minus
    the spectral-gap envelope (a bound on ``|s_k - lim s_k|``) must fall below
    ``1e-6 * max(1, ||x||)``.
    """
    _require_self_adjoint(x)
    shape = action.shape
    P = projection or fixed_point_projection(action)
    Px = P(x)
    scale = max(1.0, operator_norm(x))
    hull = isinstance(states, FiniteHull)
    if hull:
        vals = [evaluate(phi, Px).real for phi in states.states]
        lo, hi = min(vals), max(vals)
        default_lam = vals[0]
    elif isinstance(states, InvariantStates):
        lo, hi = min_eigenvalue(Px), max_eigenvalue(Px)
        default_lam = evaluate(P.dual(State.maximally_mixed(shape)), x).real
    else:
        raise TypeError("herman_check takes a FiniteHull or InvariantStates (all states)")
    lam = default_lam if lam is None else float(lam)
    singleton = max(abs(lo - lam), abs(hi - lam)) <= SINGLETON_TOL * scale

    seminorm = np.empty(k_max)
    for k, v in enumerate(iter_averages(action, schedule, x.vec(), k_max)):
        avg = Element.from_vec(shape, v)
        if hull:
            seminorm[k] = max(abs(evaluate(phi, avg) - lam) for phi in states.states)
        else:
            seminorm[k] = operator_norm(avg - lam)
    ks = np.arange(1, k_max + 1)
    envelope = convergence_envelope(action, x, ks, P)
    window = slice(k_max - max(1, k_max // 4), k_max)
    converges = bool(np.all(seminorm[window] - envelope[window] <= SEMINORM_TOL * scale))
    return HermanReport((lo, hi), lam, singleton, seminorm, envelope, converges)


@dataclass
class JenkinsonReport:
    a_upper: float
    a_lower: float
    d_upper: np.ndarray
    d_lower: np.ndarray

    @property
    def consistent(self) -> bool:
        tol = 1e-10 * max(1.0, abs(self.a_upper), abs(self.a_lower))
        return (abs(self.a_upper - self.d_upper[-1]) <= tol
                and abs(self.a_lower - self.d_lower[-1]) <= tol)


def is_invariant_state(action: GroupAction, phi: State, tol: float = 1e-9) -> bool:
    # phi(T x) = dens_t . T vec(x), so invariance means dens_t T = dens_t
    dens_t = np.concatenate([b.T.ravel() for b in phi.densities])
    return all(np.max(np.abs(dens_t @ g.matrix - dens_t)) <= tol for g in action.generators)


def jenkinson_extrema(action: GroupAction, schedule: FolnerSchedule, states: FiniteHull | Sequence[State],
                      x: Element, k_max: int = 1024) -> JenkinsonReport:
    """Extremal limit values of ``x`` versus limits of extremal averages, over an invariant hull."""
    _require_self_adjoint(x)
    vertices = states.states if isinstance(states, FiniteHull) else tuple(states)
    if not vertices:
        raise ValueError("need at least one vertex")
    for j, phi in enumerate(vertices):
        if not is_invariant_state(action, phi):
            raise ValueError(f"vertex {j} is not an invariant state")
    vals = [evaluate(phi, x).real for phi in vertices]
    shape = action.shape
    up = np.empty(k_max)
    down = np.empty(k_max)
    for k, v in enumerate(iter_averages(action, schedule, x.vec(), k_max)):
        avg = Element.from_vec(shape, v)
        seq = [evaluate(phi, avg).real for phi in vertices]
        up[k], down[k] = max(seq), min(seq)
    return JenkinsonReport(max(vals), min(vals), up, down)


# -- fixed algebra, simplices and exposing observables ----------------------

@dataclass
class FixedAlgebraReport:
    dimension: int
    abelian: bool
    basis: tuple[Element, ...]
    minimal_projections: list[Element] | None = None


def _projection_key(p: Element):
    v = p.vec()
    nz = np.flatnonzero(np.abs(v) > 1e-9)
    first = int(nz[0]) if nz.size else len(v)
    return (first, tuple(np.round(-np.abs(v), 9)))


def _minimal_projections(P: FixedPointProjection, seeds=range(10)) -> list[Element]:
    shape = P.shape
    r = P.rank
    for seed in seeds:
        rng = np.random.default_rng(seed)
        coef = rng.uniform(1.0, 2.0, size=r)
        h = sum((c * b for c, b in zip(coef, P.basis)), shape.zero())
        pairs = spectral_data(h)
        scale = max(1.0, max(abs(p.value) for p in pairs))
        clusters: list[list] = []
        for p in pairs:
            if clusters and abs(clusters[-1][0].value - p.value) <= 1e-7 * scale:
                clusters[-1].append(p)
            else:
                clusters.append([p])
        if len(clusters) != r:
            continue
        projs = []
        for cl in clusters:
            blocks = [np.zeros((n, n), dtype=complex) for n in shape.block_dims]
            for p in cl:
                blocks[p.block] += np.outer(p.vector, p.vector.conj())
            projs.append(Element(shape, blocks))
        if all(P(q).allclose(q, 1e-7) for q in projs):
            return sorted(projs, key=_projection_key)
    raise NumericalFailure("could not separate the minimal projections of the fixed algebra")


def fixed_algebra_analysis(action: GroupAction, projection: FixedPointProjection | None = None) -> FixedAlgebraReport:
    P = projection or fixed_point_projection(action)
    basis = P.basis
    abelian = all(
        commutator_norm(basis[i], basis[j]) <= 1e-9
        for i in range(len(basis)) for j in range(i + 1, len(basis))
    )
    mins = _minimal_projections(P) if abelian else None
    return FixedAlgebraReport(len(basis), abelian, basis, mins)


@dataclass
class ExposingReport:
    observable: Element
    value: float
    multiplicity: int
    face_dimension: int
    maximizing_state: State

    @property
    def unique(self) -> bool:
        return self.face_dimension == 0


def maximizing_face_dimension(P: FixedPointProjection, projector: Element) -> int:
    """Affine dimension of the invariant states supported under ``projector``.

    Such states have densities ``P(rho)`` with ``rho`` living in the corner
    ``q A q``; the dimension is the rank of ``P`` on that corner, minus one.
    """
    shape = P.shape
    cols = []
    for i, b in enumerate(projector.blocks):
        w, v = eigh_desc(b)
        rng = v[:, w > 0.5]
        n = rng.shape[1]
        for j in range(n):
            for k in range(n):
                blocks = [np.zeros((m, m), dtype=complex) for m in shape.block_dims]
                blocks[i] = np.outer(rng[:, j], rng[:, k].conj())
                cols.append(P.matrix @ Element(shape, blocks).vec())
    if not cols:
        return -1
    s = np.linalg.svd(np.column_stack(cols), compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0])) - 1


def exposing_observable(action: GroupAction, extreme_index: int,
                        projection: FixedPointProjection | None = None) -> ExposingReport:
    """Observable whose only maximizing invariant state is the chosen extreme state.

    Requires an abelian fixed algebra, so that the invariant states form a
    simplex whose vertices match the minimal fixed projections ``p_j``.  The
    observable is ``p_j`` itself and the vertex is the state with density
    ``p_j / trace(p_j)``.
    """
    P = projection or fixed_point_projection(action)
    report = fixed_algebra_analysis(action, P)
    if not report.abelian:
        raise NotAbelian("fixed-point algebra is not abelian; invariant states need not form a simplex")
    p = report.minimal_projections[extreme_index]
    Pp = P(p)
    top, proj, mult = _top_face(Pp)
    rank = round(sum(np.trace(b).real for b in p.blocks))
    state = State.from_density(p / rank)
    return ExposingReport(p, top.value, mult, maximizing_face_dimension(P, proj), state)


def gauge_witness(action: GroupAction, phi: State,
                  projection: FixedPointProjection | None = None) -> Element | None:
    """A positive ``a`` with ``Gamma(a) != phi(a)``, or ``None`` when ``phi`` is the only invariant state.

    With an abelian fixed algebra the witness is an exposing observable of a
    vertex other than ``phi``.  Otherwise any fixed projection ``q`` with
    ``phi(q) < 1`` serves, since ``Gamma(q) = 1``.
    """
    P = projection or fixed_point_projection(action)
    if P.rank == 1:
        return None
    report = fixed_algebra_analysis(action, P)
    if report.abelian:
        candidates = report.minimal_projections
    else:
        candidates = []
        for b in P.basis:
            pairs = spectral_data(b)
            hi = pairs[0].value
            candidates.append(spectral_projection(b, hi - 1e-7 * max(1.0, abs(hi))))
    best = min(candidates, key=lambda q: evaluate(phi, q).real)
    if evaluate(phi, best).real >= 1 - 1e-9:
        raise NumericalFailure("no witness found although the invariant state is not unique")
    return best


# -- *-homomorphisms ----------------------------------------------------------

@dataclass
class HomomorphismIdentityReport:
    quotient_value: float
    annihilator_value: float
    quotient_gauge: float | None

    @property
    def consistent(self) -> bool:
        vals = [self.quotient_value, self.annihilator_value]
        if self.quotient_gauge is not None:
            vals.append(self.quotient_gauge)
        return max(vals) - min(vals) <= TOL_COMPARE


def homomorphism_optimization_identity(action: GroupAction, quotient: Sequence[int], a: Element,
                                       k_max: int = 64) -> HomomorphismIdentityReport:
    """Compare optimization on a quotient system with optimization over the annihilator of the kernel.

    ``quotient`` lists the blocks that survive; the kernel is spanned by the
    rest.  The quotient gauge is included when ``a`` is positive.
    """
    from .models import quotient_system

    _require_self_adjoint(a)
    keep = set(int(i) for i in quotient)
    ideal = tuple(i for i in range(action.shape.num_blocks) if i not in keep)
    q_action, pi = quotient_system(action, ideal)
    qa = pi(a)
    q_P = fixed_point_projection(q_action)
    q_val = m_value(q_action, qa, InvariantStates(), q_P).value
    ann_val = m_value(action, a, Annihilator(ideal)).value
    g = None
    if is_positive(a):
        g = gauge(q_action, FolnerSchedule(q_action.presentation), qa, k_max, q_P).limit
    return HomomorphismIdentityReport(q_val, ann_val, g)
