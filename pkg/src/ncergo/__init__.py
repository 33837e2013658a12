"""Ergodic optimization for finite-dimensional C*-dynamical systems."""

from .algebra import (
    AlgebraShape,
    Element,
    SelfAdjointFunctional,
    State,
    evaluate,
    jordan_decompose,
    make_element,
    max_eigenvalue,
    operator_norm,
)
from .averaging import (
    average_sequence,
    convergence_envelope,
    fixed_point_projection,
    krylov_bogolyubov,
)
from .dynamics import (
    Automorphism,
    FolnerSchedule,
    GroupAction,
    GroupPresentation,
    enumerate_folner,
    folner_defect,
    validate_action,
)
from .models import BlockHomomorphism, WStarModel, annihilator_state, model_check, quotient_system
from .optimization import (
    Annihilator,
    FiniteHull,
    InvariantStates,
    InvariantTracialStates,
    exposing_observable,
    fixed_algebra_analysis,
    gauge,
    herman_check,
    homomorphism_optimization_identity,
    jenkinson_extrema,
    m_value,
    unique_ergodicity,
)

__all__ = [
    "AlgebraShape",
    "Element",
    "SelfAdjointFunctional",
    "State",
    "evaluate",
    "jordan_decompose",
    "make_element",
    "max_eigenvalue",
    "operator_norm",
    "average_sequence",
    "convergence_envelope",
    "fixed_point_projection",
    "krylov_bogolyubov",
    "Automorphism",
    "FolnerSchedule",
    "GroupAction",
    "GroupPresentation",
    "enumerate_folner",
    "folner_defect",
    "validate_action",
    "BlockHomomorphism",
    "WStarModel",
    "annihilator_state",
    "model_check",
    "quotient_system",
    "Annihilator",
    "FiniteHull",
    "InvariantStates",
    "InvariantTracialStates",
    "exposing_observable",
    "fixed_algebra_analysis",
    "gauge",
    "herman_check",
    "homomorphism_optimization_identity",
    "jenkinson_extrema",
    "m_value",
    "unique_ergodicity",
]

__version__ = "0.1.0"
