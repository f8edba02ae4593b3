"""Bayesian estimation of two-qubit interactions through environment-assisted channels."""

__version__ = "0.1.0"

from .bayes import (
    DiscretePovm,
    EstimatorSolution,
    RiskMoments,
    average_cost,
    blind_povm,
    min_cost,
    povm_from,
    risk_moments,
    solve_theta,
)
from .channel import (
    ProbeConfig,
    flipped_probe_state,
    output_state_bruteforce,
    output_state_closed_form,
    probe_state,
)
from .errors import ClassificationError, DomainError, InconsistentMomentsError, NumericalConsistencyError
from .gate_family import (
    EDGES,
    CanonicalParams,
    EdgeSpec,
    edge_point,
    eigenphases,
    get_edge,
    magic_basis,
    unitary_canonical,
    unitary_spectral,
)
from .mc_verify import McReport, empirical_vs_analytic, simulate_protocol
from .probe_opt import GridSpec, OptimizationReport, Strategy, classify_strategy, cost_landscape, optimize_probe, verify_flipped_input
