"""
Bayes-optimal single-parameter estimation on an edge.

With a flat prior on [0, pi/2] and quadratic cost, the optimal measurement
follows from the risk moments

    W_k = int (2/pi) alpha^k rho(alpha) d alpha,     k = 0, 1, 2,

through the Hermitian solution ``Theta`` of ``Theta W_0 + W_0 Theta = 2 W_1``.
The eigenvectors of ``Theta`` form a projective measurement whose outcomes
are estimated by the corresponding eigenvalues, and the minimum average cost
is ``Tr(W_2 - Theta W_1)``.

When ``W_0`` is rank deficient the equation has a family of solutions.  The
components that touch the kernel of ``W_0`` do not enter the cost; they are
fixed to a deterministic admissible choice (pi/4 on the kernel, zero across).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import ProbeConfig, output_states_on_edge
from .errors import DomainError, InconsistentMomentsError, NumericalConsistencyError
from .gate_family import HALF_PI, EdgeSpec, get_edge

logger = logging.getLogger(__name__)

DEFAULT_NODES = 96
EPS_SINGULAR = 1e-10
EIG_RANGE_TOL = 1e-9
MERGE_TOL = 1e-9
RESIDUAL_TOL = 1e-9
PROB_TOL = 1e-9

PRIOR_DENSITY = 1 / HALF_PI
BLIND_ESTIMATE = np.pi / 4
PRIOR_VARIANCE = np.pi**2 / 48

__all__ = [
    "RiskMoments",
    "EstimatorSolution",
    "DiscretePovm",
    "quadrature_rule",
    "risk_moments",
    "solve_theta",
    "povm_from",
    "blind_povm",
    "average_cost",
    "min_cost",
    "sylvester_residual",
]


def hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().swapaxes(-1, -2)) / 2


@lru_cache(maxsize=16)
def _gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    alphas = (x + 1) * (HALF_PI / 2)
    weights = w * (HALF_PI / 2) * PRIOR_DENSITY
    alphas.setflags(write=False)
    weights.setflags(write=False)
    return alphas, weights


def quadrature_rule(nodes: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, pi/2] with weights that already include the prior.

    The weights sum to one.
    """
    if nodes < 1:
        raise DomainError(f"need at least one quadrature node, got {nodes}")
    return _gauss_legendre(int(nodes))


@dataclass(frozen=True)
class RiskMoments:
    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    edge: EdgeSpec
    probe: ProbeConfig
    quadrature_nodes: int
    kind: str = "standard"


@dataclass(frozen=True)
class DiscretePovm:
    """Finite POVM; ``outcomes`` pairs each estimate with its effect."""

    outcomes: tuple[tuple[float, np.ndarray], ...]

    @property
    def estimates(self) -> np.ndarray:
        return np.array([est for est, _ in self.outcomes])

    @property
    def effects(self) -> np.ndarray:
        return np.array([eff for _, eff in self.outcomes])

    def completeness_error(self) -> float:
        return float(np.abs(self.effects.sum(axis=0) - np.eye(self.effects.shape[-1])).max())

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        """Outcome probabilities ``Tr[Pi_i rho]``; ``rho`` may be a stack of states."""
        return np.einsum("kij,...ji->...k", self.effects, rho).real

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class EstimatorSolution:
    theta: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    min_cost: float
    solver_case: str
    residual: float
    moments: RiskMoments | None = field(default=None, repr=False, compare=False)


def risk_moments(
    edge: EdgeSpec | str,
    probe: ProbeConfig,
    nodes: int = DEFAULT_NODES,
    kind: str = "standard",
) -> RiskMoments:
    """Zeroth, first and second prior moments of the output state along ``edge``."""
    if nodes < 8:
        raise DomainError(f"risk moments need nodes >= 8, got {nodes}")
    edge = get_edge(edge)
    alphas, weights = quadrature_rule(nodes)
    rhos = output_states_on_edge(edge, alphas, probe, kind)
    w0, w1, w2 = (hermitize(np.einsum("n,nij->ij", weights * alphas**k, rhos)) for k in range(3))
    return RiskMoments(w0, w1, w2, edge, probe, int(nodes), kind)


def sylvester_residual(theta: np.ndarray, w0: np.ndarray, w1: np.ndarray, eps: float = EPS_SINGULAR) -> float:
    """Max-norm of ``Theta W0 + W0 Theta - 2 W1`` compressed to the support of ``W0``."""
    a, v = np.linalg.eigh(hermitize(w0))
    support = v[:, a > eps / 2]
    r = theta @ w0 + w0 @ theta - 2 * w1
    return float(np.abs(support.conj().T @ r @ support).max(initial=0.0))


def _kron_solve(w0: np.ndarray, w1: np.ndarray) -> np.ndarray:
    # (I (x) W0 + W0^T (x) I) vec(Theta) = 2 vec(W1), column-major vec
    n = w0.shape[0]
    eye = np.eye(n)
    coeff = np.kron(eye, w0) + np.kron(w0.T, eye)
    vec = np.linalg.solve(coeff, 2 * w1.reshape(-1, order="F"))
    return vec.reshape((n, n), order="F")


def solve_theta(m: RiskMoments, eps: float = EPS_SINGULAR) -> EstimatorSolution:
    """Minimising operator for the risk moments ``m``.

    Regular moments (every eigenvalue-pair sum of ``W0`` above ``eps``) are
    solved through the vectorised 16x16 linear system.  Otherwise the
    equation is solved componentwise in the eigenbasis of ``W0`` and the free
    components are set to pi/4 on the kernel diagonal block and zero across.

    Raises
    ------
    InconsistentMomentsError
        If ``W1`` has weight outside the support of ``W0``.
    NumericalConsistencyError
        If an eigenvalue of ``Theta`` falls outside [0, pi/2] or the residual
        exceeds its tolerance.
    """
    w0, w1, w2 = hermitize(m.w0), hermitize(m.w1), hermitize(m.w2)
    a, v = np.linalg.eigh(w0)
    pair = a[:, None] + a[None, :]

    if pair.min() > eps:
        theta = _kron_solve(w0, w1)
        case = "regular"
    else:
        case = "singular"
        w1t = v.conj().T @ w1 @ v
        solvable = pair > eps
        leak = np.abs(w1t[~solvable]).max(initial=0.0)
        if leak > eps:
            raise InconsistentMomentsError(
                f"W1 has weight {leak:.3e} on the kernel of W0 (eigenvalues {a})"
            )
        theta_t = np.zeros_like(w1t)
        theta_t[solvable] = 2 * w1t[solvable] / pair[solvable]
        kernel = a <= eps / 2
        theta_t[np.ix_(kernel, kernel)] = BLIND_ESTIMATE * np.eye(int(kernel.sum()))
        theta = v @ theta_t @ v.conj().T
    theta = hermitize(theta)

    evals, evecs = np.linalg.eigh(theta)
    if evals.min() < -EIG_RANGE_TOL or evals.max() > HALF_PI + EIG_RANGE_TOL:
        raise NumericalConsistencyError(
            f"estimates {evals} outside [0, pi/2] for edge {m.edge.id}, probe {m.probe}"
        )
    residual = sylvester_residual(theta, w0, w1, eps)
    if residual > RESIDUAL_TOL:
        raise NumericalConsistencyError(f"operator equation residual {residual:.3e}")
    cost = float(np.trace(w2 - theta @ w1).real)
    return EstimatorSolution(theta, evals, evecs, cost, case, residual, m)


def min_cost(
    edge: EdgeSpec | str,
    probe: ProbeConfig,
    nodes: int = DEFAULT_NODES,
    kind: str = "standard",
) -> float:
    """Bayes-optimal average cost for one edge and input configuration."""
    return solve_theta(risk_moments(edge, probe, nodes, kind)).min_cost


def povm_from(sol: EstimatorSolution, merge: bool = True, tol: float = MERGE_TOL) -> DiscretePovm:
    """Projective measurement on the eigenbasis of ``Theta``.

    With ``merge`` set, eigenvalues closer than ``tol`` share one outcome whose
    effect is the sum of their projectors.
    """
    outcomes: list[tuple[float, np.ndarray]] = []
    vals, vecs = sol.eigenvalues, sol.eigenvectors
    i = 0
    while i < len(vals):
        j = i + 1
        if merge:
            while j < len(vals) and vals[j] - vals[i] < tol:
                j += 1
        block = vecs[:, i:j]
        outcomes.append((float(np.mean(vals[i:j])), block @ block.conj().T))
        i = j
    return DiscretePovm(tuple(outcomes))


def blind_povm(dim: int = 4) -> DiscretePovm:
    """Trivial measurement that always reports the prior mean."""
    return DiscretePovm(((BLIND_ESTIMATE, np.eye(dim, dtype=complex)),))


def average_cost(
    povm: DiscretePovm,
    edge: EdgeSpec | str,
    probe: ProbeConfig,
    nodes: int = DEFAULT_NODES,
    kind: str = "standard",
) -> float:
    """Prior-averaged quadratic cost of ``povm`` by direct quadrature."""
    alphas, weights = quadrature_rule(nodes)
    probs = povm.probabilities(output_states_on_edge(edge, alphas, probe, kind))
    sq = (alphas[:, None] - povm.estimates[None, :]) ** 2
    return float(np.sum(weights[:, None] * sq * probs))
