"""
Monte Carlo simulation of the full estimation protocol.

Each trial draws ``alpha`` from the flat prior, prepares the output state,
samples an outcome of the POVM and scores the squared error of the reported
estimate.  The empirical mean is an estimate of the average cost that does
not share any discretisation with the quadrature used by the analytic path.

Random numbers come from numpy's PCG64.  Trials are cut into fixed-size
blocks and block ``k`` draws from ``PCG64(seed).jumped(k)``, so every block
has its own non-overlapping stream and the result does not depend on how
blocks are distributed over worker processes.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .bayes import PROB_TOL, DiscretePovm, average_cost
from .channel import ProbeConfig, output_states_on_edge
from .errors import DomainError, NumericalConsistencyError
from .gate_family import HALF_PI, EdgeSpec, get_edge

BLOCK_SIZE = 65_536

__all__ = ["McReport", "simulate_protocol", "empirical_vs_analytic", "sample_outcomes", "block_generator"]


@dataclass(frozen=True)
class McReport:
    edge: str
    probe: ProbeConfig
    povm_source: str
    trials: int
    empirical_cost: float
    standard_error: float
    seed: int
    kind: str = "standard"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["probe"] = asdict(self.probe)
        return d


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Generator for trial block ``block``; streams are 2**127 draws apart."""
    return np.random.Generator(np.random.PCG64(seed).jumped(block))


def _normalised_probabilities(probs: np.ndarray) -> np.ndarray:
    total = probs.sum(axis=-1)
    worst = max(np.abs(total - 1).max(initial=0.0), -probs.min(initial=0.0), probs.max(initial=0.0) - 1)
    if worst > PROB_TOL:
        raise NumericalConsistencyError(f"outcome probabilities off by {worst:.3e}")
    probs = np.clip(probs, 0.0, 1.0)
    return probs / probs.sum(axis=-1, keepdims=True)


def sample_outcomes(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of ``probs`` by inverse-CDF sampling."""
    probs = _normalised_probabilities(np.atleast_2d(probs))
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[0])
    idx = (u[:, None] >= cdf).sum(axis=-1)
    return np.minimum(idx, probs.shape[-1] - 1)


def _run_block(args) -> tuple[int, float, float]:
    edge_id, probe, estimates, effects, kind, seed, block, n = args
    rng = block_generator(seed, block)
    alphas = rng.uniform(0.0, HALF_PI, n)
    rhos = output_states_on_edge(edge_id, alphas, probe, kind)
    probs = np.einsum("kij,nji->nk", effects, rhos).real
    outcome = sample_outcomes(probs, rng)
    err = (alphas - estimates[outcome]) ** 2
    mean = float(err.mean())
    return n, mean, float(((err - mean) ** 2).sum())


def _combine(parts):
    # pairwise (Chan et al.) merge of block means and centred sums of squares
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        delta = mb - mean
        tot = n + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def simulate_protocol(
    edge: EdgeSpec | str,
    probe: ProbeConfig,
    povm: DiscretePovm,
    trials: int,
    seed: int = 0,
    povm_source: str = "optimal",
    kind: str = "standard",
    workers: int = 1,
) -> McReport:
    """Empirical average cost of ``povm`` over ``trials`` simulated rounds."""
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if povm.completeness_error() > 1e-10:
        raise NumericalConsistencyError(f"POVM incomplete (error {povm.completeness_error():.3e})")
    edge = get_edge(edge)
    seed = int(seed) & (2**64 - 1)
    blocks = [(k, min(BLOCK_SIZE, trials - k * BLOCK_SIZE)) for k in range(-(-trials // BLOCK_SIZE))]
    jobs = [(edge.id, probe, povm.estimates, povm.effects, kind, seed, k, n) for k, n in blocks]
    if workers <= 1:
        parts = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    n, mean, m2 = _combine(parts)
    std = np.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    return McReport(edge.id, probe, povm_source, trials, mean, float(std / np.sqrt(n)), seed, kind)


def empirical_vs_analytic(
    edge: EdgeSpec | str,
    probe: ProbeConfig,
    povm: DiscretePovm,
    trials: int,
    seed: int = 0,
    analytic: float | None = None,
    kind: str = "standard",
    workers: int = 1,
) -> float:
    """z-score of the simulated cost against the quadrature value (or ``analytic`` if given)."""
    report = simulate_protocol(edge, probe, povm, trials, seed, kind=kind, workers=workers)
    if analytic is None:
        analytic = average_cost(povm, edge, probe, kind=kind)
    if report.standard_error == 0.0:
        return 0.0 if report.empirical_cost == analytic else float("inf")
    return abs(report.empirical_cost - analytic) / report.standard_error
