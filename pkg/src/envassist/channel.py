"""
Output states of the environment-assisted channel.

The probe qubit A may be entangled with a reference R, and a helper prepares
the environment qubit E.  After the system-environment unitary acts on A and
E, the environment output is discarded and the measured state lives on R and
the system output B.

Two independent routes give the 4x4 output state:

* :func:`output_state_bruteforce` applies ``I_R (x) U_AE`` to the 8-vector and
  takes the partial trace explicitly;
* :func:`output_state_closed_form` evaluates the closed-form matrix entries.

Eight-dimensional vectors use the lexicographic ``|r a e>`` ordering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalConsistencyError
from .gate_family import CanonicalParams, EdgeSpec, _canonical_batch, get_edge, unitary_canonical

TWO_PI = 2 * np.pi
PSD_TOL = 1e-10

__all__ = [
    "ProbeConfig",
    "probe_state",
    "flipped_probe_state",
    "input_state",
    "output_state_bruteforce",
    "output_state_closed_form",
    "output_states_on_edge",
    "check_density_matrix",
]

INPUT_KINDS = ("standard", "flipped")


@dataclass(frozen=True)
class ProbeConfig:
    """Input-state parameters.

    ``x`` is the Schmidt weight of the probe-reference pair, ``t`` the weight
    of ``|0_E>`` in the environment state, ``phi1``/``phi2`` the relative
    phases.
    """

    x: float
    t: float
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        for name in ("x", "t"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name}={v!r} outside [0, 1]")
        for name in ("phi1", "phi2"):
            v = getattr(self, name)
            if not 0.0 <= v <= TWO_PI:
                raise DomainError(f"{name}={v!r} outside [0, 2pi]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.t, self.phi1, self.phi2)

    @classmethod
    def clipped(cls, x, t, phi1=0.0, phi2=0.0) -> "ProbeConfig":
        """Build a config, clamping ``x``, ``t`` to [0, 1] and wrapping phases."""
        return cls(
            float(np.clip(x, 0.0, 1.0)),
            float(np.clip(t, 0.0, 1.0)),
            float(np.mod(phi1, TWO_PI)),
            float(np.mod(phi2, TWO_PI)),
        )


def _environment(c: ProbeConfig) -> np.ndarray:
    return np.array([np.sqrt(c.t), np.exp(1j * c.phi2) * np.sqrt(1 - c.t)])


def probe_state(c: ProbeConfig) -> np.ndarray:
    """``(sqrt(x)|00> + e^{i phi1} sqrt(1-x)|11>)_RA (x) (sqrt(t)|0> + e^{i phi2} sqrt(1-t)|1>)_E``."""
    ra = np.zeros(4, dtype=complex)
    ra[0] = np.sqrt(c.x)
    ra[3] = np.exp(1j * c.phi1) * np.sqrt(1 - c.x)
    return np.kron(ra, _environment(c))


def flipped_probe_state(c: ProbeConfig) -> np.ndarray:
    """Same as :func:`probe_state` with the probe correlated as ``|0_R 1_A>, |1_R 0_A>``."""
    ra = np.zeros(4, dtype=complex)
    ra[1] = np.sqrt(c.x)
    ra[2] = np.exp(1j * c.phi1) * np.sqrt(1 - c.x)
    return np.kron(ra, _environment(c))


def input_state(c: ProbeConfig, kind: str = "standard") -> np.ndarray:
    if kind == "standard":
        return probe_state(c)
    if kind == "flipped":
        return flipped_probe_state(c)
    raise DomainError(f"unknown input kind {kind!r}; expected one of {INPUT_KINDS}")


def _apply_and_trace(unitaries: np.ndarray, psi: np.ndarray) -> np.ndarray:
    # psi[r, a, e] -> out[..., r, b, f] = sum_{a,e} U[..., (b f), (a e)] psi[r, a, e]
    psi = np.asarray(psi, dtype=complex).reshape(2, 4)
    out = np.einsum("...ij,rj->...ri", unitaries, psi)
    out = out.reshape(out.shape[:-2] + (2, 2, 2))
    # rho[(r b), (r' b')] = sum_f out[r b f] conj(out[r' b' f])
    rho = np.einsum("...rbf,...scf->...rbsc", out, out.conj())
    return rho.reshape(rho.shape[:-4] + (4, 4))


def output_state_bruteforce(p: CanonicalParams, psi: np.ndarray) -> np.ndarray:
    """Output state from the explicit dilation and partial trace over the environment output."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (8,):
        raise DomainError(f"expected an 8-vector, got shape {psi.shape}")
    full = np.kron(np.eye(2), unitary_canonical(p)) @ psi
    rho = np.outer(full, full.conj())
    # slots (r, b, f) on both sides; trace the last one
    return np.einsum("rbfscf->rbsc", rho.reshape(2, 2, 2, 2, 2, 2)).reshape(4, 4)


def _closed_form_batch(ax, ay, az, c: ProbeConfig) -> np.ndarray:
    ax, ay, az = np.broadcast_arrays(
        np.asarray(ax, dtype=float), np.asarray(ay, dtype=float), np.asarray(az, dtype=float)
    )
    x, t, p1, p2 = c.as_tuple()
    xi = np.cos(ax) * np.cos(ay)
    zeta = np.sin(ax) * np.sin(ay)
    st = np.sqrt((1 - t) * t)
    sx = np.sqrt((1 - x) * x)
    rot = np.cos(az) + 1j * (1 - 2 * t) * np.sin(az)

    s1 = st * x * (np.sin(ay) * np.sin(az + p2) + 1j * np.sin(ax) * np.cos(az + p2))
    s2 = (
        0.5j * st * sx * np.exp(-1j * (p1 + p2))
        * (np.sin(ax - ay) + np.exp(2j * p2) * np.sin(ax + ay))
    )
    s3 = 0.5 * np.exp(-1j * p1) * sx * (np.cos(ax) + np.cos(ay)) * rot
    s4 = 0.5 * np.exp(-1j * p1) * sx * (np.cos(ay) - np.cos(ax)) * rot
    s5 = -1j * st * (1 - x) * (np.sin(ax) * np.cos(az - p2) + 1j * np.sin(ay) * np.sin(az - p2))

    rho = np.empty(ax.shape + (4, 4), dtype=complex)
    rho[..., 0, 0] = x / 2 * (1 + (2 * t - 1) * zeta + xi)
    rho[..., 1, 1] = x / 2 * (1 - (2 * t - 1) * zeta - xi)
    rho[..., 2, 2] = (x - 1) / 2 * (xi + (1 - 2 * t) * zeta - 1)
    rho[..., 3, 3] = (x - 1) / 2 * (-xi - (1 - 2 * t) * zeta - 1)
    upper = {(0, 1): s1, (0, 2): s2, (0, 3): s3, (1, 2): s4, (1, 3): -s2, (2, 3): s5}
    for (i, j), v in upper.items():
        rho[..., i, j] = v
        rho[..., j, i] = np.conj(v)
    return rho


def output_state_closed_form(p: CanonicalParams, c: ProbeConfig) -> np.ndarray:
    """Closed-form output state for the standard probe of :func:`probe_state`."""
    if not isinstance(p, CanonicalParams):
        p = CanonicalParams(*p)
    return _closed_form_batch(*p.as_tuple(), c)


def output_states_on_edge(
    edge: EdgeSpec | str, alphas, c: ProbeConfig, kind: str = "standard"
) -> np.ndarray:
    """Stack of output states ``rho(alpha)`` for every value in ``alphas``.

    The standard probe uses the closed form; the flipped probe has no closed
    form and goes through the dilation.
    """
    edge = get_edge(edge)
    alphas = np.asarray(alphas, dtype=float)
    angles = edge.angles(alphas)
    if kind == "standard":
        return _closed_form_batch(*angles, c)
    return _apply_and_trace(_canonical_batch(*angles), input_state(c, kind))


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12, psd_tol: float = PSD_TOL) -> None:
    """Raise ``NumericalConsistencyError`` unless ``rho`` is a valid density matrix."""
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol:
        raise NumericalConsistencyError(f"state not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise NumericalConsistencyError(f"state trace {tr!r} != 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < -psd_tol:
        raise NumericalConsistencyError(f"state has negative eigenvalue {lo:.3e}")
