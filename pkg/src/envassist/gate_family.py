"""
Canonical family of entangling two-qubit unitaries.

Every two-qubit unitary is, up to local unitaries, fixed by a point
``(alpha_x, alpha_y, alpha_z)`` of the Weyl tetrahedron

    pi/2 >= alpha_x >= alpha_y >= alpha_z >= 0 .

The unitary is diagonal in the magic basis with eigenphases that are linear
in the three angles.  Two constructions are provided, the spectral sum over
magic-basis projectors and the explicit 4x4 matrix, and the test-suite
checks that they agree.

Basis ordering is ``|0_A 0_E>, |0_A 1_E>, |1_A 0_E>, |1_A 1_E>`` with the
system qubit A first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

HALF_PI = np.pi / 2
BOUNDARY_TOL = 1e-12

__all__ = [
    "CanonicalParams",
    "EdgeSpec",
    "EDGES",
    "VERTICES",
    "magic_basis",
    "eigenphases",
    "unitary_spectral",
    "unitary_canonical",
    "edge_point",
    "edge_unitaries",
    "get_edge",
    "in_tetrahedron",
]


def in_tetrahedron(ax: float, ay: float, az: float, tol: float = BOUNDARY_TOL) -> bool:
    return (HALF_PI + tol >= ax) and (ax + tol >= ay) and (ay + tol >= az) and (az >= -tol)


@dataclass(frozen=True)
class CanonicalParams:
    """Point of the Weyl tetrahedron (angles in radians)."""

    alpha_x: float
    alpha_y: float
    alpha_z: float

    def __post_init__(self):
        if not in_tetrahedron(self.alpha_x, self.alpha_y, self.alpha_z):
            raise DomainError(
                "parameters outside the Weyl tetrahedron: "
                f"({self.alpha_x!r}, {self.alpha_y!r}, {self.alpha_z!r})"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha_x, self.alpha_y, self.alpha_z)


# Named vertices of the tetrahedron.
VERTICES = {
    "identity": (0.0, 0.0, 0.0),
    "CNOT": (HALF_PI, 0.0, 0.0),
    "DCNOT": (HALF_PI, HALF_PI, 0.0),
    "SWAP": (HALF_PI, HALF_PI, HALF_PI),
}


def _vertex_name(point: tuple[float, float, float]) -> str:
    for name, v in VERTICES.items():
        if np.allclose(point, v, atol=BOUNDARY_TOL):
            return name
    raise KeyError(point)


@dataclass(frozen=True)
class EdgeSpec:
    """One edge of the tetrahedron, parametrised by a single angle in [0, pi/2].

    ``angles`` maps a scalar or an array of free-parameter values to the
    three canonical angles (broadcast arrays); ``map`` wraps a scalar value
    into a validated :class:`CanonicalParams`.
    """

    id: str
    angles: Callable[[np.ndarray], tuple]
    description: str
    free_parameter_range: tuple[float, float] = (0.0, HALF_PI)

    def map(self, alpha: float) -> CanonicalParams:
        return edge_point(self, alpha)

    @property
    def endpoints(self) -> tuple[str, str]:
        lo, hi = self.free_parameter_range
        start = tuple(float(v) for v in np.broadcast_arrays(*self.angles(lo)))
        stop = tuple(float(v) for v in np.broadcast_arrays(*self.angles(hi)))
        return _vertex_name(start), _vertex_name(stop)

    def __str__(self) -> str:
        return self.id


def _const(value, like):
    return np.full_like(np.asarray(like, dtype=float), value)


EDGES: dict[str, EdgeSpec] = {
    "E1": EdgeSpec(
        "E1",
        lambda a: (_const(HALF_PI, a), _const(HALF_PI, a), np.asarray(a, dtype=float)),
        "alpha_x = pi/2, alpha_y = pi/2, alpha_z = alpha",
    ),
    "E2": EdgeSpec(
        "E2",
        lambda a: (np.asarray(a, dtype=float), _const(0.0, a), _const(0.0, a)),
        "alpha_x = alpha, alpha_y = 0, alpha_z = 0",
    ),
    "E3": EdgeSpec(
        "E3",
        lambda a: (np.asarray(a, dtype=float), np.asarray(a, dtype=float), _const(0.0, a)),
        "alpha_x = alpha_y = alpha, alpha_z = 0",
    ),
    "E4": EdgeSpec(
        "E4",
        lambda a: (np.asarray(a, dtype=float),) * 3,
        "alpha_x = alpha_y = alpha_z = alpha",
    ),
    "E5": EdgeSpec(
        "E5",
        lambda a: (_const(HALF_PI, a), np.asarray(a, dtype=float), _const(0.0, a)),
        "alpha_x = pi/2, alpha_y = alpha, alpha_z = 0",
    ),
    "E6": EdgeSpec(
        "E6",
        lambda a: (_const(HALF_PI, a), np.asarray(a, dtype=float), np.asarray(a, dtype=float)),
        "alpha_x = pi/2, alpha_y = alpha_z = alpha",
    ),
}


def get_edge(edge: EdgeSpec | str) -> EdgeSpec:
    if isinstance(edge, EdgeSpec):
        return edge
    try:
        return EDGES[str(edge).upper()]
    except KeyError:
        raise DomainError(f"unknown edge {edge!r}; expected one of {sorted(EDGES)}") from None


def edge_point(edge: EdgeSpec | str, alpha: float) -> CanonicalParams:
    """Canonical parameters of the point ``alpha`` on ``edge``."""
    edge = get_edge(edge)
    lo, hi = edge.free_parameter_range
    if not (lo - BOUNDARY_TOL <= alpha <= hi + BOUNDARY_TOL):
        raise DomainError(f"alpha={alpha!r} outside [{lo}, {hi}] on edge {edge.id}")
    ax, ay, az = (float(v) for v in edge.angles(alpha))
    return CanonicalParams(ax, ay, az)


_SQRT_HALF = 1 / np.sqrt(2)

# Rows are |Lambda_1> .. |Lambda_4> in the canonical ordering.
_MAGIC = _SQRT_HALF * np.array(
    [
        [1, 0, 0, 1],
        [-1j, 0, 0, 1j],
        [0, 1, -1, 0],
        [0, -1j, -1j, 0],
    ],
    dtype=complex,
)


def magic_basis() -> list[np.ndarray]:
    """The four magic-basis vectors as complex 4-vectors."""
    return [row.copy() for row in _MAGIC]


def _as_angles(p) -> tuple[float, float, float]:
    if isinstance(p, CanonicalParams):
        return p.as_tuple()
    return CanonicalParams(*p).as_tuple()


def eigenphases(p: CanonicalParams) -> np.ndarray:
    """Eigenphases ``lambda_1..lambda_4`` of the unitary in the magic basis."""
    ax, ay, az = _as_angles(p)
    lam = 0.5 * np.array(
        [
            ax - ay + az,
            -ax + ay + az,
            -ax - ay - az,
            ax + ay - az,
        ]
    )
    return lam


def unitary_spectral(p: CanonicalParams) -> np.ndarray:
    """``sum_k exp(-i lambda_k) |Lambda_k><Lambda_k|``."""
    lam = eigenphases(p)
    return (_MAGIC.T * np.exp(-1j * lam)) @ _MAGIC.conj()


def _canonical_batch(ax, ay, az) -> np.ndarray:
    ax, ay, az = np.broadcast_arrays(
        np.asarray(ax, dtype=float), np.asarray(ay, dtype=float), np.asarray(az, dtype=float)
    )
    out = np.zeros(ax.shape + (4, 4), dtype=complex)
    outer = np.exp(-0.5j * az)
    inner = np.exp(0.5j * az)
    cm, sm = np.cos((ax - ay) / 2), np.sin((ax - ay) / 2)
    cp, sp = np.cos((ax + ay) / 2), np.sin((ax + ay) / 2)
    out[..., 0, 0] = out[..., 3, 3] = outer * cm
    out[..., 0, 3] = out[..., 3, 0] = -1j * outer * sm
    out[..., 1, 1] = out[..., 2, 2] = inner * cp
    out[..., 1, 2] = out[..., 2, 1] = -1j * inner * sp
    return out


def unitary_canonical(p: CanonicalParams) -> np.ndarray:
    """Explicit matrix of the canonical unitary in the computational basis."""
    return _canonical_batch(*_as_angles(p))


def edge_unitaries(edge: EdgeSpec | str, alphas) -> np.ndarray:
    """Stack of unitaries along ``edge`` for an array of free-parameter values."""
    edge = get_edge(edge)
    return _canonical_batch(*edge.angles(np.asarray(alphas, dtype=float)))
