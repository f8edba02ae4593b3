import numpy as np
import pytest
from hypothesis import given

from envassist.errors import DomainError
from envassist.gate_family import (
    EDGES,
    CanonicalParams,
    edge_point,
    edge_unitaries,
    eigenphases,
    in_tetrahedron,
    magic_basis,
    unitary_canonical,
    unitary_spectral,
)

from conftest import canonical_params, random_params

PI = np.pi
S = 1 / np.sqrt(2)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def test_magic_basis_vectors():
    basis = magic_basis()
    np.testing.assert_allclose(basis[0], [S, 0, 0, S], atol=1e-15)
    np.testing.assert_allclose(basis[2], [0, S, -S, 0], atol=1e-15)
    np.testing.assert_allclose(basis[1], [-1j * S, 0, 0, 1j * S], atol=1e-15)
    np.testing.assert_allclose(basis[3], [0, -1j * S, -1j * S, 0], atol=1e-15)


def test_magic_basis_orthonormal():
    m = np.array(magic_basis())
    np.testing.assert_allclose(m.conj() @ m.T, np.eye(4), atol=1e-15)


@pytest.mark.parametrize(
    "params, expected",
    [
        ((0, 0, 0), (0, 0, 0, 0)),
        ((PI / 2, 0, 0), (PI / 4, -PI / 4, -PI / 4, PI / 4)),
        ((PI / 2, PI / 2, PI / 2), (PI / 4, PI / 4, -3 * PI / 4, PI / 4)),
    ],
)
def test_eigenphases(params, expected):
    np.testing.assert_allclose(eigenphases(CanonicalParams(*params)), expected, atol=1e-15)


@given(canonical_params())
def test_eigenphases_sum_to_zero(p):
    assert abs(eigenphases(p).sum()) <= 1e-15


def test_identity_vertex():
    p = CanonicalParams(0, 0, 0)
    np.testing.assert_allclose(unitary_spectral(p), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(unitary_canonical(p), np.eye(4), atol=1e-15)


def test_swap_vertex_is_swap_up_to_phase():
    p = CanonicalParams(PI / 2, PI / 2, PI / 2)
    np.testing.assert_allclose(unitary_spectral(p), np.exp(-1j * PI / 4) * SWAP, atol=1e-14)


def test_cnot_vertex_structure():
    u = unitary_canonical(CanonicalParams(PI / 2, 0, 0))
    for i, j in [(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (1, 2), (2, 1), (2, 2)]:
        assert abs(abs(u[i, j]) - S) < 1e-15
    # off-diagonal entries are -i times the diagonal ones
    assert np.isclose(u[0, 3] / u[0, 0], -1j)
    assert np.isclose(u[1, 2] / u[1, 1], -1j)


def test_dcnot_centre_block():
    u = unitary_canonical(CanonicalParams(PI / 2, PI / 2, 0))
    np.testing.assert_allclose(u[1:3, 1:3], [[0, -1j], [-1j, 0]], atol=1e-15)


def test_spectral_and_explicit_forms_agree(rng):
    for _ in range(1000):
        p = random_params(rng)
        assert np.abs(unitary_spectral(p) - unitary_canonical(p)).max() <= 1e-12


def test_unitary_and_special(rng):
    for _ in range(1000):
        u = unitary_canonical(random_params(rng))
        assert np.abs(u.conj().T @ u - np.eye(4)).max() <= 1e-12
        assert abs(np.linalg.det(u) - 1) <= 1e-12


@pytest.mark.parametrize(
    "edge, alpha, expected",
    [
        ("E1", 0.3, (PI / 2, PI / 2, 0.3)),
        ("E2", 0.3, (0.3, 0, 0)),
        ("E3", 0.3, (0.3, 0.3, 0)),
        ("E4", 0.3, (0.3, 0.3, 0.3)),
        ("E5", 0.3, (PI / 2, 0.3, 0)),
        ("E6", 0.3, (PI / 2, 0.3, 0.3)),
        ("E3", 0.0, (0, 0, 0)),
        ("E6", PI / 2, (PI / 2, PI / 2, PI / 2)),
    ],
)
def test_edge_point(edge, alpha, expected):
    assert edge_point(edge, alpha).as_tuple() == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("edge", sorted(EDGES))
def test_edges_stay_in_chamber(edge):
    for alpha in np.linspace(0, PI / 2, 201):
        assert in_tetrahedron(*edge_point(edge, alpha).as_tuple())


@pytest.mark.parametrize("alpha", [-0.01, PI / 2 + 1e-6])
def test_edge_point_rejects_out_of_range(alpha):
    with pytest.raises(DomainError):
        edge_point("E1", alpha)


def test_unknown_edge():
    with pytest.raises(DomainError):
        edge_point("E7", 0.1)


@pytest.mark.parametrize("bad", [(0.1, 0.2, 0.0), (2.0, 1.0, 0.0), (0.5, 0.4, -0.1)])
def test_params_outside_chamber_rejected(bad):
    with pytest.raises(DomainError):
        CanonicalParams(*bad)


def test_boundary_tolerance():
    CanonicalParams(PI / 2 + 5e-13, 0.0, -5e-13)


def test_edge_endpoints_are_vertices():
    ends = {eid: e.endpoints for eid, e in EDGES.items()}
    assert ends == {
        "E1": ("DCNOT", "SWAP"),
        "E2": ("identity", "CNOT"),
        "E3": ("identity", "DCNOT"),
        "E4": ("identity", "SWAP"),
        "E5": ("CNOT", "DCNOT"),
        "E6": ("CNOT", "SWAP"),
    }


def test_batched_unitaries_match_pointwise():
    alphas = np.linspace(0, PI / 2, 9)
    stack = edge_unitaries("E6", alphas)
    for a, u in zip(alphas, stack):
        np.testing.assert_array_equal(u, unitary_canonical(edge_point("E6", a)))
