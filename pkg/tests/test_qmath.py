"""Oracle tests for the dense complex linear-algebra core."""

import numpy as np
import pytest

from steerlab import qmath
from steerlab.qmath import BipartiteDims

from conftest import random_density, random_ket, random_unitary

I2 = np.eye(2)
Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_tensor_identity():
    assert np.allclose(qmath.tensor(I2, I2), np.eye(4))


def test_tensor_basis_projectors():
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    out = qmath.tensor(p0, p1)
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0  # joint index i_A*d_B + i_B = 0*2 + 1
    assert np.allclose(out, expected)


def test_tensor_sign_convention():
    zx = qmath.tensor(Z, X)
    assert zx[0, 1] == 1.0
    assert zx[2, 3] == -1.0


def test_tensor_associative():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        left = qmath.tensor(qmath.tensor(a, b), c)
        right = qmath.tensor(a, qmath.tensor(b, c))
        assert np.max(np.abs(left - right)) < 1e-12


def test_partial_trace_bell():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    out = qmath.partial_trace_A(rho, BipartiteDims(2, 2))
    assert np.allclose(out, I2 / 2)


def test_partial_trace_product():
    rng = np.random.default_rng(3)
    rho_A = random_density(rng, 3)
    rho_B = random_density(rng, 4)
    out = qmath.partial_trace_A(qmath.tensor(rho_A, rho_B), BipartiteDims(3, 4))
    assert np.max(np.abs(out - rho_B)) < 1e-12


def test_partial_trace_projected_theta_state():
    # Oracle: build the 4x4 matrix (|0><0| (x) I) |psi(theta)><psi(theta)| by hand
    # and trace the first qubit with explicit index loops.
    theta = 0.7
    psi = np.array([np.cos(theta), 0.0, 0.0, np.sin(theta)], dtype=complex)
    proj = np.kron(np.diag([1.0, 0.0]), np.eye(2))
    mat = proj @ np.outer(psi, psi.conj())
    expected = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                expected[i, j] += mat[k * 2 + i, k * 2 + j]
    assert np.allclose(expected, np.cos(theta) ** 2 * np.diag([1.0, 0.0]))
    out = qmath.partial_trace_A(mat, BipartiteDims(2, 2))
    assert np.max(np.abs(out - expected)) < 1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        qmath.partial_trace_A(np.eye(6), BipartiteDims(2, 2))


def test_schmidt_bell():
    bell = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    coeffs, _, _ = qmath.schmidt(bell, BipartiteDims(2, 2))
    assert np.allclose(coeffs, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_schmidt_product():
    psi = np.zeros(4)
    psi[1] = 1.0  # |01>
    coeffs, _, _ = qmath.schmidt(psi, BipartiteDims(2, 2))
    assert np.allclose(coeffs, [1.0, 0.0], atol=1e-12)


def test_schmidt_already_diagonal():
    t = np.pi / 8
    psi = np.array([np.cos(t), 0.0, 0.0, np.sin(t)])
    coeffs, _, _ = qmath.schmidt(psi, BipartiteDims(2, 2))
    assert np.allclose(coeffs, [np.cos(t), np.sin(t)])


def test_schmidt_reconstruction_random():
    rng = np.random.default_rng(11)
    for d_A, d_B in [(2, 2), (3, 4), (5, 3)]:
        psi = random_ket(rng, d_A * d_B)
        coeffs, basis_A, basis_B = qmath.schmidt(psi, BipartiteDims(d_A, d_B))
        assert np.all(np.diff(coeffs) <= 1e-14)
        assert np.all(coeffs >= 0)
        assert abs(np.sum(coeffs**2) - 1) < 1e-12
        rebuilt = np.zeros(d_A * d_B, dtype=complex)
        for k in range(len(coeffs)):
            rebuilt += coeffs[k] * qmath.tensor_kets(basis_A[:, k], basis_B[:, k])
        phase = np.vdot(rebuilt, psi)
        assert np.linalg.norm(psi - rebuilt * phase / abs(phase)) < 1e-10


def test_trace_norm_values():
    assert abs(qmath.trace_norm(np.diag([1.0, -1.0])) - 2) < 1e-14
    rng = np.random.default_rng(5)
    for n in [2, 3, 5]:
        u = random_unitary(rng, n)
        assert abs(qmath.trace_norm(u) - n) < 1e-10
    d = np.diag([1.0, 0.0]) - np.diag([0.0, 1.0])
    assert abs(qmath.trace_norm(d) - 2) < 1e-14


def test_trace_norm_requires_square():
    with pytest.raises(ValueError):
        qmath.trace_norm(np.ones((2, 3)))


def test_trace_distance_values():
    rho = random_density(np.random.default_rng(1), 3)
    assert qmath.trace_distance(rho, rho) < 1e-14
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    assert abs(qmath.trace_distance(p0, p1) - 1) < 1e-14
    # eigenvalues of I/2 - |0><0| are -1/2, +1/2 so the distance is 1/2
    assert abs(qmath.trace_distance(I2 / 2, p0) - 0.5) < 1e-14


def test_trace_distance_metric_properties():
    rng = np.random.default_rng(23)
    for _ in range(30):
        a = random_density(rng, 4)
        b = random_density(rng, 4)
        c = random_density(rng, 4)
        dab = qmath.trace_distance(a, b)
        assert abs(dab - qmath.trace_distance(b, a)) < 1e-10
        assert dab <= qmath.trace_distance(a, c) + qmath.trace_distance(c, b) + 1e-10
        assert -1e-12 <= dab <= 1 + 1e-12


def test_purify_maximally_mixed():
    out = qmath.purify(I2.astype(complex) / 2)
    bell = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    assert np.linalg.norm(out - bell) < 1e-12


def test_purify_pure_state():
    rng = np.random.default_rng(9)
    v = random_ket(rng, 3)
    out = qmath.purify(np.outer(v, v.conj()))
    assert out.shape == (3,)  # rank 1: no extra register content beyond |0>
    overlap = abs(np.vdot(out, v))
    assert abs(overlap - 1) < 1e-10


def test_purify_diagonal():
    out = qmath.purify(np.diag([0.75, 0.25]).astype(complex))
    expected = np.array([np.sqrt(0.75), 0.0, 0.0, np.sqrt(0.25)])
    assert np.linalg.norm(out - expected) < 1e-12


def test_purify_round_trip():
    rng = np.random.default_rng(17)
    for dim in [2, 3, 5, 8]:
        rho = random_density(rng, dim)
        psi = qmath.purify(rho)
        d_A = psi.size // dim
        back = qmath.partial_trace_A(np.outer(psi, psi.conj()), BipartiteDims(d_A, dim))
        assert np.max(np.abs(back - rho)) < 1e-10


def test_purify_rank_deficient():
    rng = np.random.default_rng(29)
    rho = random_density(rng, 4, rank=2)
    psi = qmath.purify(rho)
    assert psi.size == 2 * 4
    back = qmath.partial_trace_A(np.outer(psi, psi.conj()), BipartiteDims(2, 4))
    assert np.max(np.abs(back - rho)) < 1e-10


def test_predicates():
    rng = np.random.default_rng(2)
    u = random_unitary(rng, 3)
    assert qmath.is_unitary(u)
    assert not qmath.is_unitary(2 * u)
    h = u + u.conj().T
    assert qmath.is_hermitian(h)
    assert not qmath.is_hermitian(1j * np.eye(3) + h)
    v = random_ket(rng, 4)
    p = np.outer(v, v.conj())
    assert qmath.is_projector(p)
    assert not qmath.is_projector(0.5 * p)
    assert qmath.is_psd(p)
    assert not qmath.is_psd(p - 0.5 * np.eye(4))


def test_density_validation():
    qmath.validate_density_matrix(I2.astype(complex) / 2)
    with pytest.raises(ValueError):
        qmath.validate_density_matrix(np.diag([1.0, 1.0]).astype(complex))
    with pytest.raises(ValueError):
        qmath.validate_density_matrix(np.diag([1.5, -0.5]).astype(complex))
