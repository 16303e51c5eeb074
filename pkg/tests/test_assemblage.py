"""Oracle tests for assemblage construction, the ideal assemblage set, and distances."""

import numpy as np
import pytest

from steerlab import qmath
from steerlab.assemblage import (
    Assemblage,
    MeasurementSet,
    SchmidtCoefficients,
    assemblage_distance,
    assemblage_from,
    assemblage_from_json,
    assemblage_to_json,
    consistency_check,
    ideal_assemblage,
    measurements_from_json,
    measurements_to_json,
    random_coefficients,
    target_ket,
)
from steerlab.qmath import BipartiteDims

from conftest import mix_assemblages, random_density, random_unitary

BELL = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2)


def z_measurement_set():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    return MeasurementSet(d_A=2, settings=1, outcomes=2, projectors={(0, 0): p0, (0, 1): p1})


def random_projective(rng, d, settings):
    projectors = {}
    for x in range(settings):
        u = random_unitary(rng, d)
        for a in range(d):
            v = u[:, a]
            projectors[(x, a)] = np.outer(v, v.conj())
    return MeasurementSet(d_A=d, settings=settings, outcomes=d, projectors=projectors)


def test_bell_z_assemblage():
    A = assemblage_from(np.outer(BELL, BELL.conj()), BipartiteDims(2, 2), z_measurement_set())
    assert np.allclose(A.sigma[(0, 0)], np.diag([0.5, 0.0]))
    assert np.allclose(A.sigma[(0, 1)], np.diag([0.0, 0.5]))


def test_assemblage_accepts_ket():
    A = assemblage_from(BELL, BipartiteDims(2, 2), z_measurement_set())
    assert np.allclose(A.sigma[(0, 0)], np.diag([0.5, 0.0]))


def test_product_state_assemblage():
    rng = np.random.default_rng(4)
    rho_A = random_density(rng, 3)
    rho_B = random_density(rng, 3)
    meas = random_projective(rng, 3, 2)
    A = assemblage_from(qmath.tensor(rho_A, rho_B), BipartiteDims(3, 3), meas)
    for (x, a), sig in A.sigma.items():
        expected = np.trace(meas.projectors[(x, a)] @ rho_A) * rho_B
        assert np.max(np.abs(sig - expected)) < 1e-12


def test_assemblage_dim_mismatch():
    with pytest.raises(ValueError):
        assemblage_from(np.eye(4) / 4, BipartiteDims(2, 2), random_projective(np.random.default_rng(0), 3, 1))


def test_ideal_d2_pair_block():
    c = SchmidtCoefficients(d=2, c=np.array([1.0, 1.0]) / np.sqrt(2))
    A = ideal_assemblage(c)
    assert np.allclose(A.sigma[(1, 0)], np.full((2, 2), 0.25))
    assert np.allclose(A.sigma[(1, 1)], np.array([[0.25, -0.25], [-0.25, 0.25]]))


def test_ideal_d3_singletons():
    rng = np.random.default_rng(8)
    c = random_coefficients(3, rng)
    A = ideal_assemblage(c)
    e2 = np.zeros((3, 3))
    e2[2, 2] = c.c[2] ** 2
    assert np.allclose(A.sigma[(1, 2)], e2)
    e0 = np.zeros((3, 3))
    e0[0, 0] = c.c[0] ** 2
    assert np.allclose(A.sigma[(2, 0)], e0)


def test_ideal_d4_wrap_pair():
    rng = np.random.default_rng(15)
    c = random_coefficients(4, rng)
    A = ideal_assemblage(c)
    # x=2 pairs (1,2) and (3,0); the wrap pair couples c_3 with c_0
    plus = A.sigma[(2, 3)]
    minus = A.sigma[(2, 0)]
    off = c.c[3] * c.c[0] / 2
    for sig, sign in [(plus, 1.0), (minus, -1.0)]:
        assert abs(sig[3, 3] - c.c[3] ** 2 / 2) < 1e-14
        assert abs(sig[0, 0] - c.c[0] ** 2 / 2) < 1e-14
        assert abs(sig[3, 0] - sign * off) < 1e-14
        assert abs(sig[0, 3] - sign * off) < 1e-14
        assert abs(sig[1, 1]) < 1e-14 and abs(sig[2, 2]) < 1e-14


def test_ideal_trace_relations():
    rng = np.random.default_rng(21)
    for d in range(2, 7):
        c = random_coefficients(d, rng)
        A = ideal_assemblage(c)
        for a in range(d):
            assert abs(np.trace(A.sigma[(0, a)]).real - c.c[a] ** 2) < 1e-12
        for m in range(d // 2):
            w = c.c[2 * m] ** 2 + c.c[2 * m + 1] ** 2
            assert abs(np.trace(A.sigma[(1, 2 * m)]).real - w / 2) < 1e-12
            assert abs(np.trace(A.sigma[(1, 2 * m + 1)]).real - w / 2) < 1e-12


def test_ideal_consistency():
    rng = np.random.default_rng(33)
    for d in range(2, 7):
        c = random_coefficients(d, rng)
        report = consistency_check(ideal_assemblage(c), tol=1e-12)
        assert report.passed
        assert report.positivity_residual < 1e-12
        assert report.non_signalling_residual < 1e-12
        assert report.normalization_residual < 1e-12


def test_consistency_detects_scaling():
    c = SchmidtCoefficients(d=2, c=np.array([0.6, 0.8]))
    A = ideal_assemblage(c)
    sigma = dict(A.sigma)
    sigma[(0, 0)] = 1.1 * sigma[(0, 0)]
    bad = Assemblage(d_B=2, settings=3, outcomes=2, sigma=sigma)
    report = consistency_check(bad, tol=1e-10)
    assert not report.passed
    assert abs(report.normalization_residual - 0.1 * 0.36) < 1e-12


def test_consistency_detects_signalling():
    c = SchmidtCoefficients(d=2, c=np.array([0.6, 0.8]))
    A = ideal_assemblage(c)
    sigma = dict(A.sigma)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sigma[(1, 0)] = swap @ sigma[(1, 0)] @ swap  # permuted marginal for x=1 only
    bad = Assemblage(d_B=2, settings=3, outcomes=2, sigma=sigma)
    report = consistency_check(bad, tol=1e-10)
    assert report.non_signalling_residual > 1e-3
    assert not report.passed


def test_distance_zero():
    c = random_coefficients(3, np.random.default_rng(2))
    A = ideal_assemblage(c)
    assert assemblage_distance(A, A) == 0


def test_distance_white_noise_closed_form():
    # mixing eta of the flat assemblage I/4 per element shifts each sigma by
    # eta * (I/4 - sigma); for the maximally entangled ideal every element has
    # eigenvalues (1/2, 0), so the 1-norm of the shift is eta/2
    c = SchmidtCoefficients(d=2, c=np.array([1.0, 1.0]) / np.sqrt(2))
    ideal = ideal_assemblage(c)
    flat = Assemblage(
        d_B=2,
        settings=3,
        outcomes=2,
        sigma={k: np.eye(2, dtype=complex) / 4 for k in ideal.sigma},
    )
    noisy = mix_assemblages(ideal, flat, 0.02)
    assert abs(assemblage_distance(noisy, ideal) - 0.01) < 1e-14


def test_distance_single_element_replaced():
    c = SchmidtCoefficients(d=2, c=np.array([0.6, 0.8]))
    ref = ideal_assemblage(c)
    sigma = dict(ref.sigma)
    sigma[(1, 0)] = np.eye(2, dtype=complex) / 4
    moved = Assemblage(d_B=2, settings=3, outcomes=2, sigma=sigma)
    expected = np.sum(np.abs(np.linalg.eigvalsh(ref.sigma[(1, 0)] - np.eye(2) / 4)))
    assert abs(assemblage_distance(moved, ref) - expected) < 1e-14


def test_distance_shape_mismatch():
    c2 = ideal_assemblage(SchmidtCoefficients(d=2, c=np.array([0.6, 0.8])))
    c3 = ideal_assemblage(random_coefficients(3, np.random.default_rng(1)))
    with pytest.raises(ValueError):
        assemblage_distance(c2, c3)


def test_random_coefficients_and_target_ket():
    rng = np.random.default_rng(44)
    for d in range(2, 7):
        c = random_coefficients(d, rng)
        assert np.all(c.c > 0) and np.all(c.c < 1)
        assert abs(np.sum(c.c**2) - 1) < 1e-12
        psi = target_ket(c)
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
        coeffs, _, _ = qmath.schmidt(psi, BipartiteDims(d, d))
        assert np.allclose(np.sort(coeffs), np.sort(c.c), atol=1e-12)


def test_schmidt_coefficients_validation():
    with pytest.raises(ValueError):
        SchmidtCoefficients(d=2, c=np.array([1.0, 0.0]))  # zero entry
    with pytest.raises(ValueError):
        SchmidtCoefficients(d=2, c=np.array([0.9, 0.9]))  # wrong norm


def test_assemblage_from_is_psd_random():
    rng = np.random.default_rng(55)
    for _ in range(10):
        rho = random_density(rng, 12)
        meas = random_projective(rng, 4, 3)
        A = assemblage_from(rho, BipartiteDims(4, 3), meas)
        for sig in A.sigma.values():
            assert qmath.is_psd(sig, tol=1e-10)
        assert consistency_check(A, tol=1e-10).passed


def test_assemblage_json_round_trip():
    c = random_coefficients(3, np.random.default_rng(6))
    A = ideal_assemblage(c)
    blob = assemblage_to_json(A)
    assert blob["d"] == 3 and blob["settings"] == 3 and blob["outcomes"] == 3
    entry = blob["sigma"]["0:1"]
    assert entry[4] == [pytest.approx(c.c[1] ** 2), 0.0]  # row-major (1,1) element
    back = assemblage_from_json(blob)
    assert assemblage_distance(back, A) < 1e-15


def test_measurements_json_round_trip():
    rng = np.random.default_rng(66)
    meas = random_projective(rng, 3, 2)
    blob = measurements_to_json(meas)
    assert "projectors" in blob
    back = measurements_from_json(blob)
    for key, proj in meas.projectors.items():
        assert np.max(np.abs(back.projectors[key] - proj)) < 1e-15
