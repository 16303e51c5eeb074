"""Certification pipeline for Schmidt-diagonal bipartite targets.

Given an untrusted measurement box for Alice and tomography on Bob, the
pipeline checks the assemblage structure, evaluates the tilted steering
inequality on every paired 2x2 subspace, builds the unitarized operator
chains, verifies the sufficient extraction condition, and applies the
SWAP-type isometry that moves the target state into an ancilla register.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .assemblage import (
    Assemblage,
    MeasurementSet,
    SchmidtCoefficients,
    assemblage_distance,
    assemblage_from,
    ideal_assemblage,
    pair_layout,
)
from .qmath import BipartiteDims
from .tsi import cert_params_for_theta


@dataclass(frozen=True)
class SubspaceViolation:
    """Inequality value of one paired subspace of the assemblage.

    value is evaluated on the weight-normalized 2x2 sub-assemblage; the raw
    (unnormalized) violation is value * weight with weight = c_i^2 + c_j^2.
    """

    family: int
    pair: tuple[int, int]
    value: float
    target: float
    weight: float


@dataclass(frozen=True)
class CertificationOperators:
    """Projectors P^(k) plus the unitarized pair operators and their chains."""

    d_A: int
    d: int
    P: list[np.ndarray]
    Xu: list[np.ndarray]
    Yu: list[np.ndarray]
    Xbig: list[np.ndarray]


@dataclass(frozen=True)
class IsometryCircuit:
    """The extraction isometry Phi = R (I x Fbar) S (I x F) on box x ancilla."""

    d_A: int
    d: int
    Phi: np.ndarray
    F: np.ndarray
    Fbar: np.ndarray
    S: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class CertificationReport:
    structure_residual: float
    subspace_violations: list[SubspaceViolation]
    sufficient_residual: float
    state_fidelity: float
    junk: np.ndarray
    measurement_fidelities: dict[tuple[int, int], float]
    passed: bool


def ideal_measurements(d: int) -> MeasurementSet:
    """The three reference settings: computational readout plus the two
    staggered pair-interference bases (with a diagonal singleton for odd d)."""
    if d < 2:
        raise ValueError("need d >= 2")
    projectors: dict[tuple[int, int], np.ndarray] = {}
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1.0
        projectors[(0, i)] = m
    for x in (1, 2):
        pairs, singleton = pair_layout(d, x)
        for i, j in pairs:
            for outcome, sign in ((i, 1.0), (j, -1.0)):
                m = np.zeros((d, d), dtype=complex)
                m[i, i] = m[j, j] = 0.5
                m[i, j] = m[j, i] = sign * 0.5
                projectors[(x, outcome)] = m
        if singleton is not None:
            m = np.zeros((d, d), dtype=complex)
            m[singleton, singleton] = 1.0
            projectors[(x, singleton)] = m
    return MeasurementSet(d_A=d, settings=3, outcomes=d, projectors=projectors)


def _pair_families(d: int) -> list[int]:
    # for d=2 the second pair family duplicates the first up to relabeling
    return [1] if d == 2 else [1, 2]


def subspace_violations(A: Assemblage, c: SchmidtCoefficients) -> list[SubspaceViolation]:
    """Evaluate the tilted inequality on every paired 2x2 subspace.

    Each pair (i, j) is normalized by its weight w = c_i^2 + c_j^2, evaluated
    with the certifying parameters of its effective angle
    sin 2theta_m = 2 c_i c_j / w, and compared to the target 2 beta_m.
    """
    if A.settings < 3 and c.d > 2:
        raise ValueError("need all three settings for d > 2")
    out = []
    for x in _pair_families(c.d):
        pairs, _ = pair_layout(c.d, x)
        for i, j in pairs:
            w = c.c[i] ** 2 + c.c[j] ** 2
            if w < 1e-14:
                raise ValueError(f"pair ({i},{j}) has zero weight")
            # heavy coefficient first so the effective angle sits in (0, pi/4]
            h, l = (i, j) if c.c[i] >= c.c[j] else (j, i)
            theta_m = 0.5 * np.arcsin(min(2 * c.c[h] * c.c[l] / w, 1.0))
            p = cert_params_for_theta(theta_m)
            d0 = (A.sigma[(0, h)] - A.sigma[(0, l)]) / w
            d1 = (A.sigma[(x, i)] - A.sigma[(x, j)]) / w
            exp_A0 = float((d0[h, h] + d0[l, l]).real)
            exp_A0Z = float((d0[h, h] - d0[l, l]).real)
            exp_A1X = float((d1[h, l] + d1[l, h]).real)
            value = p.alpha * exp_A0 + p.beta * exp_A0Z + exp_A1X
            out.append(
                SubspaceViolation(
                    family=x, pair=(i, j), value=value, target=2 * p.beta, weight=w
                )
            )
    return out


def build_certification_operators(meas: MeasurementSet, d: int) -> CertificationOperators:
    """P^(k) from the readout setting; unitarized pair operators from the two
    interference settings; alternating chains X^(k) that walk index k to 0."""
    meas.validate(1e-10)
    d_A = meas.d_A
    eye = np.eye(d_A, dtype=complex)
    P = [meas.projectors[(0, k)] for k in range(d)]

    def unitarize(x: int) -> list[np.ndarray]:
        ops = []
        pairs, _ = pair_layout(d, x)
        for i, j in pairs:
            plus = meas.projectors[(x, i)]
            minus = meas.projectors[(x, j)]
            ops.append(eye - (plus + minus) + (plus - minus))
        return ops

    Xu = unitarize(1)
    Yu = unitarize(2)
    # interleaved chain [Xu0, Yu0, Xu1, Yu1, ...]; X^(k) is the product of its
    # first k factors, the rightmost acting first
    interleaved: list[np.ndarray] = []
    for m in range(d // 2):
        interleaved.append(Xu[m])
        if len(interleaved) < d - 1:
            interleaved.append(Yu[m])
    Xbig = [eye]
    for k in range(1, d):
        Xbig.append(Xbig[-1] @ interleaved[k - 1])
    return CertificationOperators(d_A=d_A, d=d, P=P, Xu=Xu, Yu=Yu, Xbig=Xbig)


def check_sufficient_condition(
    ops: CertificationOperators, psi: np.ndarray, c: SchmidtCoefficients
) -> float:
    """max_k || X^(k) P^(k) |psi> - c_k |0, k> || over the d chain indices."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != ops.d_A * ops.d:
        raise ValueError("state dimension does not match operator dimensions")
    block = psi.reshape(ops.d_A, ops.d)
    worst = 0.0
    for k in range(ops.d):
        v = ops.Xbig[k] @ (ops.P[k] @ block)
        v[0, k] -= c.c[k]
        worst = max(worst, float(np.linalg.norm(v)))
    return worst


def swap_isometry(ops: CertificationOperators) -> IsometryCircuit:
    """Fourier - controlled-phase - controlled-chain circuit on box x ancilla."""
    d, d_A = ops.d, ops.d_A
    omega = np.exp(2j * np.pi / d)
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    F = omega ** (j * k) / np.sqrt(d)
    Fbar = F.conj()
    Z_A = sum((omega**k) * ops.P[k] for k in range(d))
    S = np.zeros((d_A * d, d_A * d), dtype=complex)
    R = np.zeros((d_A * d, d_A * d), dtype=complex)
    Zpow = np.eye(d_A, dtype=complex)
    for k in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[k, k] = 1.0
        S += qmath.tensor(Zpow, E)
        R += qmath.tensor(ops.Xbig[k], E)
        Zpow = Zpow @ Z_A
    eye_A = np.eye(d_A, dtype=complex)
    Phi = R @ qmath.tensor(eye_A, Fbar) @ S @ qmath.tensor(eye_A, F)
    return IsometryCircuit(d_A=d_A, d=d, Phi=Phi, F=F, Fbar=Fbar, S=S, R=R)


def apply_isometry(circuit: IsometryCircuit, psi: np.ndarray) -> np.ndarray:
    """Apply Phi to |psi>_AB |0>_ancilla; output register order (A, B, ancilla)."""
    d_A, d = circuit.d_A, circuit.d
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != d_A * d:
        raise ValueError("state dimension does not match the circuit")
    block = psi.reshape(d_A, d)
    phi4 = circuit.Phi.reshape(d_A, d, d_A, d)
    out = np.einsum("pqa,ab->pbq", phi4[:, :, :, 0], block)
    return out.ravel()


def _extract_junk(out: np.ndarray, c: SchmidtCoefficients, d_A: int) -> tuple[float, np.ndarray]:
    """Overlap of the isometry output with (anything)_A x target_(B,ancilla)."""
    out3 = out.reshape(d_A, c.d, c.d)
    J = np.zeros(d_A, dtype=complex)
    for k in range(c.d):
        J += c.c[k] * out3[:, k, k]
    norm = float(np.linalg.norm(J))
    fidelity = norm**2
    junk = J / norm if norm > 1e-15 else np.zeros(d_A, dtype=complex)
    return fidelity, junk


def certify_measurements(
    ops: CertificationOperators,
    circuit: IsometryCircuit,
    psi: np.ndarray,
    meas: MeasurementSet,
    c: SchmidtCoefficients,
) -> dict[tuple[int, int], float]:
    """Fidelity of Phi((A_{x,m} (x) I)|psi>|0>) with junk (x) (ideal pair action
    on the target), both sides normalized by the ideal side's norm."""
    d, d_A = c.d, ops.d_A
    psi = np.asarray(psi, dtype=complex).ravel()
    block = psi.reshape(d_A, d)
    _, junk = _extract_junk(apply_isometry(circuit, psi), c, d_A)

    fidelities: dict[tuple[int, int], float] = {}
    for x in (0, 1, 2):
        pairs, _ = pair_layout(d, 1 if x == 0 else x)
        for m, (i, j) in enumerate(pairs):
            w = c.c[i] ** 2 + c.c[j] ** 2
            if w < 1e-14:
                raise ValueError(f"pair ({i},{j}) has zero ideal norm")
            if x == 0:
                op = ops.P[i] - ops.P[j]
            else:
                op = meas.projectors[(x, i)] - meas.projectors[(x, j)]
            lhs = apply_isometry(circuit, (op @ block).ravel()).reshape(d_A, d, d)
            ideal = np.zeros((d, d), dtype=complex)
            if x == 0:
                ideal[i, i] = c.c[i]
                ideal[j, j] = -c.c[j]
            else:
                ideal[i, j] = c.c[i]
                ideal[j, i] = c.c[j]
            rhs = np.einsum("a,bk->abk", junk, ideal)
            inner = np.vdot(rhs, lhs)
            fidelities[(x, m)] = float(abs(inner) ** 2 / w**2)
    return fidelities


def certify_state(
    rho_or_psi: np.ndarray,
    dims: BipartiteDims,
    meas: MeasurementSet,
    c: SchmidtCoefficients,
    tol: float = 1e-9,
) -> CertificationReport:
    """Full pipeline: assemblage structure, subspace inequalities, sufficient
    condition, and isometric extraction of the target state."""
    if dims.d_B != c.d:
        raise ValueError("trusted dimension must match the coefficient count")
    state = np.asarray(rho_or_psi, dtype=complex)
    if state.ndim == 2:
        vals, vecs = np.linalg.eigh(state)
        if vals[-1] < 1.0 - 1e-9:
            raise ValueError("mixed states need the robustness pipeline; pass a ket")
        psi = vecs[:, -1]
        # eigenvectors carry an arbitrary global phase; anchor the dominant
        # amplitude on the positive real axis before the phase-sensitive checks
        pivot = psi[np.argmax(np.abs(psi))]
        psi = psi * (pivot.conjugate() / abs(pivot))
    else:
        psi = state.ravel()

    A = assemblage_from(psi, dims, meas)
    structure_residual = assemblage_distance(A, ideal_assemblage(c))
    violations = subspace_violations(A, c)
    ops = build_certification_operators(meas, c.d)
    sufficient_residual = check_sufficient_condition(ops, psi, c)
    circuit = swap_isometry(ops)
    out = apply_isometry(circuit, psi)
    state_fidelity, junk = _extract_junk(out, c, ops.d_A)
    measurement_fidelities = certify_measurements(ops, circuit, psi, meas, c)

    violation_gap = max(abs(v.value - v.target) for v in violations)
    passed = (
        structure_residual <= tol
        and violation_gap <= tol
        and sufficient_residual <= tol
        and state_fidelity >= 1 - tol
        and min(measurement_fidelities.values()) >= 1 - tol
    )
    return CertificationReport(
        structure_residual=structure_residual,
        subspace_violations=violations,
        sufficient_residual=sufficient_residual,
        state_fidelity=state_fidelity,
        junk=junk,
        measurement_fidelities=measurement_fidelities,
        passed=passed,
    )


def reconstruct_coefficients(A: Assemblage, cross_tol: float = 1e-6) -> SchmidtCoefficients:
    """Read coefficients from the readout traces, cross-check the ratios each
    pair's violation implies, and renormalize. Raises when the two routes
    disagree beyond cross_tol."""
    d = A.d_B
    traces = np.array([max(np.trace(A.sigma[(0, k)]).real, 0.0) for k in range(d)])
    c_est = np.sqrt(traces)
    norm = np.linalg.norm(c_est)
    if norm <= 0:
        raise ValueError("readout traces vanish; nothing to reconstruct")
    c = SchmidtCoefficients(d=d, c=c_est / norm)

    for v in subspace_violations(A, c):
        beta_hat = v.value / 2
        sin2 = 1.0 if beta_hat <= 1.0 else 1.0 / beta_hat
        ratio_violation = np.tan(0.5 * np.arcsin(sin2))
        i, j = v.pair
        h, l = (i, j) if c.c[i] >= c.c[j] else (j, i)
        ratio_trace = c.c[l] / c.c[h]
        if abs(ratio_violation - ratio_trace) > cross_tol:
            raise ValueError(
                f"pair {v.pair}: violation ratio {ratio_violation:.6g} disagrees "
                f"with trace ratio {ratio_trace:.6g}"
            )
    return c


def report_to_json(report: CertificationReport) -> dict:
    return {
        "structure_residual": report.structure_residual,
        "sufficient_residual": report.sufficient_residual,
        "state_fidelity": report.state_fidelity,
        "junk": [[float(z.real), float(z.imag)] for z in report.junk],
        "subspace_violations": [
            {
                "family": v.family,
                "pair": list(v.pair),
                "value": v.value,
                "target": v.target,
                "weight": v.weight,
            }
            for v in report.subspace_violations
        ],
        "measurement_fidelities": {
            f"{x}:{m}": f for (x, m), f in sorted(report.measurement_fidelities.items())
        },
        "passed": report.passed,
    }
