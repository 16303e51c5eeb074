"""Robustness of the certification pipeline for maximally entangled targets.

Controlled noise models perturb the ideal state or measurements; the observed
deviation epsilon of the assemblage then feeds analytic bounds on how far the
isometry output can drift from junk (x) target, and on the measurement-side
trace-norm distances.  The bounds hold only for maximally entangled references,
so everything here rejects other targets instead of extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from . import qmath
from .assemblage import (
    Assemblage,
    BipartiteDims,
    MeasurementSet,
    SchmidtCoefficients,
    assemblage_from,
    ideal_assemblage,
    target_ket,
)
from .certify import build_certification_operators, ideal_measurements, swap_isometry, apply_isometry

NOISE_KINDS = ("white_noise", "measurement_rotation", "bob_dephasing")


@dataclass(frozen=True)
class NoiseModel:
    """A named perturbation with a strength parameter.

    white_noise(eta) mixes the state with the maximally mixed one,
    bob_dephasing(gamma) damps coherences on Bob's index, and
    measurement_rotation(delta, seed) conjugates every setting by a seeded
    random unitary exp(i delta H).
    """

    kind: str
    strength: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.strength < 0:
            raise ValueError("noise strength must be nonnegative")
        if self.kind in ("white_noise", "bob_dephasing") and self.strength > 1:
            raise ValueError(f"{self.kind} strength must lie in [0, 1]")


@dataclass(frozen=True)
class EpsilonReport:
    """Per-element trace-norm shifts of the assemblage plus the reduced-state distance."""

    per_element: dict[tuple[int, int], float]
    state_dist: float

    @property
    def epsilon(self) -> float:
        return max(max(self.per_element.values(), default=0.0), self.state_dist)


class LemmaChecks(NamedTuple):
    lemma1_ok: bool
    lemma2_max: float
    lemma3_max: float


@dataclass(frozen=True)
class RobustnessRecord:
    """One sweep point: observed distances next to the analytic bounds."""

    d: int
    model: str
    strength: float
    epsilon: float
    state_dist_observed: float
    state_bound: float
    meas_dist_observed: dict[tuple[int, int], float]
    meas_bound: float
    lemma2_max: float
    lemma3_max: float

    @property
    def meas_dist_max(self) -> float:
        return max(self.meas_dist_observed.values())

    @property
    def lemma2_bound(self) -> float:
        return 2.0 * math.sqrt(self.epsilon)

    @property
    def lemma3_bound(self) -> float:
        return 4.0 * math.sqrt(self.epsilon)

    @property
    def passed(self) -> bool:
        # absolute slack absorbs floating-point noise at epsilon = 0, where the
        # bounds vanish but the observed quantities sit at sqrt(machine eps)
        slack = 1e-6
        return (
            self.state_dist_observed <= self.state_bound + slack
            and self.meas_dist_max <= self.meas_bound + slack
            and self.lemma2_max <= self.lemma2_bound + slack
            and self.lemma3_max <= self.lemma3_bound + slack
        )


def robust_state_bound(d: int, eps: float) -> float:
    """Bound on the trace distance between the isometry output and junk (x) target."""
    root = math.sqrt(eps)
    return 0.5 * (4.0 * d**2 * root + d**3 * eps * root + d * eps)


def robust_measurement_bound(d: int, eps: float) -> float:
    """Bound on the trace-norm shift of each extracted measurement action."""
    return 4.0 * (d**2 + d) * math.sqrt(eps) + eps


def perturb(
    reference_state: np.ndarray, reference_meas: MeasurementSet, model: NoiseModel
) -> tuple[np.ndarray, MeasurementSet]:
    """Apply a noise model to the reference state or measurements.

    Returns (rho_AB, measurements); exactly one of the two moves away from the
    reference, the other is returned unchanged.
    """
    rho = np.asarray(reference_state, dtype=complex)
    dim = rho.shape[0]
    if model.strength == 0.0:
        return rho.copy(), reference_meas
    if model.kind == "white_noise":
        out = (1.0 - model.strength) * rho + model.strength * np.eye(dim) / dim
        return out, reference_meas
    if model.kind == "bob_dephasing":
        d_a = reference_meas.d_A
        d_b = dim // d_a
        r4 = rho.reshape(d_a, d_b, d_a, d_b).copy()
        damp = np.full((d_b, d_b), 1.0 - model.strength)
        np.fill_diagonal(damp, 1.0)
        r4 *= damp[np.newaxis, :, np.newaxis, :]
        return r4.reshape(dim, dim), reference_meas
    # measurement_rotation: one seeded unitary per setting so each projective
    # set is conjugated as a whole and stays projective and complete
    rng = np.random.default_rng(model.seed)
    d_a = reference_meas.d_A
    rotated: dict[tuple[int, int], np.ndarray] = {}
    for x in range(reference_meas.settings):
        g = rng.normal(size=(d_a, d_a)) + 1j * rng.normal(size=(d_a, d_a))
        h = (g + g.conj().T) / 2.0
        h /= np.linalg.norm(h)
        u = expm(1j * model.strength * h)
        for a in range(reference_meas.outcomes):
            m = reference_meas.projectors[(x, a)]
            rotated[(x, a)] = u @ m @ u.conj().T
    meas = MeasurementSet(
        d_A=d_a,
        settings=reference_meas.settings,
        outcomes=reference_meas.outcomes,
        projectors=rotated,
    )
    return rho.copy(), meas


def epsilon_of(
    physical_assemblage: Assemblage,
    physical_rho_B: np.ndarray,
    reference_assemblage: Assemblage,
    reference_rho_B: np.ndarray,
) -> EpsilonReport:
    """Largest trace-norm shift over assemblage elements and the reduced state."""
    if (
        physical_assemblage.d_B != reference_assemblage.d_B
        or set(physical_assemblage.sigma) != set(reference_assemblage.sigma)
    ):
        raise ValueError("assemblages have mismatched shapes")
    phys_b = np.asarray(physical_rho_B, dtype=complex)
    ref_b = np.asarray(reference_rho_B, dtype=complex)
    if phys_b.shape != ref_b.shape:
        raise ValueError("reduced states have mismatched shapes")
    per_element = {
        key: qmath.trace_norm(physical_assemblage.sigma[key] - reference_assemblage.sigma[key])
        for key in physical_assemblage.sigma
    }
    state_dist = qmath.trace_distance(phys_b, ref_b)
    return EpsilonReport(per_element=per_element, state_dist=state_dist)


def purify_setup(
    rho_AB: np.ndarray, dims: BipartiteDims, meas: MeasurementSet
) -> tuple[np.ndarray, MeasurementSet]:
    """Dilate a mixed bipartite state to a pure one, folding the environment into Alice.

    The canonical purification places the environment as the first tensor factor,
    so the flat index already reads ((env, A), B) and the extended projectors
    I_env (x) M reproduce the physical assemblage exactly.
    """
    if meas.d_A != dims.d_A:
        raise ValueError("measurement dimension does not match dims")
    psi = qmath.purify(np.asarray(rho_AB, dtype=complex))
    rank = psi.size // dims.dim
    eye_env = np.eye(rank, dtype=complex)
    lifted = {key: qmath.tensor(eye_env, m) for key, m in meas.projectors.items()}
    big_meas = MeasurementSet(
        d_A=rank * dims.d_A,
        settings=meas.settings,
        outcomes=meas.outcomes,
        projectors=lifted,
    )
    return psi, big_meas


def _require_maximally_entangled(reference: SchmidtCoefficients) -> None:
    if np.max(np.abs(reference.c - 1.0 / np.sqrt(reference.d))) > 1e-9:
        raise ValueError("robustness bounds are derived only for the maximally entangled target")


def _junk_vector(psi: np.ndarray, d_A: int, d: int) -> np.ndarray:
    """Normalized projection of the purification onto Bob's |0>."""
    j = psi.reshape(d_A, d)[:, 0]
    norm = np.linalg.norm(j)
    if norm < 1e-12:
        raise ValueError("purification has no overlap with Bob's |0>")
    return j / norm


def _rank_two_trace_norm(u: np.ndarray, v: np.ndarray) -> float:
    """Trace norm of |u><u| - |v><v| for arbitrary (subnormalized) vectors.

    The difference has rank at most two with eigenvalues of opposite sign, so
    the norm is sqrt((|u|^2 + |v|^2)^2 - 4 |<u|v>|^2).
    """
    nu = float(np.vdot(u, u).real)
    nv = float(np.vdot(v, v).real)
    ov = abs(np.vdot(u, v))
    return math.sqrt(max((nu + nv) ** 2 - 4.0 * ov**2, 0.0))


def lemma_checks(
    psi_AB: np.ndarray,
    meas: MeasurementSet,
    reference: SchmidtCoefficients,
    samples: int = 100,
    seed: int = 0,
) -> LemmaChecks:
    """Numerical checks of the three shifting lemmas.

    lemma2_max is the largest norm of (M_{a|x} (x) I)|psi> - (I (x) M-bar)|psi>
    over all elements, where M-bar is the reference projector moved to Bob's
    side; all reference matrices are real symmetric, so moving them across the
    maximally entangled target is plain reuse of the same matrix.  lemma3_max
    does the same for the unitarized pair operators.  lemma1_ok verifies the
    rank-one trace-norm inequality ||(|u>-|v>)<t||_1 <= beta eta on random
    vector triples satisfying its hypotheses.
    """
    _require_maximally_entangled(reference)
    d = reference.d
    psi = np.asarray(psi_AB, dtype=complex).ravel()
    if psi.size % d != 0:
        raise ValueError("state dimension is not divisible by the target dimension")
    d_a = psi.size // d
    block = psi.reshape(d_a, d)
    meas_bar = ideal_measurements(d)

    lemma2 = 0.0
    for key, m in meas.projectors.items():
        shifted = block @ meas_bar.projectors[key].T
        lemma2 = max(lemma2, float(np.linalg.norm(m @ block - shifted)))

    ops = build_certification_operators(meas, d)
    ops_bar = build_certification_operators(meas_bar, d)
    lemma3 = 0.0
    for u_op, u_bar in zip(ops.Xu + ops.Yu, ops_bar.Xu + ops_bar.Yu):
        shifted = block @ u_bar.T
        lemma3 = max(lemma3, float(np.linalg.norm(u_op @ block - shifted)))

    rng = np.random.default_rng(seed)
    dim = 8
    ok = True
    for _ in range(samples):
        u = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        u *= rng.uniform(0.2, 1.0) / np.linalg.norm(u)
        step = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        step *= rng.uniform(0.0, 0.3) / np.linalg.norm(step)
        v = u + step
        vnorm = np.linalg.norm(v)
        if vnorm > 1.0:
            v = v / vnorm
        eta = np.linalg.norm(u - v)
        t = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        t *= rng.uniform(0.0, 2.0) / np.linalg.norm(t)
        beta = np.linalg.norm(t)
        lhs = qmath.trace_norm(np.outer(u - v, t.conj()))
        rhs = qmath.trace_norm(np.outer(t, (u - v).conj()))
        if lhs > beta * eta + 1e-10 or rhs > beta * eta + 1e-10:
            ok = False
            break
    return LemmaChecks(lemma1_ok=ok, lemma2_max=lemma2, lemma3_max=lemma3)


def robust_certification_experiment(
    d: int, model: NoiseModel, strengths, lemma_samples: int = 100
) -> list[RobustnessRecord]:
    """Sweep a noise model and record observed distances against the analytic bounds.

    Each strength is perturbed, the joint state is purified with the environment
    folded into Alice, the swap isometry is built from the physical measurements,
    and the output is compared to junk (x) maximally-entangled target.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    coeffs = SchmidtCoefficients(d=d, c=np.full(d, 1.0 / np.sqrt(d)))
    psi_bar = target_ket(coeffs)
    rho_bar = np.outer(psi_bar, psi_bar.conj())
    meas_bar = ideal_measurements(d)
    reference = ideal_assemblage(coeffs)
    rho_b_bar = np.eye(d, dtype=complex) / d
    dims = BipartiteDims(d_A=d, d_B=d)

    records = []
    for strength in strengths:
        point = replace(model, strength=float(strength))
        rho, meas = perturb(rho_bar, meas_bar, point)
        physical = assemblage_from(rho, dims, meas)
        eps = epsilon_of(physical, physical.reduced_state(), reference, rho_b_bar).epsilon

        psi, big_meas = purify_setup(rho, dims, meas)
        d_a = big_meas.d_A
        checks = lemma_checks(psi, big_meas, coeffs, samples=lemma_samples, seed=point.seed)
        ops = build_certification_operators(big_meas, d)
        circuit = swap_isometry(ops)
        block = psi.reshape(d_a, d)

        out = apply_isometry(circuit, psi)
        junk = _junk_vector(psi, d_a, d)
        target = np.einsum("p,bq->pbq", junk, np.eye(d, dtype=complex) / np.sqrt(d)).ravel()
        overlap = abs(np.vdot(target, out))
        state_dist = math.sqrt(max(1.0 - overlap**2, 0.0))

        meas_dists: dict[tuple[int, int], float] = {}
        for key, m in big_meas.projectors.items():
            u = apply_isometry(circuit, (m @ block).ravel())
            m_bar = meas_bar.projectors[key]
            v = np.einsum("p,qb->pbq", junk, m_bar / np.sqrt(d)).ravel()
            meas_dists[key] = _rank_two_trace_norm(u, v)

        records.append(
            RobustnessRecord(
                d=d,
                model=point.kind,
                strength=point.strength,
                epsilon=eps,
                state_dist_observed=state_dist,
                state_bound=robust_state_bound(d, eps),
                meas_dist_observed=meas_dists,
                meas_bound=robust_measurement_bound(d, eps),
                lemma2_max=checks.lemma2_max,
                lemma3_max=checks.lemma3_max,
            )
        )
    return records
