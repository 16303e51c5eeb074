"""The tilted steering inequality I = alpha<A0> + beta<A0 Z> + <A1 X>.

Provides the inequality value on qubit steering data, its local bound
alpha + sqrt(1+beta^2) (verified by enumerating the extremal hidden-variable
strategies), the quantum bound sqrt(2(1+alpha^2+beta^2)), the
measurement-optimal value for a fixed partially entangled state, and an
independent numerical maximizer used as a verification oracle.

Pauli operators are unhalved: Z = |0><0|-|1><1|, X = |0><1|+|1><0|. The
bounds above close only with this normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .assemblage import Assemblage

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class TsiParams:
    """Inequality tilt parameters; certifying means beta^2 = alpha^2 + 1."""

    alpha: float
    beta: float
    certifying: bool = False

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.certifying and abs(self.beta**2 - self.alpha**2 - 1.0) > 1e-12:
            raise ValueError("certifying parameters require beta^2 = alpha^2 + 1")


@dataclass(frozen=True)
class QubitSteeringData:
    """The three correlators entering the inequality."""

    exp_A0: float
    exp_A0Z: float
    exp_A1X: float

    def __post_init__(self) -> None:
        for name in ("exp_A0", "exp_A0Z", "exp_A1X"):
            v = getattr(self, name)
            if not -1.0 - 1e-10 <= v <= 1.0 + 1e-10:
                raise ValueError(f"{name}={v} outside [-1, 1]")


@dataclass(frozen=True)
class LhvLhsStrategy:
    """Extremal hidden-variable strategy: branch chi in 1..4, Bob angle xi."""

    chi: int
    xi: float

    def __post_init__(self) -> None:
        if self.chi not in (1, 2, 3, 4):
            raise ValueError("chi must be in {1, 2, 3, 4}")
        if not 0.0 <= self.xi < 2 * np.pi:
            raise ValueError("xi must lie in [0, 2*pi)")


@dataclass(frozen=True)
class TwoQubitCorrelation:
    """Correlation data of the two-qubit target: T = diag(sin2t, -sin2t, 1)."""

    theta: float
    T: np.ndarray
    mu: float

    def __post_init__(self) -> None:
        s = np.sin(2 * self.theta)
        expected = np.diag([s, -s, 1.0])
        if np.max(np.abs(self.T - expected)) > 1e-12:
            raise ValueError("correlation matrix must be diag(sin2t, -sin2t, 1)")


def correlation_matrix(theta: float, mu: float) -> TwoQubitCorrelation:
    s = np.sin(2 * theta)
    return TwoQubitCorrelation(theta=theta, T=np.diag([s, -s, 1.0]), mu=mu)


def steering_data_from_assemblage(A: Assemblage) -> QubitSteeringData:
    """Correlators of settings 0 and 1 of a 2-outcome qubit assemblage."""
    if A.d_B != 2 or A.outcomes != 2 or A.settings < 2:
        raise ValueError("need a 2-outcome qubit assemblage with at least 2 settings")
    d0 = A.sigma[(0, 0)] - A.sigma[(0, 1)]
    d1 = A.sigma[(1, 0)] - A.sigma[(1, 1)]
    return QubitSteeringData(
        exp_A0=float(np.trace(d0).real),
        exp_A0Z=float(np.trace(d0 @ Z).real),
        exp_A1X=float(np.trace(d1 @ X).real),
    )


def tsi_value(data: QubitSteeringData, p: TsiParams) -> float:
    return p.alpha * data.exp_A0 + p.beta * data.exp_A0Z + data.exp_A1X


def local_bound(p: TsiParams) -> float:
    return p.alpha + np.sqrt(1 + p.beta**2)


def strategy_value(s: LhvLhsStrategy, p: TsiParams) -> float:
    """Inequality value of one extremal strategy of the hidden-variable model."""
    sign = 1.0 if s.chi in (1, 2) else -1.0
    sin_sign = 1.0 if s.chi in (1, 3) else -1.0
    return sign * (p.alpha + p.beta * np.cos(s.xi)) + sin_sign * np.sin(s.xi)


def local_bound_bruteforce(p: TsiParams, grid: int) -> float:
    """Maximum over the four extremal strategies with xi on a uniform grid."""
    if grid < 1000:
        raise ValueError("grid must be at least 1000")
    xi = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    body = p.alpha + p.beta * np.cos(xi)
    best = max(
        np.max(body + np.sin(xi)),
        np.max(body - np.sin(xi)),
        np.max(-body + np.sin(xi)),
        np.max(-body - np.sin(xi)),
    )
    return float(best)


def quantum_bound(p: TsiParams) -> float:
    return np.sqrt(2 * (1 + p.alpha**2 + p.beta**2))


def tsi_value_for_theta(theta: float, p: TsiParams) -> tuple[float, float]:
    """Measurement-optimal inequality value for the state cos(t)|00>+sin(t)|11>.

    Returns (value, mu) with value = alpha*cos2t + sqrt((1+beta^2)(1+sin^2 2t)).
    mu solves cos^2 mu = (1 - beta^2 sin^2 2t)/(cos^2 2t (1+beta^2)) when that
    ratio lies in [0, 1]; otherwise (including the degenerate t = pi/4 where
    every mu is optimal) mu = pi/2.
    """
    if not 0.0 < theta < np.pi / 2:
        raise ValueError("theta must lie strictly inside (0, pi/2)")
    s = np.sin(2 * theta)
    c = np.cos(2 * theta)
    value = p.alpha * c + np.sqrt((1 + p.beta**2) * (1 + s**2))
    mu = np.pi / 2
    if abs(c) > 1e-15:
        ratio = (1 - p.beta**2 * s**2) / (c**2 * (1 + p.beta**2))
        if 0.0 <= ratio <= 1.0:
            mu = float(np.arccos(np.sqrt(ratio)))
    return float(value), mu


def cert_params_for_theta(theta: float) -> TsiParams:
    """The certifying (alpha, beta) pair whose unique maximizer is |psi(theta)>."""
    if not 0.0 < theta <= np.pi / 4:
        raise ValueError("theta must lie in (0, pi/4]")
    beta = 1.0 / np.sin(2 * theta)
    alpha = np.sqrt(max(beta**2 - 1.0, 0.0))
    return TsiParams(alpha=alpha, beta=np.sqrt(alpha**2 + 1.0), certifying=True)


def numeric_max(theta: float, p: TsiParams, restarts: int = 8) -> float:
    """Direct maximization of the inequality over all qubit measurements.

    Alice's observables are unit Bloch vectors a0, a1; Bob's are an orthogonal
    pair in the X-Z plane at angle mu. With the state's Bloch data
    r = (0, 0, cos2t) and T = diag(sin2t, -sin2t, 1), the value is
    alpha (a0.r) + beta (a0.T b0) + a1.T b1, and the optimal a1 aligns with
    T b1. Coarse grid over (a0 angles, mu), then simplex refinement.
    """
    if not 0.0 < theta < np.pi / 2:
        raise ValueError("theta must lie strictly inside (0, pi/2)")
    s = np.sin(2 * theta)
    c = np.cos(2 * theta)

    def value(params: np.ndarray) -> np.ndarray:
        cap_theta, phi, mu = params
        a0_dot_r = np.cos(cap_theta) * c
        a0_dot_Tb0 = np.sin(cap_theta) * np.cos(phi) * s * np.sin(mu) + np.cos(
            cap_theta
        ) * np.cos(mu)
        norm_Tb1 = np.sqrt(s**2 * np.cos(mu) ** 2 + np.sin(mu) ** 2)
        return p.alpha * a0_dot_r + p.beta * a0_dot_Tb0 + norm_Tb1

    n = 60
    cap = np.linspace(0.0, np.pi, n)
    phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    mu = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    grid = value(np.meshgrid(cap, phi, mu, indexing="ij"))

    # Seed selection must be diverse, not just top-valued: at cap_theta = 0
    # every phi parametrizes the same point, so the raw top-k seeds can all
    # be copies of one critical point while a basin a few 1e-6 below on the
    # lattice holds the true maximum. Deduplicate by actual geometry.
    def embed(i: int, j: int, k: int) -> np.ndarray:
        a0 = np.array(
            [np.sin(cap[i]) * np.cos(phi[j]), np.sin(cap[i]) * np.sin(phi[j]), np.cos(cap[i])]
        )
        b0 = np.array([np.sin(mu[k]), 0.0, np.cos(mu[k])])
        return np.concatenate([a0, b0])

    seeds: list[np.ndarray] = []
    points: list[np.ndarray] = []
    for idx in np.argsort(grid.ravel())[::-1]:
        i, j, k = np.unravel_index(idx, grid.shape)
        pt = embed(i, j, k)
        if all(np.max(np.abs(pt - q)) > 0.25 for q in points):
            points.append(pt)
            seeds.append(np.array([cap[i], phi[j], mu[k]]))
        if len(seeds) >= max(restarts, 1):
            break

    def refine(x0: np.ndarray) -> tuple[float, np.ndarray]:
        res = minimize(
            lambda q: -value(q),
            x0=x0,
            method="Nelder-Mead",
            options={"maxiter": 200, "xatol": 1e-10, "fatol": 1e-12},
        )
        return -res.fun, res.x

    best, best_x = -np.inf, None
    for seed in seeds:
        val, x = refine(seed)
        if val > best:
            best, best_x = val, x
    # a fresh simplex from the incumbent escapes the degenerate simplexes
    # Nelder-Mead sometimes collapses into before reaching tolerance
    val, _ = refine(best_x)
    return float(max(best, val))
