"""Steerable weight of an assemblage via a self-contained SDP solver.

The steerable weight is the minimal weight of the steerable part over all
convex splits of an assemblage into steerable plus unsteerable pieces. The
unsteerable part is parametrized by hidden-state blocks, one per
deterministic response function, and the weight is found by maximizing the
unsteerable mass subject to positivity of every block and every slack.

The solver is a log-det barrier interior-point method with damped Newton
centering. Before solving, an exact facial reduction confines every hidden
block to the intersection of the ranges of the elements its strategy feeds;
positivity forces that support, so the reduction never changes the optimum,
and it gives the reduced problem a strict interior even when assemblage
elements are rank deficient. Problems are tiny (at most d^3 blocks of d x d
with d <= 4), so dense Hessians in a fixed Hermitian basis are cheap, and
carrying our own solver keeps the artifact free of external SDP dependencies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .assemblage import Assemblage, consistency_check

STRATEGY_CAP = 10_000


class SolverError(RuntimeError):
    """Raised when the interior-point loop cannot certify the requested gap."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


@dataclass(frozen=True)
class DeterministicStrategySet:
    """All deterministic response functions lambda: setting -> outcome."""

    settings: int
    outcomes: int
    table: list[tuple[int, ...]]

    def responds(self, lam: int, x: int, a: int) -> bool:
        return self.table[lam][x] == a


@dataclass(frozen=True)
class SdpSolution:
    """Optimal hidden-state blocks with the certified primal value and gap."""

    sigma_lambda: dict[int, np.ndarray]
    primal: float
    sw: float
    iterations: int
    gap: float


def deterministic_strategies(settings: int, outcomes: int) -> DeterministicStrategySet:
    if outcomes**settings > STRATEGY_CAP:
        raise ValueError(
            f"strategy set of size {outcomes}^{settings} exceeds the cap {STRATEGY_CAP}"
        )
    table = list(itertools.product(range(outcomes), repeat=settings))
    return DeterministicStrategySet(settings=settings, outcomes=outcomes, table=table)


def _hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Frobenius) basis of d x d Hermitian matrices, diagonals first."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    root = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = root
            e[j, i] = root
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j * root
            e[j, i] = 1j * root
            basis.append(e)
    return np.stack(basis)


def _range_basis(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the range of a PSD matrix."""
    h = (m + m.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(h)
    cutoff = max(1e-12, 1e-10 * float(vals.max(initial=0.0)))
    return vecs[:, vals > cutoff]


def _intersection_basis(projectors: list[np.ndarray], d: int) -> np.ndarray:
    """Orthonormal basis of the intersection of the ranges behind the projectors."""
    s = np.zeros((d, d), dtype=complex)
    for p in projectors:
        s += np.eye(d) - p
    vals, vecs = np.linalg.eigh(s)
    return vecs[:, vals < 1e-8]


def _logdet_if_pd(m: np.ndarray) -> float | None:
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(chol).real
    if np.any(diag <= 0.0):
        return None
    return 2.0 * float(np.sum(np.log(diag)))


def steerable_weight(
    A: Assemblage, tol: float = 1e-7, max_iterations: int = 200
) -> SdpSolution:
    """Solve the unsteerable-mass SDP and return sw = 1 - optimum.

    maximize   sum_lambda tr(sigma_lambda)
    subject to sigma_{a|x} - sum_lambda D(a|x,lambda) sigma_lambda >= 0
               sigma_lambda >= 0

    Convergence is certified by an explicitly feasible dual point built from
    the barrier multipliers, so the reported gap is a true suboptimality bound.
    """
    report = consistency_check(A, 1e-8)
    if not report.passed:
        raise ValueError(
            "invalid assemblage: positivity residual "
            f"{report.positivity_residual:.2e}, signalling "
            f"{report.non_signalling_residual:.2e}, normalization "
            f"{report.normalization_residual:.2e}"
        )
    strategies = deterministic_strategies(A.settings, A.outcomes)
    d = A.d_B
    n_lam = len(strategies.table)
    keys = sorted(A.sigma)
    sig = {k: (np.asarray(A.sigma[k], dtype=complex) + np.asarray(A.sigma[k]).conj().T) / 2 for k in keys}

    # facial reduction: positivity of the slacks forces every hidden block into
    # the intersection of the ranges of the elements its strategy responds to
    range_u = {k: _range_basis(sig[k]) for k in keys}
    proj = {k: u @ u.conj().T for k, u in range_u.items()}
    supports = [
        _intersection_basis([proj[(x, row[x])] for x in range(A.settings)], d)
        for row in strategies.table
    ]
    ranks = [v.shape[1] for v in supports]
    zero = np.zeros((d, d), dtype=complex)
    if all(r == 0 for r in ranks):
        # no hidden block can carry any mass: the assemblage is fully steerable
        return SdpSolution(
            sigma_lambda={lam: zero.copy() for lam in range(n_lam)},
            primal=0.0,
            sw=1.0,
            iterations=0,
            gap=0.0,
        )

    # per-block bases lifted back to d x d: E_k = V B_k V+, diagonals first so
    # tr(E_k) = 1 exactly for the first rank coefficients
    bases: list[np.ndarray] = []
    offsets = [0]
    tvec_parts = []
    for v, r in zip(supports, ranks):
        if r == 0:
            bases.append(np.zeros((0, d, d), dtype=complex))
        else:
            b = _hermitian_basis(r)
            bases.append(np.einsum("pi,kij,qj->kpq", v, b, v.conj()))
        offsets.append(offsets[-1] + r * r)
        tvec_parts.append(np.concatenate([np.ones(r), np.zeros(r * r - r)]))
    n_var = offsets[-1]
    tvec = np.concatenate(tvec_parts)

    def block_slice(lam: int) -> slice:
        return slice(offsets[lam], offsets[lam + 1])

    # constraints, each reduced to the subspace where it can bind:
    # ("slack", U+ sigma_{a|x} U, U, active blocks) and ("block", 0, V, [lam])
    cons = []
    for key in keys:
        u = range_u[key]
        if u.shape[1] == 0:
            continue
        x, a = key
        active = [
            lam
            for lam, row in enumerate(strategies.table)
            if row[x] == a and ranks[lam] > 0
        ]
        if not active:
            continue
        s0 = u.conj().T @ sig[key] @ u
        cons.append(("slack", s0, u, [(lam, -1.0) for lam in active]))
    for lam, (v, r) in enumerate(zip(supports, ranks)):
        if r > 0:
            cons.append(("block", np.zeros((r, r), dtype=complex), v, [(lam, 1.0)]))

    def sigma_of(y: np.ndarray) -> list[np.ndarray]:
        out = []
        for lam in range(n_lam):
            if ranks[lam] == 0:
                out.append(zero)
            else:
                out.append(np.einsum("k,kpq->pq", y[block_slice(lam)], bases[lam]))
        return out

    def reduced_of(sigmas: list[np.ndarray]) -> list[np.ndarray]:
        mats = []
        for _, s0, u, terms in cons:
            m = s0.copy()
            for lam, coef in terms:
                m = m + coef * (u.conj().T @ sigmas[lam] @ u)
            mats.append((m + m.conj().T) / 2.0)
        return mats

    def barrier(t: float, y: np.ndarray) -> float | None:
        total = 0.0
        for m in reduced_of(sigma_of(y)):
            ld = _logdet_if_pd(m)
            if ld is None:
                return None
            total += ld
        return -t * float(tvec @ y) - total

    def certified_gap(t: float, y: np.ndarray) -> tuple[float, float]:
        """Feasible-dual upper bound minus the primal value, floored at zero."""
        sigmas = sigma_of(y)
        reds = reduced_of(sigmas)
        primal = sum(float(np.trace(s).real) for s in sigmas)
        dual = 0.0
        z = [np.zeros((r, r), dtype=complex) for r in ranks]
        for (kind, s0, u, terms), m in zip(cons, reds):
            if kind != "slack":
                continue
            w = np.linalg.inv(m) / t
            w = (w + w.conj().T) / 2.0
            dual += float(np.trace(w @ s0).real)
            lifted = u @ w @ u.conj().T
            for lam, _ in terms:
                v = supports[lam]
                z[lam] += v.conj().T @ lifted @ v
        t_min = math.inf
        for lam, r in enumerate(ranks):
            if r > 0:
                t_min = min(t_min, float(np.linalg.eigvalsh(z[lam]).min()))
        if t_min <= 0.0:
            return math.inf, primal
        return max(dual / t_min - primal, 0.0), primal

    # strictly feasible start: sigma_lambda = s0 (support projector)
    slack_room = [
        float(np.linalg.eigvalsh(s0).min()) / len(terms)
        for kind, s0, u, terms in cons
        if kind == "slack"
    ]
    s0_val = 0.5 * min(slack_room)
    y = np.zeros(n_var)
    for lam, r in enumerate(ranks):
        y[offsets[lam] : offsets[lam] + r] = s0_val

    t = 1.0
    iterations = 0
    gap = math.inf
    while True:
        for _ in range(60):
            if iterations >= max_iterations:
                gap, _ = certified_gap(t, y)
                if gap <= tol:
                    break
                raise SolverError(
                    f"no convergence in {max_iterations} Newton steps (gap {gap:.3e})",
                    gap=gap,
                )
            sigmas = sigma_of(y)
            reds = reduced_of(sigmas)
            grad = -t * tvec.copy()
            hess = np.zeros((n_var, n_var))
            for (kind, s0, u, terms), m in zip(cons, reds):
                w = np.linalg.inv(m)
                w = (w + w.conj().T) / 2.0
                lifted = u @ w @ u.conj().T
                wew = {}
                for lam, coef in terms:
                    sl = block_slice(lam)
                    grad[sl] -= coef * np.real(
                        np.einsum("ab,kba->k", lifted, bases[lam])
                    )
                    wew[lam] = (coef, np.einsum("ab,kbc,cd->kad", lifted, bases[lam], lifted))
                for i, (lam, coef_l) in enumerate(terms):
                    _, wl = wew[lam]
                    sl = block_slice(lam)
                    for mu, coef_m in terms[i:]:
                        sm = block_slice(mu)
                        kblock = coef_l * coef_m * np.real(
                            np.einsum("kad,jda->kj", wl, bases[mu])
                        )
                        hess[sl, sm] += kblock
                        if mu != lam:
                            hess[sm, sl] += kblock.T
            try:
                step = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                ridge = 1e-12 * float(np.trace(hess)) / n_var
                step = np.linalg.solve(hess + ridge * np.eye(n_var), -grad)
            decrement2 = float(-grad @ step)
            if decrement2 / 2.0 <= 1e-10:
                break
            base = barrier(t, y)
            alpha = 1.0
            while alpha > 1e-13:
                trial = barrier(t, y + alpha * step)
                if trial is not None and trial <= base - 0.25 * alpha * decrement2:
                    break
                alpha *= 0.5
            if alpha <= 1e-13:
                break
            y = y + alpha * step
            iterations += 1
        gap, primal = certified_gap(t, y)
        if gap <= tol:
            break
        if t > 1e16:
            raise SolverError(f"barrier weight exhausted at gap {gap:.3e}", gap=gap)
        t *= 10.0

    sigmas = sigma_of(y)
    primal = sum(float(np.trace(s).real) for s in sigmas)
    return SdpSolution(
        sigma_lambda={lam: sigmas[lam] for lam in range(n_lam)},
        primal=primal,
        sw=1.0 - primal,
        iterations=iterations,
        gap=gap,
    )


def sw_lower_bound_from_violation(f_val: float, f_max: float, f_lhs_max: float) -> float:
    """Violation-based lower bound on the steerable weight, clamped to [0, 1]."""
    denom = f_max - f_lhs_max
    if denom <= 1e-12:
        raise ValueError("degenerate denominator: f_max must exceed f_lhs_max")
    return float(min(max((f_val - f_lhs_max) / denom, 0.0), 1.0))
