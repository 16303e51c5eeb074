"""Steering assemblages: construction from states and measurements, the ideal
assemblage of a Schmidt-diagonal target, consistency checks, and distances.

An assemblage is the family of subnormalized conditional states sigma_{a|x}
held by the trusted party, indexed by the untrusted setting x and outcome a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .qmath import BipartiteDims


@dataclass(frozen=True)
class MeasurementSet:
    """Projective measurements for the untrusted side, indexed (setting, outcome)."""

    d_A: int
    settings: int
    outcomes: int
    projectors: dict[tuple[int, int], np.ndarray]

    def __post_init__(self) -> None:
        for x in range(self.settings):
            for a in range(self.outcomes):
                m = self.projectors.get((x, a))
                if m is None or m.shape != (self.d_A, self.d_A):
                    raise ValueError(f"missing or misshaped projector for (x={x}, a={a})")

    def validate(self, tol: float = 1e-10) -> None:
        """Check projectivity, completeness and pairwise orthogonality."""
        for x in range(self.settings):
            total = np.zeros((self.d_A, self.d_A), dtype=complex)
            for a in range(self.outcomes):
                m = self.projectors[(x, a)]
                if not qmath.is_projector(m, tol):
                    raise ValueError(f"projector (x={x}, a={a}) is not a projector")
                total += m
                for b in range(a + 1, self.outcomes):
                    if np.max(np.abs(m @ self.projectors[(x, b)])) > tol:
                        raise ValueError(f"outcomes {a},{b} of setting {x} not orthogonal")
            if np.max(np.abs(total - np.eye(self.d_A))) > tol:
                raise ValueError(f"setting {x} projectors do not sum to identity")


@dataclass(frozen=True)
class SchmidtCoefficients:
    """Schmidt coefficients of the target ket: all strictly inside (0, 1), squares sum to 1."""

    d: int
    c: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)
        if c.size != self.d or self.d < 2:
            raise ValueError("need d >= 2 coefficients")
        if np.any(c <= 0) or np.any(c >= 1):
            raise ValueError("coefficients must lie strictly in (0, 1)")
        if abs(np.sum(c**2) - 1.0) > 1e-12:
            raise ValueError("squared coefficients must sum to 1")


@dataclass(frozen=True)
class Assemblage:
    """Subnormalized conditional states sigma_{a|x} on the trusted d_B-dim side."""

    d_B: int
    settings: int
    outcomes: int
    sigma: dict[tuple[int, int], np.ndarray]

    def __post_init__(self) -> None:
        for x in range(self.settings):
            for a in range(self.outcomes):
                s = self.sigma.get((x, a))
                if s is None or s.shape != (self.d_B, self.d_B):
                    raise ValueError(f"missing or misshaped element for (x={x}, a={a})")

    def reduced_state(self) -> np.ndarray:
        """Average over settings of sum_a sigma_{a|x} (they coincide when non-signalling)."""
        acc = np.zeros((self.d_B, self.d_B), dtype=complex)
        for x in range(self.settings):
            for a in range(self.outcomes):
                acc += self.sigma[(x, a)]
        return acc / self.settings


@dataclass(frozen=True)
class ConsistencyReport:
    positivity_residual: float
    non_signalling_residual: float
    normalization_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.positivity_residual <= self.tol
            and self.non_signalling_residual <= self.tol
            and self.normalization_residual <= self.tol
        )


def assemblage_from(
    rho_or_psi: np.ndarray, dims: BipartiteDims, meas: MeasurementSet
) -> Assemblage:
    """sigma_{a|x} = tr_A[(M_{a|x} (x) I) rho_AB]; accepts a joint ket or density matrix."""
    if meas.d_A != dims.d_A:
        raise ValueError(f"measurement dimension {meas.d_A} != d_A {dims.d_A}")
    state = np.asarray(rho_or_psi, dtype=complex)
    sigma: dict[tuple[int, int], np.ndarray] = {}
    if state.ndim == 1:
        if state.size != dims.dim:
            raise ValueError("ket size does not match dims")
        block = state.reshape(dims.d_A, dims.d_B)
        for key, m in meas.projectors.items():
            sigma[key] = (m @ block).T @ block.conj()
    else:
        if state.shape != (dims.dim, dims.dim):
            raise ValueError("density matrix shape does not match dims")
        t = state.reshape(dims.d_A, dims.d_B, dims.d_A, dims.d_B)
        for key, m in meas.projectors.items():
            sigma[key] = np.einsum("kl,likj->ij", m, t)
    return Assemblage(d_B=dims.d_B, settings=meas.settings, outcomes=meas.outcomes, sigma=sigma)


def pair_layout(d: int, x: int) -> tuple[list[tuple[int, int]], int | None]:
    """Outcome pairing of setting x in {1, 2}: list of (plus, minus) index pairs
    and the singleton outcome (odd d only).

    x=1 pairs (2m, 2m+1) with singleton d-1 for odd d; x=2 pairs
    (2m+1, 2m+2 mod d) with singleton 0 for odd d. For even d the x=2
    chain wraps, coupling index d-1 with 0.
    """
    if x == 1:
        pairs = [(2 * m, 2 * m + 1) for m in range(d // 2)]
        return pairs, (d - 1 if d % 2 else None)
    if x == 2:
        pairs = [(2 * m + 1, (2 * m + 2) % d) for m in range((d - 1) // 2 if d % 2 else d // 2)]
        return pairs, (0 if d % 2 else None)
    raise ValueError("pairing defined for settings 1 and 2 only")


def ideal_assemblage(c: SchmidtCoefficients) -> Assemblage:
    """The assemblage of the Schmidt-diagonal target under the ideal measurements.

    Setting 0 is diagonal readout sigma_{i|0} = c_i^2 |i><i|; settings 1 and 2
    consist of 2x2 blocks with diagonals c_i^2/2, c_j^2/2 and off-diagonals
    +-c_i c_j / 2 on the paired indices, plus a diagonal singleton for odd d.
    """
    d = c.d
    if d < 2:
        raise ValueError("need d >= 2")
    sigma: dict[tuple[int, int], np.ndarray] = {}
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = c.c[i] ** 2
        sigma[(0, i)] = m

    for x in (1, 2):
        pairs, singleton = pair_layout(d, x)
        for i, j in pairs:
            for outcome, sign in ((i, 1.0), (j, -1.0)):
                m = np.zeros((d, d), dtype=complex)
                m[i, i] = c.c[i] ** 2 / 2
                m[j, j] = c.c[j] ** 2 / 2
                m[i, j] = m[j, i] = sign * c.c[i] * c.c[j] / 2
                sigma[(x, outcome)] = m
        if singleton is not None:
            m = np.zeros((d, d), dtype=complex)
            m[singleton, singleton] = c.c[singleton] ** 2
            sigma[(x, singleton)] = m
    return Assemblage(d_B=d, settings=3, outcomes=d, sigma=sigma)


def consistency_check(A: Assemblage, tol: float) -> ConsistencyReport:
    """Residuals for positivity, non-signalling and normalization of an assemblage."""
    positivity = 0.0
    for s in A.sigma.values():
        herm = np.max(np.abs(s - s.conj().T))
        lam_min = float(np.min(np.linalg.eigvalsh((s + s.conj().T) / 2)))
        positivity = max(positivity, herm, -lam_min, 0.0)

    marginals = []
    normalization = 0.0
    for x in range(A.settings):
        total = np.zeros((A.d_B, A.d_B), dtype=complex)
        for a in range(A.outcomes):
            total += A.sigma[(x, a)]
        marginals.append(total)
        normalization = max(normalization, abs(np.trace(total).real - 1.0))
    mean = sum(marginals) / A.settings
    non_signalling = max(float(np.max(np.abs(m - mean))) for m in marginals)
    return ConsistencyReport(positivity, non_signalling, normalization, tol)


def assemblage_distance(A: Assemblage, ref: Assemblage) -> float:
    """Max over (x, a) of the Schatten-1 norm of sigma_{a|x} - reference."""
    if (A.d_B, A.settings, A.outcomes) != (ref.d_B, ref.settings, ref.outcomes):
        raise ValueError("assemblage shapes do not match")
    return max(
        qmath.trace_norm(A.sigma[key] - ref.sigma[key]) for key in A.sigma
    )


def random_coefficients(d: int, rng: np.random.Generator) -> SchmidtCoefficients:
    """Random valid coefficient vector, bounded away from degenerate entries."""
    c = rng.uniform(0.3, 1.0, size=d)
    return SchmidtCoefficients(d=d, c=c / np.linalg.norm(c))


def target_ket(c: SchmidtCoefficients) -> np.ndarray:
    """The Schmidt-diagonal target sum_i c_i |ii> on two d-dim registers."""
    psi = np.zeros(c.d * c.d, dtype=complex)
    for i in range(c.d):
        psi[i * c.d + i] = c.c[i]
    return psi


def _matrix_to_json(m: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).ravel()]


def _matrix_from_json(entries: list[list[float]], dim: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(dim, dim)


def assemblage_to_json(A: Assemblage) -> dict:
    return {
        "d": A.d_B,
        "settings": A.settings,
        "outcomes": A.outcomes,
        "sigma": {f"{x}:{a}": _matrix_to_json(s) for (x, a), s in sorted(A.sigma.items())},
    }


def assemblage_from_json(blob: dict) -> Assemblage:
    d = int(blob["d"])
    sigma = {}
    for key, entries in blob["sigma"].items():
        x, a = (int(t) for t in key.split(":"))
        sigma[(x, a)] = _matrix_from_json(entries, d)
    return Assemblage(
        d_B=d, settings=int(blob["settings"]), outcomes=int(blob["outcomes"]), sigma=sigma
    )


def measurements_to_json(meas: MeasurementSet) -> dict:
    return {
        "d": meas.d_A,
        "settings": meas.settings,
        "outcomes": meas.outcomes,
        "projectors": {
            f"{x}:{a}": _matrix_to_json(m) for (x, a), m in sorted(meas.projectors.items())
        },
    }


def measurements_from_json(blob: dict) -> MeasurementSet:
    d = int(blob["d"])
    projectors = {}
    for key, entries in blob["projectors"].items():
        x, a = (int(t) for t in key.split(":"))
        projectors[(x, a)] = _matrix_from_json(entries, d)
    return MeasurementSet(
        d_A=d, settings=int(blob["settings"]), outcomes=int(blob["outcomes"]), projectors=projectors
    )
