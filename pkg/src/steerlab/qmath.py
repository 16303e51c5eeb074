"""Dense complex linear algebra primitives.

Tensor products, partial traces, Schmidt decompositions, the Schatten-1
norm, trace distance, and canonical purification. Everything operates on
plain numpy arrays: kets are 1-d complex arrays, operators are 2-d.

Index convention for composite systems: the joint basis index is
i_A * d_B + i_B, matching numpy.kron. All other modules inherit it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Eigenvalues below this magnitude are treated as zero for rank decisions.
RANK_TOL = 1e-12


@dataclass(frozen=True)
class BipartiteDims:
    """Dimensions of a bipartite system; d_B is the trusted side."""

    d_A: int
    d_B: int

    def __post_init__(self) -> None:
        if self.d_A < 1 or self.d_B < 1:
            raise ValueError("dimensions must be positive")

    @property
    def dim(self) -> int:
        return self.d_A * self.d_B


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators (joint index i_A*d_B + i_B)."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def tensor_kets(*kets: np.ndarray) -> np.ndarray:
    """Kronecker product of kets with the same index convention as tensor."""
    out = np.asarray(kets[0], dtype=complex)
    for ket in kets[1:]:
        out = np.kron(out, np.asarray(ket, dtype=complex))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol


def is_projector(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return is_hermitian(m, tol) and np.max(np.abs(m @ m - m)) <= tol


def is_psd(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        return False
    return float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2))) >= -tol


def validate_ket(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError("ket is not normalized")
    return psi


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError("density matrix trace is not 1")
    if float(np.min(np.linalg.eigvalsh(rho))) < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def partial_trace_A(rho: np.ndarray, dims: BipartiteDims) -> np.ndarray:
    """Trace out the first (untrusted) factor, returning a d_B x d_B matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dims.dim, dims.dim):
        raise ValueError(
            f"matrix of shape {rho.shape} does not match dims {dims.d_A}x{dims.d_B}"
        )
    t = rho.reshape(dims.d_A, dims.d_B, dims.d_A, dims.d_B)
    return np.einsum("iaib->ab", t)


def schmidt(
    psi: np.ndarray, dims: BipartiteDims
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt decomposition of a bipartite ket.

    Returns (coeffs, basisA, basisB) with coefficients nonnegative and
    descending; column k of each basis matrix is the k-th Schmidt vector,
    so psi = sum_k coeffs[k] * basisA[:, k] (x) basisB[:, k].
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != dims.dim:
        raise ValueError(f"ket of size {psi.size} does not match dims {dims.dim}")
    u, s, vh = np.linalg.svd(psi.reshape(dims.d_A, dims.d_B))
    # psi[i*d_B + j] = sum_k s[k] u[i,k] vh[k,j], so the B vectors are rows of vh
    return s, u, vh.T


def trace_norm(m: np.ndarray) -> float:
    """Schatten-1 norm: the sum of singular values."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("trace norm requires a square matrix")
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Half the Schatten-1 norm of the difference; in [0, 1] for states."""
    r1 = np.asarray(r1, dtype=complex)
    r2 = np.asarray(r2, dtype=complex)
    if r1.shape != r2.shape:
        raise ValueError("trace distance requires equal dimensions")
    diff = r1 - r2
    # the difference of Hermitian matrices is Hermitian: use eigenvalues
    if np.max(np.abs(diff - diff.conj().T)) < 1e-12:
        return float(np.sum(np.abs(np.linalg.eigvalsh(diff)))) / 2
    return trace_norm(diff) / 2


def purify(rho_B: np.ndarray) -> np.ndarray:
    """Canonical purification on H_A (x) H_B with d_A = rank(rho_B).

    Eigenvalues are sorted descending; each eigenvector's first amplitude
    of magnitude above RANK_TOL is rotated to be real positive, so the
    output is deterministic. Tracing out the first factor recovers rho_B.
    """
    rho_B = np.asarray(rho_B, dtype=complex)
    dim = rho_B.shape[0]
    vals, vecs = np.linalg.eigh(rho_B)
    # stable sort keeps eigh's order inside degenerate eigenspaces
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    rank = int(np.sum(vals > RANK_TOL))
    rank = max(rank, 1)
    psi = np.zeros(rank * dim, dtype=complex)
    for k in range(rank):
        v = vecs[:, k]
        nz = np.flatnonzero(np.abs(v) > RANK_TOL)
        if nz.size:
            phase = v[nz[0]] / abs(v[nz[0]])
            v = v / phase
        psi[k * dim : (k + 1) * dim] = np.sqrt(max(vals[k], 0.0)) * v
    return psi
