"""Shared helpers for the test suite: seeded random states, measurements, LHS models."""

import numpy as np


def random_ket(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    # fix phases so the distribution is Haar
    return q * (np.diag(r) / np.abs(np.diag(r))).conj()


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def random_lhs_assemblage(rng, settings=2, outcomes=2, d_B=2):
    """Random unsteerable assemblage: mixture of deterministic strategies times pure states."""
    from steerlab.assemblage import Assemblage
    from steerlab.steerweight import deterministic_strategies

    strategies = deterministic_strategies(settings, outcomes)
    weights = rng.dirichlet(np.ones(len(strategies.table)))
    hidden = []
    for _ in strategies.table:
        v = random_ket(rng, d_B)
        hidden.append(np.outer(v, v.conj()))
    sigma = {}
    for x in range(settings):
        for a in range(outcomes):
            acc = np.zeros((d_B, d_B), dtype=complex)
            for lam, row in enumerate(strategies.table):
                if row[x] == a:
                    acc += weights[lam] * hidden[lam]
            sigma[(x, a)] = acc
    return Assemblage(d_B=d_B, settings=settings, outcomes=outcomes, sigma=sigma)


def mix_assemblages(A, B, t):
    """(1-t)*A + t*B elementwise."""
    from steerlab.assemblage import Assemblage

    sigma = {k: (1 - t) * A.sigma[k] + t * B.sigma[k] for k in A.sigma}
    return Assemblage(d_B=A.d_B, settings=A.settings, outcomes=A.outcomes, sigma=sigma)
