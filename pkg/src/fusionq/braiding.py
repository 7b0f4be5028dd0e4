"""R-matrix, ribbon scalars and the unitarized coboundary.

The braiding on V (x) V is q^{-1/N} times the explicit Hecke generator g
composed with the flip.  Longer-range structure is built from two chain
expansions, applied matrix-free:

    iterated (x) last leg:   D^{(n-1)} (x) 1 (R) = R_{1,n+1} ... R_{n,n+1}
    first leg (x) iterated:  1 (x) D^{(k)} (R)   = R_{1,k+2} ... R_{1,2}
    full coboundary chain:   R^{(n)} = R_12 (R_13 R_23) ... (R_1n ... R_{n-1,n})

The half-integer ribbon exponents are exact; on completely reducible
pieces the square root Theta is the block-diagonal scalar family
q^{(c(lam)+c(kap)-c(mu))/2}.  On full powers the square root is spectral
and a branch must be chosen; colliding branches (s vs s + ell on one
eigenspace) raise BranchCollision instead of guessing.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg

from . import legops, uqrep
from .errors import BranchCollision
from .scalars import QContext
from .weights import (
    add_box,
    casimir_exp,
    classical_power_multiplicities,
    fundamental_weight,
    zero_weight,
)


def hecke_generator(ctx: QContext) -> np.ndarray:
    """The Hecke generator g on V (x) V, defined basis-wise.

    g psi_i psi_i = q psi_i psi_i; g psi_i psi_j = psi_j psi_i for i > j;
    g psi_i psi_j = psi_j psi_i + (q - 1/q) psi_i psi_j for i < j.
    """
    N, q = ctx.N, ctx.q
    g = np.zeros((N * N, N * N), dtype=complex)
    for i in range(N):
        for j in range(N):
            col = i * N + j
            if i == j:
                g[col, col] = q
            elif i > j:
                g[j * N + i, col] = 1.0
            else:
                g[j * N + i, col] = 1.0
                g[col, col] = q - 1 / q
    return g


def flip(ctx: QContext) -> np.ndarray:
    N = ctx.N
    S = np.zeros((N * N, N * N))
    for i in range(N):
        for j in range(N):
            S[j * N + i, i * N + j] = 1.0
    return S


def r_matrix(ctx: QContext) -> np.ndarray:
    """R = q^{-1/N} Sigma g on V (x) V."""
    pref = ctx.qpow(Fraction(-1, ctx.N))
    return pref * (flip(ctx) @ hecke_generator(ctx))


def braiding_eps(ctx: QContext) -> np.ndarray:
    """The braided symmetry eps = Sigma R = q^{-1/N} g."""
    return ctx.qpow(Fraction(-1, ctx.N)) * hecke_generator(ctx)


def apply_r_pair(ctx: QContext, x, n: int, i: int, j: int, inverse=False):
    """Apply R (or R^{-1}) coupling legs (i, j) of V^{(x)n}, i < j."""
    R = r_matrix(ctx)
    if inverse:
        R = np.linalg.inv(R)
    return legops.apply_pair(R, x, ctx.N, n, i, j)


def apply_r_chain(ctx: QContext, x, n: int, inverse=False):
    """Apply D^{(n-1)} (x) 1 (R) = R_{1,n+1} R_{2,n+1} ... R_{n,n+1} on n+1 legs."""
    legs = range(1, n + 1) if inverse else range(n, 0, -1)
    out = np.asarray(x, dtype=complex)
    for i in legs:
        out = apply_r_pair(ctx, out, n + 1, i, n + 1, inverse=inverse)
    return out


def apply_r_chain_first(ctx: QContext, x, k: int):
    """Apply 1 (x) D^{(k-1)} (R) = R_{1,k+1} R_{1,k} ... R_{1,2} on k+1 legs."""
    out = np.asarray(x, dtype=complex)
    for j in range(2, k + 2):
        out = apply_r_pair(ctx, out, k + 1, 1, j)
    return out


def r_chain(ctx: QContext, n: int) -> np.ndarray:
    """Dense D^{(n-1)} (x) 1 (R) on V^{(x)(n+1)} (within the dense cap)."""
    if n + 1 > ctx.dense_cap:
        raise ValueError(f"{n + 1} legs above dense cap {ctx.dense_cap}")
    return legops.dense(lambda X: apply_r_chain(ctx, X, n), ctx.N ** (n + 1))


def apply_r_full(ctx: QContext, x, n: int):
    """Apply R^{(n)} = R_12 (R_13 R_23) ... (R_1n ... R_{n-1,n}) on n legs."""
    out = np.asarray(x, dtype=complex)
    for k in range(n, 1, -1):
        for j in range(k - 1, 0, -1):
            out = apply_r_pair(ctx, out, n, j, k)
    return out


def apply_r_group(ctx: QContext, x, h: int, k: int):
    """Apply (D^{(h-1)} (x) D^{(k-1)})(R) coupling leg groups (1..h) and (h+1..h+k)."""
    if h == 0 or k == 0:
        return np.asarray(x, dtype=complex)
    out = np.asarray(x, dtype=complex)
    n = h + k
    for i in range(h, 0, -1):
        for j in range(h + 1, n + 1):
            out = apply_r_pair(ctx, out, n, i, j)
    return out


def theta_exponent(ctx: QContext, lam, mu) -> Fraction:
    """Exact exponent of Theta on the V_mu summand of V_lam (x) V."""
    kap = fundamental_weight(ctx, 1)
    return (casimir_exp(ctx, lam) + casimir_exp(ctx, kap) - casimir_exp(ctx, mu)) / 2


def theta_block_scalar(ctx: QContext, lam, mu) -> complex:
    return ctx.qpow(theta_exponent(ctx, lam, mu))


def theta_power_exponent(ctx: QContext, n: int, mu) -> Fraction:
    """Exact exponent of Theta^{(n)} on a V_mu summand of V^{(x)n}."""
    kap = fundamental_weight(ctx, 1)
    return (n * casimir_exp(ctx, kap) - casimir_exp(ctx, mu)) / 2


def rbar_on_block(ctx: QContext, lam, chain: np.ndarray, decomp) -> np.ndarray:
    """Unitarized coboundary on V_lam (x) V: chain composed with Theta scalars.

    chain is the compression of D^{(n-1)} (x) 1 (R) to the block (x) V and
    decomp its Weyl decomposition; complete reducibility (guaranteed for
    lam in the open alcove) makes the Theta branch unambiguous.  With the
    block basis orthonormal for the Wenzl form the returned matrix *is*
    the Gram form of the product space, selfadjoint w.r.t. it.
    """
    theta = np.zeros_like(chain)
    for mu in dict.fromkeys(decomp.weights()):
        theta = theta + theta_block_scalar(ctx, lam, mu) * decomp.isotypic_projection(mu)
    return chain @ theta


def sqrt_branch_candidates(ctx: QContext, k: int) -> list:
    """Admissible half-exponents s for the factor D^{(k)} (x) 1 (Theta).

    s = (c(mu) - c(lam) - c(kappa))/2 over classical highest weights lam of
    V^{(x)(k+1)} and dominant successors mu = lam + box.
    """
    kap = fundamental_weight(ctx, 1)
    cands = set()
    for lam in classical_power_multiplicities(ctx, zero_weight(ctx), k + 1):
        for i in range(1, ctx.N + 1):
            mu = add_box(ctx, lam, i)
            if mu is None:
                continue
            s = (casimir_exp(ctx, mu) - casimir_exp(ctx, lam) - casimir_exp(ctx, kap)) / 2
            cands.add(s)
    return sorted(cands)


def _spectral_theta(ctx: QContext, X: np.ndarray, cands: list) -> np.ndarray:
    """Square root X^{-1/2} with branch chosen from the candidate exponent set.

    X has eigenvalues q^{2s}; the root takes q^{-s} on the matching
    eigenspace.  Raises BranchCollision when two admissible exponents with
    s = s' (mod ell) but s != s' (mod 2 ell) match one eigenvalue, or when
    X fails to diagonalize cleanly.
    """
    vals, vecs = scipy.linalg.eig(X)
    cond = np.linalg.cond(vecs)
    if cond > 1e8:
        raise BranchCollision(f"non-diagonalizable Casimir factor (cond={cond:.1e})")
    roots = np.zeros(len(vals), dtype=complex)
    for idx, v in enumerate(vals):
        matches = [s for s in cands if abs(ctx.qpow(2 * s) - v) < 1e-6]
        if not matches:
            raise ValueError(f"eigenvalue {v} matches no admissible exponent")
        # s and s' give the same root q^{-s} iff s = s' (mod 2 ell)
        root_vals = {Fraction(s) % (2 * ctx.ell): s for s in matches}
        if len(root_vals) > 1:
            raise BranchCollision(
                f"eigenvalue {v:.6f} admits exponents {sorted(root_vals.values())}"
            )
        roots[idx] = ctx.qpow(-root_vals.popitem()[1])
    return vecs @ (roots[:, None] * np.linalg.inv(vecs))


def rbar_full(ctx: QContext, n: int) -> np.ndarray:
    """Dense coboundary R^{(n)} Theta^{(n)} on the full power V^{(x)n}.

    Built as the ordered product of the factors D^{(k)} (x) 1 (RTheta),
    each Theta factor obtained by spectral square root of the explicit
    D^{(k)} (x) 1 (R_21 R) with branch matching; collisions abort.
    """
    if n > ctx.dense_cap:
        raise ValueError(f"n={n} above dense cap {ctx.dense_cap}")
    N = ctx.N
    dim = N**n
    out = np.eye(dim, dtype=complex)
    for k in range(0, n - 1):
        m = k + 2  # legs of this factor
        dm = N**m
        chain = legops.dense(lambda X: apply_r_chain(ctx, X, m - 1), dm)
        # D^{(k)} (x) 1 (R_21) as the block-swap conjugate of 1 (x) D^{(k)} (R)
        first = legops.dense(lambda X: apply_r_chain_first(ctx, X, m - 1), dm)
        swap = legops.dense(lambda X: legops.swap_blocks(X, N, 1, m - 1), dm)
        swap_back = legops.dense(lambda X: legops.swap_blocks(X, N, m - 1, 1), dm)
        r21 = swap @ first @ swap_back
        theta = _spectral_theta(ctx, r21 @ chain, sqrt_branch_candidates(ctx, k))
        factor = chain @ theta
        out = out @ legops.dense(lambda X: legops.apply_left(factor, X, N ** (n - m)), dim)
    return out


def coboundary_sigma(ctx: QContext, n: int) -> np.ndarray:
    """sigma_n = Sigma_n R^{(n)}-bar: the coboundary involution on V^{(x)n}."""
    if n == 1:
        return np.eye(ctx.N, dtype=complex)
    rb = rbar_full(ctx, n)
    return legops.dense(lambda X: legops.reverse_legs(X, ctx.N, n), ctx.N**n) @ rb
