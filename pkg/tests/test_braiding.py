from fractions import Fraction

import numpy as np
import pytest
from conftest import get_ctx, levels_for

from fusionq import braiding, legops, uqrep
from fusionq.errors import BranchCollision


def dense_pair_op(ctx, fn, legs):
    return legops.dense(fn, ctx.N**legs)


def test_hecke_generator_examples():
    ctx = get_ctx(2, 5)
    q = ctx.q
    g = braiding.hecke_generator(ctx)
    vals = np.sort_complex(np.linalg.eigvals(g))
    ref = np.sort_complex(np.array([q, q, q, -1 / q]))
    assert np.abs(vals - ref).max() < 1e-10
    e11 = np.zeros(4)
    e11[0] = 1
    assert np.abs(g @ e11 - q * e11).max() < 1e-12
    ctx3 = get_ctx(3, 4)
    g3 = braiding.hecke_generator(ctx3)
    assert abs(np.trace(g3) - (3 * ctx3.q + 3 * (ctx3.q - 1 / ctx3.q))) < 1e-10


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 5), (3, 4), (3, 5)])
def test_hecke_quadratic_and_braid_relations(N, ell):
    ctx = get_ctx(N, ell)
    q = ctx.q
    g = braiding.hecke_generator(ctx)
    d = N * N
    assert np.abs((g - q * np.eye(d)) @ (g + np.eye(d) / q)).max() < 1e-10
    n = 3
    g1 = dense_pair_op(ctx, lambda x: legops.apply_pair(g, x, N, n, 1, 2), n)
    g2 = dense_pair_op(ctx, lambda x: legops.apply_pair(g, x, N, n, 2, 3), n)
    assert np.abs(g1 @ g2 @ g1 - g2 @ g1 @ g2).max() < 1e-9


def test_r_matrix_examples():
    ctx = get_ctx(2, 5)
    R = braiding.r_matrix(ctx)
    e11 = np.zeros(4)
    e11[0] = 1
    assert np.abs(R @ e11 - ctx.qpow(Fraction(1, 2)) * e11).max() < 1e-12
    # R* = R_21^{-1} w.r.t. the standard product form
    S = braiding.flip(ctx)
    R21 = S @ R @ S
    assert np.abs(R.conj().T - np.linalg.inv(R21)).max() < 1e-10


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4), (3, 5)])
def test_yang_baxter(N, ell):
    ctx = get_ctx(N, ell)
    n = 3
    R12 = dense_pair_op(ctx, lambda x: braiding.apply_r_pair(ctx, x, n, 1, 2), n)
    R13 = dense_pair_op(ctx, lambda x: braiding.apply_r_pair(ctx, x, n, 1, 3), n)
    R23 = dense_pair_op(ctx, lambda x: braiding.apply_r_pair(ctx, x, n, 2, 3), n)
    assert np.abs(R12 @ R13 @ R23 - R23 @ R13 @ R12).max() < 1e-9


@pytest.mark.parametrize("N,ell", [(2, 4), (3, 4)])
def test_r_intertwines_coproduct(N, ell):
    ctx = get_ctx(N, ell)
    R = braiding.r_matrix(ctx)
    S = braiding.flip(ctx)
    pair = uqrep.power_module(ctx, 2)
    for kind in ("E", "F", "K"):
        for i in range(1, N):
            a = pair.gen(kind, i)
            aop = S @ a @ S  # opposite coproduct
            assert np.abs(aop @ R - R @ a).max() < 1e-9


def test_r_chain_examples():
    ctx = get_ctx(2, 4)
    assert np.abs(braiding.r_chain(ctx, 1) - braiding.r_matrix(ctx)).max() < 1e-12
    # n = 2: R_13 R_23 on three legs
    n = 3
    R13 = dense_pair_op(ctx, lambda x: braiding.apply_r_pair(ctx, x, n, 1, 3), n)
    R23 = dense_pair_op(ctx, lambda x: braiding.apply_r_pair(ctx, x, n, 2, 3), n)
    assert np.abs(braiding.r_chain(ctx, 2) - R13 @ R23).max() < 1e-10


@pytest.mark.parametrize("N,ell,n", [(2, 4, 2), (2, 4, 3), (3, 4, 2)])
def test_r_chain_is_natural(N, ell, n):
    # Sigma_{n,1} D^{(n-1)} (x) 1 (R) intertwines the full coproduct action
    ctx = get_ctx(N, ell)
    dim = N ** (n + 1)
    chain = legops.dense(lambda x: braiding.apply_r_chain(ctx, x, n), dim)
    swap = legops.dense(lambda x: legops.swap_blocks(x, N, n, 1), dim)
    eps = swap @ chain
    mod = uqrep.power_module(ctx, n + 1)
    for kind in ("E", "F", "K"):
        for i in range(1, N):
            a = mod.gen(kind, i)
            assert np.abs(eps @ a - a @ eps).max() < 1e-9


def test_theta_block_scalar_examples():
    ctx = get_ctx(2, 5)
    assert braiding.theta_exponent(ctx, (1,), (0,)) == Fraction(3, 2)
    assert braiding.theta_exponent(ctx, (1,), (2,)) == Fraction(-1, 2)
    assert braiding.theta_exponent(ctx, (0,), (1,)) == 0
    assert abs(braiding.theta_block_scalar(ctx, (1,), (0,)) - ctx.qpow(Fraction(3, 2))) < 1e-12


def _theta_on_pair(ctx):
    pair = uqrep.power_module(ctx, 2)
    decomp = uqrep.weyl_decompose(ctx, pair)
    kap = (1,) + (0,) * (ctx.N - 2)
    theta = sum(
        braiding.theta_block_scalar(ctx, kap, mu) * decomp.isotypic_projection(mu)
        for mu in decomp.weights()
    )
    return theta


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 5), (3, 4)])
def test_lemma_3_2_and_prop_3_3(N, ell):
    ctx = get_ctx(N, ell)
    R = braiding.r_matrix(ctx)
    S = braiding.flip(ctx)
    theta = _theta_on_pair(ctx)
    # Theta_21 R = R Theta
    assert np.abs(S @ theta @ S @ R - R @ theta).max() < 1e-9
    rbar = R @ theta
    # Rbar* = Rbar = Rbar_21^{-1}
    assert np.abs(rbar - rbar.conj().T).max() < 1e-9
    assert np.abs(rbar - np.linalg.inv(S @ rbar @ S)).max() < 1e-9


def test_rbar_full_base_case_matches_block_route():
    for N, ell in [(2, 3), (2, 5), (3, 4)]:
        ctx = get_ctx(N, ell)
        ref = braiding.r_matrix(ctx) @ _theta_on_pair(ctx)
        assert np.abs(braiding.rbar_full(ctx, 2) - ref).max() < 1e-9


def test_rbar_full_selfadjoint_and_consistent_with_levels():
    ctx = get_ctx(2, 5)
    for n in (2, 3, 4):
        rb = braiding.rbar_full(ctx, n)
        assert np.abs(rb - rb.conj().T).max() < 1e-9
        levels = levels_for(2, 5, n)
        lev = levels.level(n)
        # inductive Gram route: Rbar^{(n)} W_n = Z_n^+
        assert np.abs(rb @ lev.W - lev.Z.conj().T).max() < 1e-8


def test_rbar_full_associativity_right_nested():
    # Prop 3.5: Rbar^{(3)} = 1 (x) Rbar^{(2)} . 1 (x) D(Rbar)
    ctx = get_ctx(2, 5)
    N = ctx.N
    dim = N**3
    rb2 = braiding.rbar_full(ctx, 2)
    chain_first = legops.dense(lambda x: braiding.apply_r_chain_first(ctx, x, 2), dim)
    rot_fwd = legops.dense(lambda x: legops.swap_blocks(x, N, 2, 1), dim)  # leg 3 to front
    rot_back = legops.dense(lambda x: legops.swap_blocks(x, N, 1, 2), dim)
    chain = legops.dense(lambda x: braiding.apply_r_chain(ctx, x, 2), dim)
    X = (rot_fwd @ chain @ rot_back) @ chain_first  # 1 (x) D(R_21 R)
    theta = braiding._spectral_theta(ctx, X, braiding.sqrt_branch_candidates(ctx, 1))
    rhs = np.kron(np.eye(N), rb2) @ (chain_first @ theta)
    assert np.abs(braiding.rbar_full(ctx, 3) - rhs).max() < 1e-8


def test_branch_collision_detected():
    # (2,3) at n=3: exponents 1 and -2 collide mod ell
    with pytest.raises(BranchCollision):
        braiding.rbar_full(get_ctx(2, 3), 3)
    # (3,4) at n=3: exponents 4/3 and -8/3 collide mod ell
    with pytest.raises(BranchCollision):
        braiding.rbar_full(get_ctx(3, 4), 3)


def test_sigma_examples():
    ctx = get_ctx(2, 5)
    assert np.abs(braiding.coboundary_sigma(ctx, 1) - np.eye(2)).max() < 1e-12
    # hand-built sigma_2 = Sigma R Theta with spectral Theta from the g-projector
    q = ctx.q
    g = braiding.hecke_generator(ctx)
    Panti = (q * np.eye(4) - g) / (q + 1 / q)
    # Theta is q^{-1/2} on the (2)-part and q^{3/2} on the (0)-part
    theta = ctx.qpow(Fraction(-1, 2)) * (np.eye(4) - Panti) + ctx.qpow(Fraction(3, 2)) * Panti
    S = braiding.flip(ctx)
    ref = S @ braiding.r_matrix(ctx) @ theta
    assert np.abs(braiding.coboundary_sigma(ctx, 2) - ref).max() < 1e-10


@pytest.mark.parametrize("N,ell,nmax", [(2, 5, 4), (3, 5, 3)])
def test_sigma_squares_to_identity(N, ell, nmax):
    ctx = get_ctx(N, ell)
    for n in range(2, nmax + 1):
        sig = braiding.coboundary_sigma(ctx, n)
        assert np.abs(sig @ sig - np.eye(N**n)).max() < 1e-9
