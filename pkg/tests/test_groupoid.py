import functools

import numpy as np
import pytest
from conftest import get_ctx, levels_for

from fusionq import groupoid as gpd
from fusionq.weights import thresholds, zero_weight

LEVEL_CAP = {(2, 3): 4, (2, 4): 8, (2, 5): 9, (3, 4): 8, (3, 5): 9}


@functools.lru_cache(maxsize=None)
def get_section(N, ell, policy="default", seed=0):
    ctx = get_ctx(N, ell)
    n_max = LEVEL_CAP[(N, ell)]
    if policy == "shifted":
        n_max = max(n_max, 2 * (thresholds(ctx)["m"] + N))
    levels = levels_for(N, ell, n_max)
    return gpd.Section(ctx, levels, policy=policy, seed=seed)


def wt(section, order):
    return gpd.enumerate_tuples(section, order)[0]


def test_section_examples():
    s = get_section(2, 3)
    assert s.h == {(0,): 0, (1,): 1}
    s34 = get_section(3, 4)
    assert s34.h[(1, 1)] == 2
    for lam in s34.alcove:
        ref = s34.ref[lam]
        assert np.abs(ref.Z @ ref.W - np.eye(ref.d)).max() < 1e-10


def test_level_isometries_are_unitary():
    s = get_section(2, 4)
    for L in (2, 3, 4):
        for gamma, U in s.level_isometries(L):
            assert np.abs(U.conj().T @ U - np.eye(U.shape[1])).max() < 1e-9


def test_delta_unit_examples():
    s = get_section(2, 3)
    P = gpd.delta_unit(s)
    for mu in s.alcove:
        d = s.ref[mu].d
        assert np.abs(P.ref_block(s, ((0,), mu)) - np.eye(d)).max() < 1e-10
    blk = P.ref_block(s, ((1,), (1,)))
    assert np.abs(blk @ blk - blk).max() < 1e-10
    assert np.linalg.matrix_rank(blk, tol=1e-8) == 1
    # P is idempotent but not the identity
    assert (P * P - P).ref_norm(s, wt(s, 2)) < 1e-9
    assert (P - gpd.identity_tensor(s, 2)).ref_norm(s, wt(s, 2)) > 1e-3


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (2, 5), (3, 4)])
def test_coproduct_axioms_9_2(N, ell, rng):
    s = get_section(N, ell)
    tps = wt(s, 2)
    P = gpd.delta_unit(s)
    one = gpd.coproduct(s, gpd.GroupoidElement.identity(s))
    assert (one - P).ref_norm(s, tps) < 1e-9
    w = gpd.GroupoidElement.random(s, rng)
    t = gpd.GroupoidElement.random(s, rng)
    lhs = gpd.coproduct(s, w * t)
    Dw, Dt = gpd.coproduct(s, w), gpd.coproduct(s, t)
    assert (lhs - Dw * Dt).ref_norm(s, tps) < 1e-8
    assert (P * Dw - Dw).ref_norm(s, tps) < 1e-8
    assert (Dw * P - Dw).ref_norm(s, tps) < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_eq_9_17_generator_compatibility(N, ell):
    s = get_section(N, ell)
    tps = wt(s, 2)
    P = gpd.delta_unit(s)
    for kind, i in [("E", 1), ("F", 1), ("K", 1), ("E", N - 1)]:
        Dpi = gpd.coproduct(s, gpd.pi(s, [(kind, i)]))
        pp = gpd.pi_tensor_coproduct(s, kind, i)
        assert (Dpi - pp * P).ref_norm(s, tps) < 1e-8
        assert (Dpi - P * pp).ref_norm(s, tps) < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (2, 5), (3, 4)])
def test_associators_thm_9_4(N, ell, rng):
    s = get_section(N, ell)
    t3 = wt(s, 3)
    phi, psi = gpd.associators(s)
    assert (phi * phi - phi).ref_norm(s, t3) < 1e-8
    assert (psi * psi - psi).ref_norm(s, t3) < 1e-8
    P = gpd.delta_unit(s)
    DdI = gpd.apply_delta_slot(s, P, 0)  # (D (x) 1) D(I)
    DId = gpd.apply_delta_slot(s, P, 1)  # (1 (x) D) D(I)
    assert (psi * phi - DdI).ref_norm(s, t3) < 1e-8
    assert (phi * psi - DId).ref_norm(s, t3) < 1e-8
    assert (phi * psi * phi - phi).ref_norm(s, t3) < 1e-8
    assert (psi * phi * psi - psi).ref_norm(s, t3) < 1e-8
    w = gpd.GroupoidElement.random(s, rng)
    Dw = gpd.coproduct(s, w)
    left = gpd.apply_delta_slot(s, Dw, 0)
    right = gpd.apply_delta_slot(s, Dw, 1)
    assert (phi * left - right * phi).ref_norm(s, t3) < 1e-8
    assert (psi * right - left * psi).ref_norm(s, t3) < 1e-8
    # strict quasi-coassociativity: the two bracketings genuinely differ
    assert (left - right).ref_norm(s, t3) > 1e-3


def test_phi_not_psi_phi_at_2_3():
    s = get_section(2, 3)
    phi, psi = gpd.associators(s)
    assert (phi - psi * phi).ref_norm(s, wt(s, 3)) > 1e-3


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_cocycle_9_13_and_counit(N, ell):
    s = get_section(N, ell)
    t4 = wt(s, 4)
    phi, _ = gpd.associators(s)
    lhs = gpd.apply_delta_slot(s, phi, 2) * gpd.apply_delta_slot(s, phi, 0)
    rhs = (
        gpd.pad_tensor(s, phi, 1, 0)
        * gpd.apply_delta_slot(s, phi, 1)
        * gpd.pad_tensor(s, phi, 0, 1)
    )
    assert (lhs - rhs).ref_norm(s, t4) < 1e-8
    P = gpd.delta_unit(s)
    tps = wt(s, 2)
    for slot in (0, 1, 2):
        contracted = gpd.apply_counit_slot(s, phi, slot)
        zero = zero_weight(s.ctx)
        resid = 0.0
        for lam, mu in tps:
            full = {0: (zero, lam, mu), 1: (lam, zero, mu), 2: (lam, mu, zero)}[slot]
            diff = contracted.ref_block(s, (lam, mu)) - P.ref_block(s, (lam, mu))
            resid = max(resid, np.abs(diff).max())
        assert resid < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_r_elements_9_14_9_15(N, ell, rng):
    s = get_section(N, ell)
    tps = wt(s, 2)
    R, R1 = gpd.r_elements(s)
    zero = zero_weight(s.ctx)
    assert np.abs(R.ref_block(s, (zero, zero)) - 1).max() < 1e-10
    P = gpd.delta_unit(s)
    Pop = gpd.opposite(s, P)
    assert (R * P - R).ref_norm(s, tps) < 1e-8
    assert (Pop * R - R).ref_norm(s, tps) < 1e-8
    assert (R1 * Pop - R1).ref_norm(s, tps) < 1e-8
    assert (P * R1 - R1).ref_norm(s, tps) < 1e-8
    w = gpd.GroupoidElement.random(s, rng)
    Dw = gpd.coproduct(s, w)
    Dop = gpd.opposite(s, Dw)
    assert (R * Dw * R1 - Dop).ref_norm(s, tps) < 1e-8
    assert (R1 * Dop * R - Dw).ref_norm(s, tps) < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_antipode_and_counit(N, ell, rng):
    s = get_section(N, ell)
    ctx = s.ctx
    S = gpd.Antipode(s)
    I = gpd.GroupoidElement.identity(s)
    assert (S(I) - I).norm_max() < 1e-9
    w = gpd.GroupoidElement.random(s, rng)
    t = gpd.GroupoidElement.random(s, rng)
    assert abs(gpd.counit(w * t, ctx) - gpd.counit(w, ctx) * gpd.counit(t, ctx)) < 1e-10
    assert abs(gpd.counit(w.adjoint(), ctx) - np.conj(gpd.counit(w, ctx))) < 1e-10
    assert (S(w * t) - S(t) * S(w)).norm_max() < 1e-8
    assert (S(w.adjoint()) - S(w).adjoint()).norm_max() < 1e-8
    # S^2 = K_{2rho}-conjugation
    ww = S(S(w))
    for lam in s.alcove:
        K = S.k2rho(lam)
        ref = np.linalg.inv(K) @ w.blocks[lam] @ K
        alt = K @ w.blocks[lam] @ np.linalg.inv(K)
        assert min(np.abs(ww.blocks[lam] - ref).max(), np.abs(ww.blocks[lam] - alt).max()) < 1e-8
    # dualized antipode axiom: m (S (x) 1) Delta = eps(.) I = m (1 (x) S) Delta
    Dw = gpd.coproduct(s, w)
    eps = gpd.counit(w, ctx)
    assert (S.mult_s_left(Dw) - eps * I).norm_max() < 1e-8
    assert (S.mult_s_right(Dw) - eps * I).norm_max() < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_pi_star_homomorphism_and_surjectivity(N, ell):
    s = get_section(N, ell)
    assert (gpd.pi(s, []) - gpd.GroupoidElement.identity(s)).norm_max() == 0
    for i in range(1, N):
        piE = gpd.pi(s, [("E", i)])
        piF = gpd.pi(s, [("F", i)])
        assert (piE.adjoint() - piF).norm_max() < 1e-9
    assert _pi_span_dimension(s) == sum(s.ref[lam].d ** 2 for lam in s.alcove)


def _pi_span_dimension(s, max_len=8):
    gens = [(k, i) for i in range(1, s.ctx.N) for k in ("E", "F", "K", "Kinv")]
    vecs = [np.concatenate([np.eye(s.ref[lam].d).ravel() for lam in s.alcove])]
    frontier = [[]]
    rank = 1
    target = sum(s.ref[lam].d ** 2 for lam in s.alcove)
    for _ in range(max_len):
        frontier = [w + [g] for w in frontier for g in gens]
        for word in frontier:
            el = gpd.pi(s, word)
            vecs.append(np.concatenate([el.blocks[lam].ravel() for lam in s.alcove]))
        rank = np.linalg.matrix_rank(np.vstack(vecs), tol=1e-8)
        if rank == target:
            break
    return rank


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_eq_9_18_coproduct_adjoint(N, ell, rng):
    s = get_section(N, ell)
    tps = wt(s, 2)
    rbar = gpd.pi_tensor_rbar(s)
    rbar_inv = gpd.GroupoidTensor(2, {t: np.linalg.inv(m) for t, m in rbar.blocks.items()})
    w = gpd.GroupoidElement.random(s, rng)
    lhs = gpd.coproduct(s, w).adjoint()
    rhs = rbar * gpd.coproduct(s, w.adjoint()) * rbar_inv
    assert (lhs - rhs).ref_norm(s, tps) < 1e-8


def test_cstar_identity(rng):
    s = get_section(2, 4)
    w = gpd.GroupoidElement.random(s, rng)
    assert abs((w.adjoint() * w).norm() - w.norm() ** 2) < 1e-8


def test_compare_sections_prop_9_10(rng):
    s = get_section(2, 4)
    rep = gpd.compare_sections(s, s, rng)
    assert max(rep.values()) < 1e-8
    seeded = get_section(2, 4, policy="seeded", seed=11)
    rep = gpd.compare_sections(s, seeded, rng)
    assert max(rep.values()) < 1e-8
    shifted = get_section(2, 4, policy="shifted")
    rep = gpd.compare_sections(s, shifted, rng)
    assert max(rep.values()) < 1e-8


def test_tensor_equivalence_data_q11_is_p():
    s = get_section(2, 3)
    Q, report = gpd.tensor_equivalence_data(s, 1, 1)
    P = gpd.delta_unit(s)
    assert (Q - P).ref_norm(s, wt(s, 2)) < 1e-9
    assert max(report.values()) < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4)])
def test_equivalence_hexagon_9_20(N, ell):
    s = get_section(N, ell)
    cap = None if (N, ell) == (2, 3) else 8
    for m, n, r in [(1, 1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2)]:
        resid = gpd.verify_equivalence_hexagon(s, m, n, r, sum_cap=cap)
        assert resid < 1e-8, (m, n, r, resid)


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_remark_9_6a_left_iterate_dominates(N, ell, rng):
    s = get_section(N, ell)
    w = gpd.GroupoidElement.random(s, rng)
    Dw = gpd.coproduct(s, w)
    left3 = gpd.apply_delta_slot(s, Dw, 0)
    right3 = gpd.apply_delta_slot(s, Dw, 1)
    P2 = gpd.left_unit_iterate(s, 2)
    assert (P2 * right3 * P2 - left3).ref_norm(s, wt(s, 3)) < 1e-8
    # order 4: fully right-nested bracketing
    left4 = gpd.apply_delta_slot(s, left3, 0)
    right4 = gpd.apply_delta_slot(s, right3, 2)
    P3 = gpd.left_unit_iterate(s, 3)
    assert (P3 * right4 * P3 - left4).ref_norm(s, wt(s, 4)) < 1e-8


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 4), (3, 4)])
def test_thm_9_11_support_positivity(N, ell):
    from fusionq.wenzl import kw_gram_on_columns

    s = get_section(N, ell)
    ctx = s.ctx
    P = gpd.delta_unit(s)
    right3 = gpd.apply_delta_slot(s, P, 1)
    left3 = gpd.apply_delta_slot(s, P, 0)
    for X in (left3, right3):
        D = X.blocks[(1, 1, 1)]  # the all-fundamental grades act on V (x) V (x) V
        assert np.abs(D @ D - D).max() < 1e-8
        u, sv, _ = np.linalg.svd(D)
        rank = int(np.sum(sv > 0.5))
        cols = u[:, :rank]
        _, G = kw_gram_on_columns(ctx, cols, 3)
        G = (G + G.conj().T) / 2
        assert np.linalg.eigvalsh(G).min() > 1e-8
