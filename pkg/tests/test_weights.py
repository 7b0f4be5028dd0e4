from fractions import Fraction

import pytest

from fusionq.errors import AlcoveViolation
from fusionq.scalars import QContext
from fusionq.weights import (
    casimir_exp,
    classical_power_multiplicities,
    conjugate,
    degree,
    dim_classical,
    enumerate_alcove,
    fusion_step,
    pairing,
    simple_root,
    thresholds,
    truncated_power_multiplicities,
    weight_invariants,
    zero_weight,
)


def brute_alcove(N, ell):
    # independent enumeration: all tuples, filtered
    cap = ell - N
    out = []

    def rec(prefix):
        if len(prefix) == N - 1:
            out.append(tuple(prefix))
            return
        hi = prefix[-1] if prefix else cap
        for v in range(hi + 1):
            rec(prefix + [v])

    rec([])
    return sorted(out)


def test_enumerate_alcove_examples():
    assert enumerate_alcove(QContext(2, 3)) == [(0,), (1,)]
    assert enumerate_alcove(QContext(2, 5)) == [(0,), (1,), (2,), (3,)]
    assert enumerate_alcove(QContext(3, 4)) == [(0, 0), (1, 0), (1, 1)]


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 6), (3, 4), (3, 6), (4, 6)])
def test_enumerate_alcove_brute_force(N, ell):
    assert enumerate_alcove(QContext(N, ell)) == brute_alcove(N, ell)


def test_pairing_examples():
    for N, ell in [(2, 3), (3, 4), (4, 5)]:
        ctx = QContext(N, ell)
        a1 = simple_root(ctx, 1)
        assert pairing(ctx, a1, a1) == 2
    ctx = QContext(2, 3)
    assert pairing(ctx, (1,), (1,)) == Fraction(1, 2)
    assert pairing(ctx, (1,), (0,)) == 0


def test_casimir_examples():
    assert casimir_exp(QContext(2, 3), (1,)) == Fraction(3, 2)
    assert casimir_exp(QContext(2, 3), (0,)) == 0
    assert casimir_exp(QContext(3, 4), (1, 0)) == Fraction(8, 3)
    assert casimir_exp(QContext(2, 3), (2,)) == 4


def test_fusion_step_examples():
    step = fusion_step(QContext(2, 3), (1,))
    assert step.kept == ((0,),) and step.negligible == ((2,),)
    # (1,0) + gamma_3 is not dominant for sl_3, so only (1,1) survives
    step = fusion_step(QContext(3, 4), (1, 0))
    assert step.kept == ((1, 1),) and step.negligible == ((2, 0),)
    step = fusion_step(QContext(2, 5), (1,))
    assert step.kept == ((0,), (2,)) and step.negligible == ()
    with pytest.raises(AlcoveViolation):
        fusion_step(QContext(2, 3), (2,))


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 5), (3, 4), (3, 5)])
def test_fusion_step_negligible_iff_wall(N, ell):
    ctx = QContext(N, ell)
    for lam in enumerate_alcove(ctx):
        step = fusion_step(ctx, lam)
        assert len(set(step.kept + step.negligible)) == len(step.kept + step.negligible)
        if lam and lam[0] == ell - N:
            lam_plus = (lam[0] + 1,) + lam[1:]
            assert step.negligible == (lam_plus,)
        else:
            assert step.negligible == ()


def test_truncated_power_multiplicities_examples():
    assert truncated_power_multiplicities(QContext(2, 3), 3) == {(1,): 1}
    assert truncated_power_multiplicities(QContext(3, 4), 0) == {(0, 0): 1}
    assert truncated_power_multiplicities(QContext(2, 4), 3) == {(1,): 2}


def test_classical_power_multiplicities_examples():
    ctx = QContext(2, 9)
    assert classical_power_multiplicities(ctx, (2,), 2) == {(0,): 1, (2,): 2, (4,): 1}
    assert classical_power_multiplicities(ctx, (3,), 0) == {(3,): 1}
    # 3 (x) 3 (x) 3 = 10 + 2*8 + 1; the adjoint is partition (2,1)
    ctx3 = QContext(3, 9)
    assert classical_power_multiplicities(ctx3, (0, 0), 3) == {
        (0, 0): 1,
        (2, 1): 2,
        (3, 0): 1,
    }


@pytest.mark.parametrize("N,ell,n", [(2, 5, 6), (3, 4, 5), (4, 6, 4)])
def test_classical_total_dimension(N, ell, n):
    ctx = QContext(N, ell)
    mults = classical_power_multiplicities(ctx, zero_weight(ctx), n)
    assert sum(m * dim_classical(ctx, lam) for lam, m in mults.items()) == N**n


def test_weight_invariants_examples():
    ctx = QContext(3, 7)
    inv = weight_invariants(ctx, (2, 1))
    assert inv == {"deg": 3, "conj": (2, 1)}
    assert weight_invariants(ctx, (0, 0)) == {"deg": 0, "conj": (0, 0)}
    assert weight_invariants(QContext(2, 7), (3,)) == {"deg": 3, "conj": (3,)}
    assert weight_invariants(QContext(4, 8), (3, 2, 1))["conj"] == (3, 2, 1)
    assert weight_invariants(QContext(3, 9), (4, 1))["conj"] == (4, 3)


@pytest.mark.parametrize("N,ell", [(2, 4), (3, 5), (4, 6)])
def test_conjugate_degree_identity(N, ell):
    ctx = QContext(N, ell)
    for lam in enumerate_alcove(ctx):
        assert degree(ctx, lam) + degree(ctx, conjugate(ctx, lam)) == N * lam[0] if lam else True
        assert conjugate(ctx, conjugate(ctx, lam)) == lam


def test_thresholds_examples():
    assert thresholds(QContext(2, 3)) == {"m": 1, "m_tilde": 3}
    assert thresholds(QContext(3, 4)) == {"m": 2, "m_tilde": 5}
    assert thresholds(QContext(2, 5)) == {"m": 3, "m_tilde": 7}


@pytest.mark.parametrize("N,ell", [(2, 3), (2, 5), (3, 4), (3, 5)])
def test_threshold_is_max_alcove_degree(N, ell):
    ctx = QContext(N, ell)
    m = thresholds(ctx)["m"]
    assert m == max(degree(ctx, lam) for lam in enumerate_alcove(ctx))


def test_dim_classical():
    ctx = QContext(3, 5)
    assert dim_classical(ctx, (0, 0)) == 1
    assert dim_classical(ctx, (1, 0)) == 3
    assert dim_classical(ctx, (1, 1)) == 3
    assert dim_classical(ctx, (2, 1)) == 8
    assert dim_classical(ctx, (3, 0)) == 10
    assert dim_classical(QContext(2, 5), (3,)) == 4


def test_lemma_10_9_operational_form():
    # no negligible start reaches the trivial weight within the m~ window
    for N, ell in [(2, 3), (2, 4), (2, 5), (3, 4), (3, 5)]:
        ctx = QContext(N, ell)
        mt = thresholds(ctx)["m_tilde"]
        for lam in enumerate_alcove(ctx):
            if not lam or lam[0] != ell - N:
                continue
            start = (lam[0] + 1,) + lam[1:]
            for t in range(0, mt - degree(ctx, lam)):
                if t + degree(ctx, lam) + 1 <= mt:
                    mults = classical_power_multiplicities(ctx, start, t)
                    assert mults.get(zero_weight(ctx), 0) == 0
