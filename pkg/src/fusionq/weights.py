"""Type A_{N-1} weight combinatorics.

Weights are stored as partitions (lambda_1 >= ... >= lambda_{N-1} >= 0);
the traceless embedding into R^N is computed on demand with exact
rationals over N, so alcove and degree tests are exact integer checks.
Lists of weights are produced in lexicographic order everywhere; block
indices downstream depend on that ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod

from .errors import AlcoveViolation
from .scalars import QContext

Weight = tuple  # partition (lambda_1, ..., lambda_{N-1}), entries int >= 0


def as_weight(ctx: QContext, lam) -> Weight:
    lam = tuple(int(x) for x in lam)
    if len(lam) != ctx.N - 1:
        raise ValueError(f"expected {ctx.N - 1} parts, got {lam}")
    if any(a < b for a, b in zip(lam, lam[1:])) or (lam and lam[-1] < 0):
        raise ValueError(f"{lam} is not weakly decreasing >= 0")
    return lam


def zero_weight(ctx: QContext) -> Weight:
    return (0,) * (ctx.N - 1)


def fundamental_weight(ctx: QContext, i: int) -> Weight:
    """omega_i as a partition: i leading ones."""
    return (1,) * i + (0,) * (ctx.N - 1 - i)


def rho(ctx: QContext) -> Weight:
    """Half-sum of positive roots, rho = (N-1, N-2, ..., 1)."""
    return tuple(range(ctx.N - 1, 0, -1))


def e_coords(ctx: QContext, lam) -> tuple:
    """Traceless embedding sum(lam_i e_i) - (|lam|/N) e, as exact Fractions.

    Accepts a partition (length N-1) or a ready-made length-N vector,
    which is passed through; simple roots e_i - e_{i+1} can be fed to
    pairing() directly in the latter form.
    """
    lam = tuple(lam)
    if len(lam) == ctx.N:
        return tuple(Fraction(x) for x in lam)
    if len(lam) != ctx.N - 1:
        raise ValueError(f"bad coordinate length {len(lam)} for N={ctx.N}")
    total = Fraction(sum(lam), ctx.N)
    return tuple(Fraction(x) - total for x in lam + (0,))


def simple_root(ctx: QContext, i: int) -> tuple:
    """alpha_i = e_i - e_{i+1} in e-coordinates (1 <= i <= N-1)."""
    v = [0] * ctx.N
    v[i - 1], v[i] = 1, -1
    return tuple(v)


def pairing(ctx: QContext, lam, mu) -> Fraction:
    """Invariant bilinear form with <alpha,alpha> = 2 on short roots.

    Exact rational with denominator dividing N, computed in e-coordinates.
    """
    a, b = e_coords(ctx, lam), e_coords(ctx, mu)
    return sum(x * y for x, y in zip(a, b))


def casimir_exp(ctx: QContext, lam) -> Fraction:
    """<lam, lam + 2 rho>, the ribbon exponent of the Weyl module V_lam."""
    two_rho = tuple(2 * r for r in rho(ctx))
    return pairing(ctx, lam, lam) + pairing(ctx, lam, two_rho)


def in_open_alcove(ctx: QContext, lam) -> bool:
    lam = tuple(lam)
    return not lam or lam[0] <= ctx.ell - ctx.N


def in_closed_alcove(ctx: QContext, lam) -> bool:
    lam = tuple(lam)
    return not lam or lam[0] <= ctx.ell - ctx.N + 1


def enumerate_alcove(ctx: QContext) -> list:
    """All dominant weights with lambda_1 <= ell - N, lexicographically."""
    cap = ctx.ell - ctx.N

    def extend(prefix, bound, slots):
        if slots == 0:
            yield prefix
            return
        for v in range(bound + 1):
            yield from extend(prefix + (v,), v, slots - 1)

    return sorted(extend((), cap, ctx.N - 1))


def add_box(ctx: QContext, lam, i: int):
    """lam + gamma_i (add a box in row i, 1 <= i <= N); None if not dominant.

    Row N adds a full-column completion: the extended tuple is renormalized
    by subtracting the last entry.
    """
    ext = list(lam) + [0]
    ext[i - 1] += 1
    if any(ext[j] < ext[j + 1] for j in range(ctx.N - 1)):
        return None
    last = ext[-1]
    return tuple(x - last for x in ext[:-1])


@dataclass(frozen=True)
class FusionStep:
    """Successor weights of lam under - (x) V, split by alcove membership."""

    kept: tuple
    negligible: tuple


def fusion_step(ctx: QContext, lam) -> FusionStep:
    """Minuscule fusion of V_lam (x) V for lam in the open alcove.

    kept lists the successors inside the open alcove; negligible is empty
    unless lambda_1 = ell - N, in which case it is {lam + omega_1}.
    """
    lam = as_weight(ctx, lam)
    if not in_open_alcove(ctx, lam):
        raise AlcoveViolation(f"{lam} outside open alcove at ell={ctx.ell}")
    kept, negligible = [], []
    for i in range(1, ctx.N + 1):
        mu = add_box(ctx, lam, i)
        if mu is None:
            continue
        (kept if in_open_alcove(ctx, mu) else negligible).append(mu)
    return FusionStep(tuple(sorted(kept)), tuple(sorted(negligible)))


def truncated_power_multiplicities(ctx: QContext, n: int) -> dict:
    """Multiplicities of the truncated power p_n V^{(x)n}, by iterated fusion."""
    mults = {zero_weight(ctx): 1}
    for _ in range(n):
        new = {}
        for lam, m in mults.items():
            for mu in fusion_step(ctx, lam).kept:
                new[mu] = new.get(mu, 0) + m
        mults = new
    return dict(sorted(mults.items()))


def classical_power_multiplicities(ctx: QContext, lam0, t: int) -> dict:
    """Multiplicities of V_mu in V_{lam0} (x) V^{(x)t} for classical sl_N."""
    mults = {as_weight(ctx, lam0): 1}
    for _ in range(t):
        new = {}
        for lam, m in mults.items():
            for i in range(1, ctx.N + 1):
                mu = add_box(ctx, lam, i)
                if mu is not None:
                    new[mu] = new.get(mu, 0) + m
        mults = new
    return dict(sorted(mults.items()))


def weight_invariants(ctx: QContext, lam) -> dict:
    """Degree (first power of V containing V_lam) and conjugate weight."""
    lam = as_weight(ctx, lam)
    deg = sum(lam)
    if ctx.N == 2:
        conj = lam
    else:
        top = lam[0]
        conj = (top,) + tuple(top - x for x in lam[:0:-1])
    return {"deg": deg, "conj": conj}


def degree(ctx: QContext, lam) -> int:
    return sum(lam)


def conjugate(ctx: QContext, lam) -> Weight:
    return weight_invariants(ctx, lam)["conj"]


def thresholds(ctx: QContext) -> dict:
    """m = (N-1)(ell-N), the largest degree in the alcove, and m~ = m + ell - 1."""
    m = (ctx.N - 1) * (ctx.ell - ctx.N)
    return {"m": m, "m_tilde": m + ctx.ell - 1}


def dim_classical(ctx: QContext, lam) -> int:
    """Weyl dimension of V_lam for classical sl_N (exact integer)."""
    lam = tuple(lam) + (0,)
    a = [lam[i] + ctx.N - 1 - i for i in range(ctx.N)]
    num = prod(a[i] - a[j] for i in range(ctx.N) for j in range(i + 1, ctx.N))
    den = prod(j - i for i in range(ctx.N) for j in range(i + 1, ctx.N))
    assert num % den == 0
    return num // den


def qdim_weyl_product(ctx: QContext, lam) -> float:
    """q-Weyl dimension prod [a_i - a_j]_q / [j - i]_q; oracle for quantum_dimension."""
    from .scalars import q_int

    lam = tuple(lam) + (0,)
    a = [lam[i] + ctx.N - 1 - i for i in range(ctx.N)]
    out = 1.0
    for i in range(ctx.N):
        for j in range(i + 1, ctx.N):
            out *= q_int(ctx, a[i] - a[j]) / q_int(ctx, j - i)
    return out
