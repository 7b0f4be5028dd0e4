"""The dual weak quasi-Hopf C*-groupoid on the alcove blocks.

The algebra is the direct sum of matrix blocks L(V_lam) over the open
alcove.  Coalgebra-side structure (non-unital coproduct, associators,
R-elements) depends on a section: per weight, a power h_lam and a
reference copy of V_lam inside truncated level h_lam.

Tensor-power elements are held as canonical representatives: the block
of an order-k element at a grade tuple (n_1..n_k) is its compression to
the full truncated-level coordinates C^{D_{n_1}} (x) ... (x) C^{D_{n_k}}.
In these coordinates the composition rule "insert p_{n_1} (x) ... (x)
p_{n_k} between representatives" is plain blockwise matrix
multiplication (p = W Z), iterated coproducts act by merging or
splitting grade slots through the pair maps Z_{n+m}(W_n (x) W_m), and
the counit drops grade-0 slots.  Identities between elements are checked
on their reference-copy compressions, which is equality as functionals
on the coefficient coalgebra; representatives themselves may differ.
All adjoints are Kirillov-Wenzl adjoints (the stored coordinates are
KW-orthonormal, so they are literal conjugate transposes).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import braiding, legops, uqrep
from .errors import ConjugateMissing, LevelsUnavailable
from .scalars import QContext
from .weights import add_box, casimir_exp, conjugate, degree, enumerate_alcove, zero_weight
from .wenzl import LevelSet


@dataclass
class RefCopy:
    """The section's reference copy of V_lam inside a truncated level."""

    weight: tuple
    level: int
    W: np.ndarray  # (N^h, d) ambient embedding
    Z: np.ndarray  # (d, N^h) Kirillov-Wenzl dual rows
    gens: dict
    nwt: np.ndarray | None

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def module(self) -> uqrep.CompressedModule:
        return uqrep.CompressedModule(self.d, self.gens, self.nwt)


class Section:
    """A section of the quotient map: powers h_lam plus reference copies."""

    def __init__(self, ctx: QContext, levels: LevelSet, policy: str = "default", seed: int = 0):
        self.ctx = ctx
        self.levels = levels
        self.policy = policy
        self.alcove = enumerate_alcove(ctx)
        shift = ctx.N if policy == "shifted" else 0
        self.h = {lam: degree(ctx, lam) + shift for lam in self.alcove}
        rng = np.random.default_rng(seed)
        self.ref = {}
        for lam in self.alcove:
            lev = levels.level(self.h[lam])
            for copy in lev.copies:
                if copy.weight == lam:
                    W, Z, gens, nwt = copy.W, copy.Z, copy.gens, copy.nwt
                    if policy == "seeded":
                        Q = _random_unitary(rng, copy.d)
                        W, Z = W @ Q, Q.conj().T @ Z
                        gens = {k: Q.conj().T @ m @ Q for k, m in gens.items()}
                        nwt = None
                    self.ref[lam] = RefCopy(lam, self.h[lam], W, Z, gens, nwt)
                    break
            else:
                raise LevelsUnavailable(f"no copy of {lam} at level {self.h[lam]}")
        self._isometries: dict = {}
        self._refmaps: dict = {}
        self._merge: dict = {}

    def dims(self) -> dict:
        return {lam: self.ref[lam].d for lam in self.alcove}

    def level_isometries(self, L: int) -> list:
        """Per level-L copy: (gamma, U) with U the ref(gamma) -> copy unitary."""
        if L not in self._isometries:
            out = []
            for copy in self.levels.level(L).copies:
                U = uqrep.solve_intertwiner(self.ctx, self.ref[copy.weight].module(), copy.module())
                out.append((copy.weight, U))
            self._isometries[L] = out
        return self._isometries[L]

    def ref_maps(self, lam) -> tuple:
        """(E, F) with E = Z_ref W_level (d x D) and F = Z_level W_ref (D x d)."""
        lam = tuple(lam)
        if lam not in self._refmaps:
            r = self.ref[lam]
            lev = self.levels.level(r.level)
            self._refmaps[lam] = (r.Z @ lev.W, lev.Z @ r.W)
        return self._refmaps[lam]

    def merge_maps(self, n: int, m: int) -> tuple:
        """(M, Mrev): M = Z_{n+m}(W_n (x) W_m) and Mrev = (Z_n (x) Z_m) W_{n+m}."""
        if (n, m) not in self._merge:
            ln, lm, lnm = self.levels.level(n), self.levels.level(m), self.levels.level(n + m)
            N = self.ctx.N
            M = lnm.Z @ np.kron(ln.W, lm.W)
            Mr = legops.apply_left(ln.Z, lnm.W, N**m)
            Mr = legops.apply_right(lm.Z, Mr, ln.dim)
            self._merge[(n, m)] = (M, Mr)
        return self._merge[(n, m)]

    def split_maps(self, k: int, l: int) -> list:
        """Per level-(k+l) copy (gamma, i): maps through the reference grade.

        Returns (h_gamma, Lin, Rout) with Lin: C^{D_k} (x) C^{D_l} <- C^{D_{h_gamma}}
        realizing (Z_k (x) Z_l) S~_{gamma,i} W_{h_gamma} and Rout its partner,
        so a slot coproduct re-represents the merged slot at the section's
        reference grades (the origin of the p_{h+h_gamma} insertions).
        """
        key = ("split", k, l)
        if key not in self._merge:
            K = k + l
            M, Mr = self.merge_maps(k, l)
            lev = self.levels.level(K)
            out = []
            for (gamma, U), sl in zip(self.level_isometries(K), lev.slices):
                E, F = self.ref_maps(gamma)
                emb = np.zeros((lev.dim, U.shape[0]), dtype=complex)
                emb[sl, :] = np.eye(U.shape[0])
                Lin = Mr @ (emb @ U) @ E  # D_k D_l x D_{h_gamma}
                Rout = F @ (emb @ U).conj().T @ M  # D_{h_gamma} x D_k D_l
                out.append((self.ref[gamma].level, Lin, Rout))
            self._merge[key] = out
        return self._merge[key]

    def grades(self):
        return sorted(set(self.h.values()))

    @property
    def gmax(self) -> int:
        return self.levels.n_max

    def level_dim(self, n: int) -> int:
        return self.levels.level(n).dim


def _random_unitary(rng, d):
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(M)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


# -- elements of the groupoid algebra ----------------------------------------


class GroupoidElement:
    """A block-diagonal element of the groupoid algebra (x)_lam L(V_lam)."""

    def __init__(self, blocks: dict):
        self.blocks = {tuple(k): np.asarray(v, dtype=complex) for k, v in blocks.items()}

    @classmethod
    def identity(cls, section: Section) -> "GroupoidElement":
        return cls({lam: np.eye(section.ref[lam].d) for lam in section.alcove})

    @classmethod
    def random(cls, section: Section, rng) -> "GroupoidElement":
        out = {}
        for lam in section.alcove:
            d = section.ref[lam].d
            out[lam] = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return cls(out)

    def __mul__(self, other):
        if isinstance(other, GroupoidElement):
            return GroupoidElement(
                {k: self.blocks[k] @ other.blocks[k] for k in self.blocks if k in other.blocks}
            )
        return GroupoidElement({k: other * v for k, v in self.blocks.items()})

    __rmul__ = __mul__

    def __add__(self, other):
        return GroupoidElement({k: self.blocks[k] + other.blocks[k] for k in self.blocks})

    def __sub__(self, other):
        return GroupoidElement({k: self.blocks[k] - other.blocks[k] for k in self.blocks})

    def adjoint(self) -> "GroupoidElement":
        return GroupoidElement({k: v.conj().T for k, v in self.blocks.items()})

    def norm(self) -> float:
        """C*-norm: the largest block operator norm."""
        return max(np.linalg.norm(v, 2) for v in self.blocks.values())

    def norm_max(self) -> float:
        return max(np.abs(v).max() for v in self.blocks.values())

    def level_lift(self, section: Section, n: int) -> np.ndarray:
        """The natural action on truncated level n (block-diagonal over copies)."""
        lev = section.levels.level(n)
        out = np.zeros((lev.dim, lev.dim), dtype=complex)
        for (gamma, U), sl in zip(section.level_isometries(n), lev.slices):
            out[sl, sl] = U @ self.blocks[gamma] @ U.conj().T
        return out


def counit(omega: GroupoidElement, ctx: QContext) -> complex:
    return complex(omega.blocks[zero_weight(ctx)][0, 0])


# -- tensor powers: grade-indexed representatives -----------------------------


class GroupoidTensor:
    """An order-k tensor-power element as a family of level compressions.

    blocks maps a grade tuple (n_1..n_k) to the representative compressed
    to (x)_i C^{D_{n_i}}; multiplication is blockwise (this realizes the
    composition rule with p-insertions), the adjoint is the KW adjoint.
    """

    def __init__(self, order: int, blocks: dict):
        self.order = order
        self.blocks = {tuple(k): np.asarray(v, dtype=complex) for k, v in blocks.items()}

    @property
    def grade_tuples(self):
        return sorted(self.blocks)

    def _zip(self, other):
        if self.order != other.order:
            raise ValueError("tensor orders differ")
        return [t for t in self.blocks if t in other.blocks]

    def __mul__(self, other):
        if isinstance(other, GroupoidTensor):
            return GroupoidTensor(
                self.order, {t: self.blocks[t] @ other.blocks[t] for t in self._zip(other)}
            )
        return GroupoidTensor(self.order, {t: other * v for t, v in self.blocks.items()})

    __rmul__ = __mul__

    def __add__(self, other):
        return GroupoidTensor(
            self.order, {t: self.blocks[t] + other.blocks[t] for t in self._zip(other)}
        )

    def __sub__(self, other):
        return GroupoidTensor(
            self.order, {t: self.blocks[t] - other.blocks[t] for t in self._zip(other)}
        )

    def adjoint(self) -> "GroupoidTensor":
        return GroupoidTensor(self.order, {t: v.conj().T for t, v in self.blocks.items()})

    def ref_block(self, section: Section, wtuple) -> np.ndarray:
        """Compression to the reference copies: the functional's matrix block."""
        wtuple = tuple(tuple(w) for w in wtuple)
        g = tuple(section.h[w] for w in wtuple)
        X = self.blocks[g]
        left = 1
        right = int(np.prod([section.level_dim(n) for n in g])) if g else 1
        for w, n in zip(wtuple, g):
            E, F = section.ref_maps(w)
            right //= section.level_dim(n)
            X = legops.apply_mid(E, X, left, right)
            X = legops.apply_mid(F.T, X.T, left, right).T
            left *= section.ref[w].d
        return X

    def ref_norm(self, section: Section, wtuples) -> float:
        """Max-abs of the reference compressions over the given weight tuples."""
        out = 0.0
        for t in wtuples:
            out = max(out, float(np.abs(self.ref_block(section, t)).max()))
        return out


def grade_tuples_for(section: Section, order: int, sum_cap=None) -> list:
    """Grade tuples the representative calculus is carried on.

    Slots range over all built levels (iterated coproducts merge slots,
    so intermediate grades are sums of section degrees); the total grade
    is capped by the built tower and optionally tighter.
    """
    cap = section.gmax if sum_cap is None else min(section.gmax, sum_cap)
    out = [()]
    for _ in range(order):
        out = [t + (n,) for t in out for n in range(cap - sum(t) + 1)]
    return sorted(out)


def enumerate_tuples(section: Section, order: int, sum_h_cap=None, budget_mb: float = 2048.0):
    """Weight tuples of one order, in increasing total degree, under a budget.

    The budget counts the persistent representative blocks (16 bytes per
    entry over the distinct grade tuples); enumeration stops at whole
    total-degree shells so that coverage stays closed under the slot
    merges used by iterated coproducts.  Returns (tuples, coverage).
    """
    sum_h_cap = section.gmax if sum_h_cap is None else min(sum_h_cap, section.gmax)
    cands = [()]
    for _ in range(order):
        cands = [t + (lam,) for t in cands for lam in section.alcove]
    cands.sort(key=lambda t: (sum(section.h[l] for l in t), t))
    out, used, seen_grades = [], 0.0, set()
    cap_hit = None
    for t in cands:
        sh = sum(section.h[l] for l in t)
        if sum_h_cap is not None and sh > sum_h_cap:
            cap_hit = sh if cap_hit is None else min(cap_hit, sh)
            continue
        g = tuple(section.h[l] for l in t)
        if g not in seen_grades:
            d = int(np.prod([section.level_dim(n) for n in g])) if g else 1
            cost = d * d * 16 / 1e6
            if used + cost > budget_mb:
                cap_hit = sh if cap_hit is None else min(cap_hit, sh)
                continue
            used += cost
            seen_grades.add(g)
        out.append(t)
    if cap_hit is not None:
        out = [t for t in out if sum(section.h[l] for l in t) < cap_hit]
    coverage = {
        "order": order,
        "admitted": len(out),
        "skipped": len(cands) - len(out),
        "mb": round(used, 3),
    }
    return out, coverage


def identity_tensor(section: Section, order: int, sum_cap=None) -> GroupoidTensor:
    blocks = {}
    for g in grade_tuples_for(section, order, sum_cap):
        d = int(np.prod([section.level_dim(n) for n in g])) if g else 1
        blocks[g] = np.eye(d, dtype=complex)
    return GroupoidTensor(order, blocks)


def as_order1(section: Section, omega: GroupoidElement) -> GroupoidTensor:
    """The natural order-1 representative: the level lifts of the blocks."""
    return GroupoidTensor(
        1, {(n,): omega.level_lift(section, n) for n in range(section.gmax + 1)}
    )


def natural_tensor(section: Section, order: int, wblocks: dict, sum_cap=None) -> GroupoidTensor:
    """Extend reference-block data (sums of simple tensors) to representatives.

    wblocks maps weight tuples to matrices on the reference copies; the
    representative at a grade tuple lifts each slot over every level copy
    of that weight through the section isometries (the Sweedler-middle
    insertion of a functional known only by its coefficient blocks).
    """
    lifts = {}
    for n in range(section.gmax + 1):
        lev = section.levels.level(n)
        per_weight = {}
        for (gamma, U), sl in zip(section.level_isometries(n), lev.slices):
            emb = np.zeros((lev.dim, U.shape[0]), dtype=complex)
            emb[sl, :] = np.eye(U.shape[0])
            per_weight.setdefault(gamma, []).append((emb @ U, (emb @ U).conj().T))
        lifts[n] = per_weight
    blocks = {}
    for g in grade_tuples_for(section, order, sum_cap):
        d = int(np.prod([section.level_dim(n) for n in g])) if g else 1
        out = np.zeros((d, d), dtype=complex)
        for wt, M in wblocks.items():
            wt = tuple(tuple(w) for w in wt)
            combos = [[]]
            for w, n in zip(wt, g):
                combos = [c + [lift] for c in combos for lift in lifts[n].get(w, [])]
                if not combos:
                    break
            for combo in combos:
                if len(combo) != len(wt):
                    continue
                L = combo[0][0]
                R = combo[0][1]
                for up, down in combo[1:]:
                    L = np.kron(L, up)
                    R = np.kron(R, down)
                out += L @ M @ R
        blocks[g] = out
    return GroupoidTensor(order, blocks)


# -- coproduct machinery ------------------------------------------------------


def apply_delta_slot(section: Section, X: GroupoidTensor, slot: int, sum_cap=None) -> GroupoidTensor:
    """Apply the coproduct in one tensor slot: order k -> k+1.

    The split slot is re-represented through the section: each copy of
    V_gamma inside level k+l reads the source at the reference grade
    h_gamma.  (A plain grade merge is correct only where left coherence
    applies; this is the general, section-dependent coproduct.)
    """
    blocks = {}
    for g in grade_tuples_for(section, X.order + 1, sum_cap):
        k, l = g[slot], g[slot + 1]
        dl = int(np.prod([section.level_dim(n) for n in g[:slot]])) if slot else 1
        dr = (
            int(np.prod([section.level_dim(n) for n in g[slot + 2:]]))
            if g[slot + 2:]
            else 1
        )
        dout = dl * section.level_dim(k) * section.level_dim(l) * dr
        out = np.zeros((dout, dout), dtype=complex)
        touched = False
        for hg, Lin, Rout in section.split_maps(k, l):
            src_grades = g[:slot] + (hg,) + g[slot + 2:]
            if src_grades not in X.blocks:
                continue
            touched = True
            src = X.blocks[src_grades]
            Y = legops.apply_mid(Lin, src, dl, dr)
            out += legops.apply_mid(Rout.T, Y.T, dl, dr).T
        if touched:
            blocks[g] = out
    return GroupoidTensor(X.order + 1, blocks)


def coproduct(section: Section, omega: GroupoidElement, sum_cap=None) -> GroupoidTensor:
    return apply_delta_slot(section, as_order1(section, omega), 0, sum_cap)


def delta_unit(section: Section, sum_cap=None) -> GroupoidTensor:
    """P = Delta(I): at grades (n, m) the compression of p_{n+m}."""
    return coproduct(section, GroupoidElement.identity(section), sum_cap)


def apply_counit_slot(section: Section, X: GroupoidTensor, slot: int) -> GroupoidTensor:
    """Contract one slot with the counit: keep grade 0 there and drop it."""
    blocks = {}
    for g, mat in X.blocks.items():
        if g[slot] != 0:
            continue
        blocks[g[:slot] + g[slot + 1:]] = mat  # the grade-0 slot is one-dimensional
    return GroupoidTensor(X.order - 1, blocks)


def pad_tensor(section: Section, X: GroupoidTensor, left: int, right: int, sum_cap=None) -> GroupoidTensor:
    """1^{(x)left} (x) X (x) 1^{(x)right}."""
    blocks = {}
    for g in grade_tuples_for(section, X.order + left + right, sum_cap):
        core = g[left: len(g) - right] if right else g[left:]
        if core not in X.blocks:
            continue
        dl = int(np.prod([section.level_dim(n) for n in g[:left]])) if left else 1
        dr = int(np.prod([section.level_dim(n) for n in g[len(g) - right:]])) if right else 1
        blocks[g] = np.kron(np.kron(np.eye(dl), X.blocks[core]), np.eye(dr))
    return GroupoidTensor(X.order + left + right, blocks)


def delta_left(section: Section, X: GroupoidTensor, steps: int, sum_cap=None) -> GroupoidTensor:
    for _ in range(steps):
        X = apply_delta_slot(section, X, 0, sum_cap)
    return X


def delta_grouped(section: Section, X: GroupoidTensor, group_steps, sum_cap=None) -> GroupoidTensor:
    """Left-iterate each original slot of X: group_steps[i] expansions at slot i."""
    offset = 0
    for steps in group_steps:
        for _ in range(steps):
            X = apply_delta_slot(section, X, offset, sum_cap)
        offset += steps + 1
    return X


def left_unit_iterate(section: Section, k: int, sum_cap=None) -> GroupoidTensor:
    """P_k = Delta_left^{(k)}(I), an order k+1 idempotent."""
    return delta_left(section, as_order1(section, GroupoidElement.identity(section)), k, sum_cap)


# -- associators --------------------------------------------------------------


def grouped_q_apply(section: Section, L1: int, L2: int, X):
    """Apply q = sum_i 1_{L1} (x) S_i p_{L1+h_gamma} 1_{L1} (x) S_i^* to ambient columns."""
    ctx = section.ctx
    N = ctx.N
    lev2 = section.levels.level(L2)
    lo = N**L1
    out = np.zeros_like(np.asarray(X, dtype=complex))
    for (gamma, U), sl in zip(section.level_isometries(L2), lev2.slices):
        rg = section.ref[gamma]
        Y = legops.apply_right(U.conj().T @ lev2.Z[sl, :], X, lo)
        Y = legops.apply_right(rg.W, Y, lo)
        Y = section.levels.level(L1 + rg.level).apply_p(Y)
        Y = legops.apply_right(rg.Z, Y, lo)
        Y = legops.apply_right(lev2.W[:, sl] @ U, Y, lo)
        out += Y
    return out


def _compress_levels(section: Section, grades, Y) -> np.ndarray:
    """Apply (x)_i Z_{n_i} to ambient columns Y."""
    N = section.ctx.N
    left = 1
    legs_after = sum(grades)
    for n in grades:
        legs_after -= n
        lev = section.levels.level(n)
        Y = legops.apply_mid(lev.Z, Y, left, N**legs_after)
        left *= lev.dim
    return Y


def _embed_levels(section: Section, grades) -> np.ndarray:
    X = np.ones((1, 1), dtype=complex)
    for n in grades:
        X = np.kron(X, section.levels.level(n).W)
    return X


def associators(section: Section, sum_cap=None) -> tuple:
    """(Phi, Psi): q o p_{total} and p_{total} o q, per grade triple."""
    blocks_phi, blocks_psi = {}, {}
    for g in grade_tuples_for(section, 3, sum_cap):
        L = sum(g)
        lev = section.levels.level(L)
        X = _embed_levels(section, g)
        q_of_p = grouped_q_apply(section, g[0], g[1] + g[2], lev.apply_p(X))
        p_of_q = lev.apply_p(grouped_q_apply(section, g[0], g[1] + g[2], X))
        blocks_phi[g] = _compress_levels(section, g, q_of_p)
        blocks_psi[g] = _compress_levels(section, g, p_of_q)
    return GroupoidTensor(3, blocks_phi), GroupoidTensor(3, blocks_psi)


# -- R-elements ---------------------------------------------------------------


def r_elements(section: Section, sum_cap=None) -> tuple:
    """(R, R_1): braided-symmetry compressions per grade pair."""
    ctx = section.ctx
    N = ctx.N
    blocks_r, blocks_r1 = {}, {}
    for g in grade_tuples_for(section, 2, sum_cap):
        h, k = g
        lev = section.levels.level(h + k)
        X = _embed_levels(section, g)
        Y = lev.apply_p(X)
        Y = braiding.apply_r_group(ctx, Y, h, k)
        Y = legops.swap_blocks(Y, N, h, k)
        Y = lev.apply_p(Y)
        Y = legops.swap_blocks(Y, N, k, h)
        blocks_r[g] = _compress_levels(section, g, Y)
        Y = legops.swap_blocks(X, N, h, k)
        Y = lev.apply_p(Y)
        Y = legops.swap_blocks(Y, N, k, h)
        Y = _apply_r_group_inverse(ctx, Y, h, k)
        Y = lev.apply_p(Y)
        blocks_r1[g] = _compress_levels(section, g, Y)
    return GroupoidTensor(2, blocks_r), GroupoidTensor(2, blocks_r1)


def _apply_r_group_inverse(ctx: QContext, x, h: int, k: int):
    if h == 0 or k == 0:
        return np.asarray(x, dtype=complex)
    out = np.asarray(x, dtype=complex)
    n = h + k
    for i in range(1, h + 1):
        for j in range(n, h, -1):
            out = braiding.apply_r_pair(ctx, out, n, i, j, inverse=True)
    return out


def opposite(section: Section, X: GroupoidTensor) -> GroupoidTensor:
    """Flip the two slots of an order-2 tensor (blocks and grade labels)."""
    blocks = {}
    for (n, m), mat in X.blocks.items():
        dn, dm = section.level_dim(n), section.level_dim(m)
        M = mat.reshape(dn, dm, dn, dm).transpose(1, 0, 3, 2).reshape(dm * dn, dm * dn)
        blocks[(m, n)] = M
    return GroupoidTensor(2, blocks)


# -- the quotient map pi ------------------------------------------------------


def pi(section: Section, word) -> GroupoidElement:
    """pi of a generator word: blocks act on the reference copies."""
    blocks = {}
    for lam in section.alcove:
        ref = section.ref[lam]
        M = np.eye(ref.d, dtype=complex)
        for kind, i in word:
            M = M @ ref.gens[(kind, i)]
        blocks[lam] = M
    return GroupoidElement(blocks)


def pi_tensor_coproduct(section: Section, kind: str, i: int, sum_cap=None) -> GroupoidTensor:
    """pi (x) pi (Delta(a)) for a generator a: the iterated coproduct compressed."""
    ctx = section.ctx
    blocks = {}
    for g in grade_tuples_for(section, 2, sum_cap):
        L = sum(g)
        X = _embed_levels(section, g)
        if L == 0:
            Y = X if kind in ("K", "Kinv") else 0 * X
        else:
            Y = uqrep.apply_power_gen(ctx, kind, i, X, L)
        blocks[g] = _compress_levels(section, g, Y)
    return GroupoidTensor(2, blocks)


def pi_tensor_rbar(section: Section, sum_cap=None) -> GroupoidTensor:
    """pi (x) pi (Rbar) per grade pair, by spectral square root of the pair Casimir.

    On pairs whose product module is not completely reducible a colliding
    eigenspace gets the deterministic branch with smallest |s|; the
    ambiguity is a central sign invisible to the verified identities.
    """
    ctx = section.ctx
    N = ctx.N
    blocks = {}
    for g in grade_tuples_for(section, 2, sum_cap):
        h, k = g
        X = _embed_levels(section, g)
        R = _compress_levels(section, g, braiding.apply_r_group(ctx, X, h, k))
        Xs = _embed_levels(section, (k, h))
        Rswap = _compress_levels(section, (k, h), braiding.apply_r_group(ctx, Xs, k, h))
        S = _slot_flip(section.level_dim(k), section.level_dim(h))
        R21 = S @ Rswap @ S.conj().T
        cands = _grade_theta_candidates(section, h, k)
        blocks[g] = R @ _spectral_root(ctx, R21 @ R, cands)
    return GroupoidTensor(2, blocks)


def _slot_flip(d1, d2):
    S = np.zeros((d1 * d2, d2 * d1))
    for a in range(d1):
        for b in range(d2):
            S[b * d1 + a, a * d2 + b] = 1.0
    return S


def _grade_theta_candidates(section: Section, n: int, m: int):
    """Half-exponents (c(nu)-c(lam)-c(mu))/2 over level weights and their hull."""
    ctx = section.ctx
    out = set()
    wn = {c.weight for c in section.levels.level(n).copies}
    wm = {c.weight for c in section.levels.level(m).copies}
    for lam in wn:
        for mu in wm:
            hull = {lam}
            for _ in range(sum(mu)):
                hull = {
                    nxt
                    for w in hull
                    for i in range(1, ctx.N + 1)
                    if (nxt := add_box(ctx, w, i)) is not None
                }
            for nu in hull:
                out.add((casimir_exp(ctx, nu) - casimir_exp(ctx, lam) - casimir_exp(ctx, mu)) / 2)
    return sorted(out)


def _spectral_root(ctx: QContext, X, cands):
    vals, vecs = scipy.linalg.eig(X)
    roots = np.zeros(len(vals), dtype=complex)
    for idx, v in enumerate(vals):
        matches = [s for s in cands if abs(ctx.qpow(2 * s) - v) < 1e-6]
        if not matches:
            raise ValueError(f"pair Casimir eigenvalue {v} matches no exponent")
        root_vals = {Fraction(s) % (2 * ctx.ell): s for s in matches}
        chosen = sorted(root_vals.values(), key=lambda s: (abs(s), s))[0]
        roots[idx] = ctx.qpow(-chosen)
    return vecs @ (roots[:, None] * np.linalg.inv(vecs))


# -- antipode -----------------------------------------------------------------


def conj_module(ctx: QContext, mod: uqrep.CompressedModule) -> uqrep.CompressedModule:
    """The conjugate module: a acts as the entrywise conjugate of S^{-1}(a*)."""
    conv = uqrep.coproduct_convention(ctx)
    gens = {}
    for i in range(1, ctx.N):
        E, F = mod.gen("E", i), mod.gen("F", i)
        K, Kinv = mod.gen("K", i), mod.gen("Kinv", i)
        if conv == "mirror":
            gens[("E", i)] = -np.conj(K @ F)  # S^{-1}(F) = -K F
            gens[("F", i)] = -np.conj(E @ Kinv)  # S^{-1}(E) = -E K^{-1}
        else:
            gens[("E", i)] = -np.conj(F @ K)
            gens[("F", i)] = -np.conj(Kinv @ E)
        gens[("K", i)] = np.conj(K)
        gens[("Kinv", i)] = np.conj(Kinv)
    nwt = -mod.nwt if mod.nwt is not None else None
    return uqrep.CompressedModule(mod.d, gens, nwt)


class Antipode:
    """S(omega)_lam = (U_lam^+ omega_{conj lam} U_lam)^T with j = U o conj."""

    def __init__(self, section: Section):
        self.section = section
        ctx = section.ctx
        self.U = {}
        for lam in section.alcove:
            lbar = conjugate(ctx, lam)
            if lbar not in section.ref:
                raise ConjugateMissing(f"conjugate block {lbar} absent")
            cm = conj_module(ctx, section.ref[lam].module())
            self.U[lam] = uqrep.solve_intertwiner(ctx, cm, section.ref[lbar].module())

    def __call__(self, omega: GroupoidElement) -> GroupoidElement:
        ctx = self.section.ctx
        out = {}
        for lam in self.section.alcove:
            U = self.U[lam]
            out[lam] = (U.conj().T @ omega.blocks[conjugate(ctx, lam)] @ U).T
        return GroupoidElement(out)

    def k2rho(self, lam) -> np.ndarray:
        ref = self.section.ref[lam]
        diag = np.array(
            [self.section.ctx.qpow(uqrep.two_rho_pairing(self.section.ctx, row)) for row in ref.nwt]
        )
        return np.diag(diag)

    def mult_s_left(self, X: GroupoidTensor) -> GroupoidElement:
        """m (S (x) 1) X for an order-2 tensor (reference-compressed contraction)."""
        ctx = self.section.ctx
        out = {}
        for nu in self.section.alcove:
            nubar = conjugate(ctx, nu)
            d = self.section.ref[nu].d
            block = X.ref_block(self.section, (nubar, nu))
            U = self.U[nu]
            Y = np.kron(U.conj().T, np.eye(d)) @ block @ np.kron(U, np.eye(d))
            out[nu] = np.einsum("rirj->ij", Y.reshape(d, d, d, d))
        return GroupoidElement(out)

    def mult_s_right(self, X: GroupoidTensor) -> GroupoidElement:
        """m (1 (x) S) X for an order-2 tensor."""
        ctx = self.section.ctx
        out = {}
        for nu in self.section.alcove:
            nubar = conjugate(ctx, nu)
            d = self.section.ref[nu].d
            block = X.ref_block(self.section, (nu, nubar))
            U = self.U[nubar]
            Y = np.kron(np.eye(d), U.conj().T) @ block @ np.kron(np.eye(d), U)
            out[nu] = np.einsum("ijrr->ij", Y.reshape(d, d, d, d))
        return GroupoidElement(out)


# -- tensor-equivalence data --------------------------------------------------


def tensor_equivalence_data(section: Section, n: int, r: int, sum_cap=None):
    """Q_{n,r} with its quasi-invertibility witness residuals."""
    P = delta_unit(section, sum_cap)
    Pk = left_unit_iterate(section, n + r - 1, sum_cap)
    mid = delta_grouped(section, P, (n - 1, r - 1), sum_cap)
    Q = Pk * mid
    Qt = mid * Pk
    wt2 = enumerate_tuples(section, n + r, sum_h_cap=sum_cap)[0]
    report = {
        "q-sandwich-QQtQ": (Q * Qt * Q - Q).ref_norm(section, wt2),
        "q-sandwich-QtQQt": (Qt * Q * Qt - Qt).ref_norm(section, wt2),
    }
    # grouped-q form of Q on the all-fundamental grade tuple
    g = (1,) * (n + r)
    if g in Q.blocks:
        lev = section.levels.level(n + r)
        X = np.eye(section.ctx.N ** (n + r), dtype=complex)
        ref = _compress_levels(section, g, lev.apply_p(grouped_q_apply(section, n, r, X)))
        report["q-grouped-form"] = float(np.abs(Q.blocks[g] - ref).max())
    return Q, report


def verify_equivalence_hexagon(section: Section, m: int, n: int, r: int, sum_cap=None) -> float:
    """Residual of Q_{m,n+r} (1_m (x) Q_{n,r}) D(Phi) = Q_{m+n,r} (Q_{m,n} (x) 1_r)."""
    Q_m_nr, _ = tensor_equivalence_data(section, m, n + r, sum_cap)
    Q_nr, _ = tensor_equivalence_data(section, n, r, sum_cap)
    Q_mn_r, _ = tensor_equivalence_data(section, m + n, r, sum_cap)
    Q_mn, _ = tensor_equivalence_data(section, m, n, sum_cap)
    phi, _ = associators(section, sum_cap)
    phi_exp = delta_grouped(section, phi, (m - 1, n - 1, r - 1), sum_cap)
    lhs = Q_m_nr * pad_tensor(section, Q_nr, m, 0, sum_cap) * phi_exp
    rhs = Q_mn_r * pad_tensor(section, Q_mn, 0, r, sum_cap)
    wts = enumerate_tuples(section, m + n + r, sum_h_cap=sum_cap)[0]
    return (lhs - rhs).ref_norm(section, wts)


# -- section comparison -------------------------------------------------------


def transported_blocks(sec_from: Section, sec_to: Section, omega: GroupoidElement) -> dict:
    """Reference blocks of Delta'(omega) written in sec_to coordinates."""
    ctx = sec_to.ctx
    T = {
        lam: uqrep.solve_intertwiner(ctx, sec_from.ref[lam].module(), sec_to.ref[lam].module())
        for lam in sec_to.alcove
    }
    omega_from = GroupoidElement(
        {lam: T[lam].conj().T @ omega.blocks[lam] @ T[lam] for lam in sec_to.alcove}
    )
    raw = coproduct(sec_from, omega_from)
    out = {}
    for lam in sec_to.alcove:
        for mu in sec_to.alcove:
            blk = raw.ref_block(sec_from, (lam, mu))
            TT = np.kron(T[lam], T[mu])
            out[(lam, mu)] = TT @ blk @ TT.conj().T
    return out


def compare_sections(section: Section, other: Section, rng, sum_cap=None) -> dict:
    """Residuals of the twisting identities P D'(w) P = D(w) and P' D(w) P' = D'(w)."""
    wts = enumerate_tuples(section, 2, sum_h_cap=sum_cap)[0]
    omega = GroupoidElement.random(section, rng)
    P = delta_unit(section, sum_cap)
    D = coproduct(section, omega, sum_cap)
    Dp = natural_tensor(section, 2, transported_blocks(other, section, omega), sum_cap)
    r1 = (P * Dp * P - D).ref_norm(section, wts)
    omega_o = GroupoidElement.random(other, rng)
    Po = delta_unit(other, sum_cap)
    Do = coproduct(other, omega_o, sum_cap)
    Dpo = natural_tensor(other, 2, transported_blocks(section, other, omega_o), sum_cap)
    wts_o = enumerate_tuples(other, 2, sum_h_cap=sum_cap)[0]
    r2 = (Po * Dpo * Po - Do).ref_norm(other, wts_o)
    return {"P-twist": r1, "P'-twist": r2}
