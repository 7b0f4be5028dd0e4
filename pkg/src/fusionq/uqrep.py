"""The quantum group action on V and its tensor powers.

Modules are carried around in compressed form: a dict of generator
matrices in some basis plus an integer weight tag per basis vector (N
times the e-coordinates of the weight, so tags are exact integers).
Tensoring with V, highest-weight search, submodule generation and
complete-reducibility decompositions all happen on compressed data;
ambient V^{(x)n} operators are only ever applied matrix-free.

The coproduct convention is not printed in the source material, so it is
pinned operationally: of the two candidate conventions exactly one makes
the explicit Hecke generator g an intertwiner of V (x) V, and that one is
selected (and cached) per context.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import legops
from .errors import NotCompletelyReducible, RankDeficiency, WeightAbsent
from .scalars import QContext
from .weights import Weight, dim_classical, degree, in_closed_alcove, zero_weight

# Candidate coproducts.  "primary": D(E)=E(x)K + 1(x)E, D(F)=F(x)1 + K^{-1}(x)F.
# "mirror":  D(E)=E(x)1 + K(x)E, D(F)=F(x)K^{-1} + 1(x)F.  D(K)=K(x)K always.
_CONVENTIONS = ("primary", "mirror")
_convention_cache: dict = {}


@dataclass
class CompressedModule:
    """A U_q-module in an explicit basis: generator matrices plus weight tags."""

    d: int
    gens: dict
    nwt: np.ndarray  # (d, N) int: N times the e-coordinates of each basis weight

    def gen(self, kind: str, i: int) -> np.ndarray:
        return self.gens[(kind, i)]


def vector_nwt(ctx: QContext) -> np.ndarray:
    """Weight tags of the vector representation: N*gamma_j = N e_j - e."""
    N = ctx.N
    return N * np.eye(N, dtype=int) - np.ones((N, N), dtype=int)


def vector_module(ctx: QContext) -> CompressedModule:
    """The vector representation on basis psi_1..psi_N.

    E_i psi_{i+1} = psi_i, F_i psi_i = psi_{i+1}, K_i psi_j = q^{<a_i,g_j>} psi_j.
    """
    N, q = ctx.N, ctx.q
    gens = {}
    for i in range(1, N):
        E = np.zeros((N, N), dtype=complex)
        E[i - 1, i] = 1.0
        F = np.zeros((N, N), dtype=complex)
        F[i, i - 1] = 1.0
        kd = np.ones(N, dtype=complex)
        kd[i - 1], kd[i] = q, 1 / q
        gens[("E", i)] = E
        gens[("F", i)] = F
        gens[("K", i)] = np.diag(kd)
        gens[("Kinv", i)] = np.diag(1 / kd)
    return CompressedModule(N, gens, vector_nwt(ctx))


def trivial_module(ctx: QContext) -> CompressedModule:
    one = np.ones((1, 1), dtype=complex)
    zero = np.zeros((1, 1), dtype=complex)
    gens = {}
    for i in range(1, ctx.N):
        gens[("E", i)] = zero.copy()
        gens[("F", i)] = zero.copy()
        gens[("K", i)] = one.copy()
        gens[("Kinv", i)] = one.copy()
    return CompressedModule(1, gens, np.zeros((1, ctx.N), dtype=int))


def _tensor_with_vector(ctx: QContext, mod: CompressedModule, conv: str) -> CompressedModule:
    V = vector_module(ctx)
    d, N = mod.d, ctx.N
    Id, In = np.eye(d), np.eye(N)
    gens = {}
    for i in range(1, N):
        if conv == "primary":
            E = np.kron(mod.gen("E", i), V.gen("K", i)) + np.kron(Id, V.gen("E", i))
            F = np.kron(mod.gen("F", i), In) + np.kron(mod.gen("Kinv", i), V.gen("F", i))
        else:
            E = np.kron(mod.gen("E", i), In) + np.kron(mod.gen("K", i), V.gen("E", i))
            F = np.kron(mod.gen("F", i), V.gen("Kinv", i)) + np.kron(Id, V.gen("F", i))
        gens[("E", i)] = E
        gens[("F", i)] = F
        gens[("K", i)] = np.kron(mod.gen("K", i), V.gen("K", i))
        gens[("Kinv", i)] = np.kron(mod.gen("Kinv", i), V.gen("Kinv", i))
    nwt = (mod.nwt[:, None, :] + V.nwt[None, :, :]).reshape(d * N, N)
    return CompressedModule(d * N, gens, nwt)


def coproduct_convention(ctx: QContext) -> str:
    """Select the coproduct convention pinned by the Hecke-generator check."""
    key = (ctx.N, ctx.ell)
    if key in _convention_cache:
        return _convention_cache[key]
    from .braiding import hecke_generator

    g = hecke_generator(ctx)
    passing = []
    for conv in _CONVENTIONS:
        pair = _tensor_with_vector(ctx, vector_module(ctx), conv)
        resid = max(
            np.abs(g @ pair.gen(kind, i) - pair.gen(kind, i) @ g).max()
            for kind in ("E", "F", "K")
            for i in range(1, ctx.N)
        )
        if resid < 1e-10:
            passing.append(conv)
    if len(passing) != 1:
        raise RuntimeError(f"coproduct pin failed: passing={passing}")
    _convention_cache[key] = passing[0]
    return passing[0]


def tensor_with_vector(ctx: QContext, mod: CompressedModule) -> CompressedModule:
    """The module mod (x) V under the pinned coproduct."""
    return _tensor_with_vector(ctx, mod, coproduct_convention(ctx))


def power_module(ctx: QContext, n: int) -> CompressedModule:
    """Dense compressed module for the full power V^{(x)n} (small n only)."""
    if n > ctx.dense_cap:
        raise ValueError(f"n={n} above dense cap {ctx.dense_cap}")
    mod = trivial_module(ctx)
    for _ in range(n):
        mod = tensor_with_vector(ctx, mod)
    return mod


@dataclass
class GeneratorSet:
    """Dense generator matrices of the iterated coproduct on V^{(x)n}."""

    n: int
    E: dict
    F: dict
    K: dict
    Kinv: dict


def power_action(ctx: QContext, n: int) -> GeneratorSet:
    if n < 1:
        raise ValueError("need n >= 1")
    mod = power_module(ctx, n)
    return GeneratorSet(
        n,
        {i: mod.gen("E", i) for i in range(1, ctx.N)},
        {i: mod.gen("F", i) for i in range(1, ctx.N)},
        {i: mod.gen("K", i) for i in range(1, ctx.N)},
        {i: mod.gen("Kinv", i) for i in range(1, ctx.N)},
    )


def _k_diag(ctx: QContext, i: int, inverse=False) -> np.ndarray:
    q = ctx.q
    kd = np.ones(ctx.N, dtype=complex)
    kd[i - 1], kd[i] = q, 1 / q
    return 1 / kd if inverse else kd


def apply_power_gen(ctx: QContext, kind: str, i: int, x, n: int):
    """Apply the iterated-coproduct image of a generator on V^{(x)n}, matrix-free."""
    N = ctx.N
    conv = coproduct_convention(ctx)
    V = vector_module(ctx)
    if kind in ("K", "Kinv"):
        kd = _k_diag(ctx, i, inverse=(kind == "Kinv"))
        out = np.asarray(x, dtype=complex)
        for leg in range(1, n + 1):
            out = legops.apply_single(np.diag(kd), out, N, n, leg)
        return out
    E, F = V.gen("E", i), V.gen("F", i)
    Kd, Kinvd = np.diag(_k_diag(ctx, i)), np.diag(_k_diag(ctx, i, inverse=True))
    acc = np.zeros_like(np.asarray(x, dtype=complex))
    if kind == "E":
        # mirror: sum_j K..K E 1..1 ; primary: sum_j 1..1 E K..K
        cur = np.asarray(x, dtype=complex)
        legseq = range(1, n + 1) if conv == "mirror" else range(n, 0, -1)
        for leg in legseq:
            acc = acc + legops.apply_single(E, cur, N, n, leg)
            cur = legops.apply_single(Kd, cur, N, n, leg)
        return acc
    if kind == "F":
        # mirror: sum_j 1..1 F Kinv..Kinv ; primary: sum_j Kinv..Kinv F 1..1
        cur = np.asarray(x, dtype=complex)
        legseq = range(n, 0, -1) if conv == "mirror" else range(1, n + 1)
        for leg in legseq:
            acc = acc + legops.apply_single(F, cur, N, n, leg)
            cur = legops.apply_single(Kinvd, cur, N, n, leg)
        return acc
    raise ValueError(f"unknown generator kind {kind!r}")


def power_nwt(ctx: QContext, n: int) -> np.ndarray:
    """Weight tags of the lexicographic basis of V^{(x)n}."""
    tags = np.zeros((1, ctx.N), dtype=int)
    vtags = vector_nwt(ctx)
    for _ in range(n):
        tags = (tags[:, None, :] + vtags[None, :, :]).reshape(-1, ctx.N)
    return tags


def nwt_to_partition(ctx: QContext, w) -> Weight:
    """Convert an integer weight tag to a dominant partition; None if not dominant."""
    w = [int(a) for a in w]
    if any(a < b for a, b in zip(w, w[1:])):
        return None
    parts = []
    for a in w[:-1]:
        if (a - w[-1]) % ctx.N:
            return None
        parts.append((a - w[-1]) // ctx.N)
    return tuple(parts)


def two_rho_pairing(ctx: QContext, w) -> int:
    """<2 rho, weight> for an integer weight tag (exact integer)."""
    N = ctx.N
    total = sum((N - 1 - 2 * j) * int(w[j]) for j in range(N))
    if total % N:
        raise ValueError(f"tag {w} is not a weight of the sl_{N} lattice")
    return total // N


def highest_weight_vectors(ctx: QContext, mod: CompressedModule):
    """Basis of the joint kernel of the E_i, organized by dominant weight.

    Vectors are normalized in the module's standard coordinates.  Raises
    RankDeficiency when the singular-value gap at the kernel cut is
    narrower than a factor of 10 around 1e3*tol.
    """
    groups: dict = {}
    for idx, row in enumerate(mod.nwt):
        groups.setdefault(tuple(int(a) for a in row), []).append(idx)
    stackedE = np.vstack([mod.gen("E", i) for i in range(1, ctx.N)]) if ctx.N > 1 else None
    out = []
    for w in sorted(groups, reverse=True):
        cols = groups[w]
        A = stackedE[:, cols]
        if A.shape[0] == 0 or np.abs(A).max() == 0:
            kernel = np.eye(len(cols), dtype=complex)
        else:
            u, s, vh = np.linalg.svd(A)
            scale = max(1.0, s[0] if len(s) else 1.0)
            cut = 1e3 * ctx.tol * scale
            if np.any((s >= cut) & (s < 10 * cut)):
                raise RankDeficiency(f"ambiguous singular values near {cut} at weight {w}")
            rank = int(np.sum(s >= cut))
            kernel = vh[rank:].conj().T
        if kernel.shape[1] == 0:
            continue
        part = nwt_to_partition(ctx, w)
        if part is None:
            raise RuntimeError(f"highest weight tag {w} is not dominant")
        for k in range(kernel.shape[1]):
            vec = np.zeros(mod.d, dtype=complex)
            vec[cols] = kernel[:, k]
            out.append((part, vec / np.linalg.norm(vec)))
    return sorted(out, key=lambda t: t[0])


def generate_submodule(ctx: QContext, mod: CompressedModule, vec, expected_dim=None):
    """Span of the F-word orbit of vec, re-orthonormalized breadth-first.

    Returns a (d, dim) basis whose columns are weight-homogeneous.
    """
    v = np.asarray(vec, dtype=complex)
    basis = [v / np.linalg.norm(v)]
    queue = [0]
    while queue:
        idx = queue.pop(0)
        for i in range(1, ctx.N):
            w = mod.gen("F", i) @ basis[idx]
            nw = np.linalg.norm(w)
            if nw < 1e-12:
                continue
            B = np.column_stack(basis)
            r = w - B @ (B.conj().T @ w)
            # twice-is-enough reorthogonalization
            r = r - B @ (B.conj().T @ r)
            if np.linalg.norm(r) > 1e-7 * nw:
                basis.append(r / np.linalg.norm(r))
                queue.append(len(basis) - 1)
    B = np.column_stack(basis)
    if expected_dim is not None and B.shape[1] != expected_dim:
        raise NotCompletelyReducible(
            f"submodule dimension {B.shape[1]} != Weyl dimension {expected_dim}"
        )
    return B


@dataclass
class WeylDecomposition:
    """Direct-sum decomposition into irreducible Weyl summands."""

    entries: list  # (weight, basis) in deterministic order
    T: np.ndarray
    Tinv: np.ndarray
    slices: list = field(default_factory=list)

    def weights(self):
        return [w for w, _ in self.entries]

    def copies(self, mu: Weight):
        return [B for w, B in self.entries if w == tuple(mu)]

    def isotypic_projection(self, mu: Weight) -> np.ndarray:
        mu = tuple(mu)
        if mu not in self.weights():
            raise WeightAbsent(f"{mu} not present")
        sel = np.zeros(self.T.shape[1])
        for (w, _), sl in zip(self.entries, self.slices):
            if w == mu:
                sel[sl] = 1.0
        return self.T @ (sel[:, None] * self.Tinv)


def weyl_decompose(ctx: QContext, mod: CompressedModule) -> WeylDecomposition:
    """Decompose a completely reducible module by generating from its hw vectors."""
    entries = []
    for mu, vec in highest_weight_vectors(ctx, mod):
        if not in_closed_alcove(ctx, mu):
            # outside the closed alcove the Weyl module can be reducible and the
            # orbit need not saturate the classical dimension; the caller's
            # precondition (Thm 4.4 scope) is violated
            B = generate_submodule(ctx, mod, vec)
            entries.append((mu, B))
            continue
        B = generate_submodule(ctx, mod, vec, expected_dim=dim_classical(ctx, mu))
        entries.append((mu, B))
    total = sum(B.shape[1] for _, B in entries)
    if total != mod.d:
        raise NotCompletelyReducible(f"summands span {total} of {mod.d} dimensions")
    T = np.column_stack([B for _, B in entries])
    s = np.linalg.svd(T, compute_uv=False)
    if s[-1] < 1e3 * ctx.tol * s[0]:
        raise NotCompletelyReducible(f"summand bases nearly dependent (s_min={s[-1]:.2e})")
    Tinv = np.linalg.inv(T)
    slices, off = [], 0
    for _, B in entries:
        slices.append(slice(off, off + B.shape[1]))
        off += B.shape[1]
    return WeylDecomposition(entries, T, Tinv, slices)


def isotypic_projection(ctx: QContext, decomp: WeylDecomposition, gamma: Weight) -> np.ndarray:
    """Idempotent onto the gamma-isotypic part along the complementary blocks."""
    return decomp.isotypic_projection(gamma)


def solve_intertwiner(ctx: QContext, src: CompressedModule, dst: CompressedModule) -> np.ndarray:
    """The unitary intertwiner U with dst(a) U = U src(a), phase-normalized.

    Both modules must be irreducible copies of the same type in bases that
    are orthonormal for invariant forms (then U is a scalar multiple of a
    unitary).  The phase is fixed by making the first significant entry
    real positive.  Raises RankDeficiency if the solution space is not
    one-dimensional at the configured gap.
    """
    d1, d2 = src.d, dst.d
    if d1 != d2:
        raise ValueError("modules of different dimensions are not isomorphic")
    rows = []
    for key in src.gens:
        if key[0] == "Kinv":
            continue
        A, B = src.gen(*key), dst.gen(*key)
        rows.append(np.kron(np.eye(d1), B) - np.kron(A.T, np.eye(d2)))
    M = np.vstack(rows)
    u, s, vh = np.linalg.svd(M)
    scale = max(1.0, s[0])
    cut = 1e3 * ctx.tol * scale
    null = int(np.sum(s < cut))
    if null != 1 or (len(s) > 1 and s[-2] < 10 * cut):
        raise RankDeficiency(f"intertwiner space dimension {null} (singulars {s[-3:]})")
    U = vh[-1].conj().reshape(d2, d1, order="F")  # vec column-major
    c = (U.conj().T @ U).trace().real / d1
    U = U / np.sqrt(c)
    flat = np.abs(U).ravel()
    k = int(np.argmax(flat > 0.5 * flat.max()))
    phase = U.ravel()[k] / abs(U.ravel()[k])
    return U / phase


class TrivialProjection:
    """e_n: the projection onto the trivial isotypic part of p_n V^{(x)n}.

    In the level's block coordinates this is the 0/1 selector of the
    trivial copies; the ambient operator is W diag Z extended by zero on
    the negligible complement.
    """

    def __init__(self, ctx: QContext, levels, n: int):
        self.ctx, self.levels, self.n = ctx, levels, n
        lev = levels.level(n)
        mask = np.zeros(lev.dim)
        for copy, sl in zip(lev.copies, lev.slices):
            if copy.weight == zero_weight(ctx):
                mask[sl] = 1.0
        self.block_mask = mask
        self.rank = int(round(mask.sum()))

    def block(self) -> np.ndarray:
        return np.diag(self.block_mask)

    def apply(self, x):
        lev = self.levels.level(self.n)
        z = lev.Z @ np.asarray(x, dtype=complex)
        z = self.block_mask * z if z.ndim == 1 else self.block_mask[:, None] * z
        return lev.W @ z

    def dense(self) -> np.ndarray:
        if self.n > self.ctx.dense_cap:
            raise MemoryError("above dense cap")
        lev = self.levels.level(self.n)
        return lev.W @ (self.block_mask[:, None] * lev.Z)


def trivial_projection(ctx: QContext, n: int, levels=None) -> TrivialProjection:
    if levels is None:
        from .wenzl import LevelSet

        levels = LevelSet.build(ctx, n)
    return TrivialProjection(ctx, levels, n)


def quantum_dimension(ctx: QContext, lam, levels=None) -> complex:
    """Trace of K_{2 rho} on the constructed module V_lam (lam in the closed alcove)."""
    lam = tuple(lam)
    if not in_closed_alcove(ctx, lam):
        raise ValueError(f"{lam} outside the closed alcove")
    if not any(lam):
        return 1.0 + 0j
    n = degree(ctx, lam)
    if levels is None:
        from .wenzl import LevelSet

        levels = LevelSet.build(ctx, n)
    lev = levels.level(n)
    for copy in lev.copies:
        if copy.weight == lam:
            tags = copy.nwt
            break
    else:
        for rec in lev.negligible:
            if rec.weight == lam:
                tags = rec.nwt
                break
        else:
            raise WeightAbsent(f"{lam} not found at level {n}")
    return sum(ctx.qpow(Fraction(two_rho_pairing(ctx, row))) for row in tags)
