"""Matrix-free tensor-leg kernels on V^{(x)n}.

Vectors live in C^{N^n} with the lexicographic tensor basis (leg 1 is the
most significant base-N digit).  All functions accept a single vector or
a (N^n, batch) matrix of column vectors and preserve that shape.  Nothing
here materializes an N^n x N^n operator.
"""

from __future__ import annotations

import numpy as np


def _split(x, dim):
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise ValueError(f"expected length {dim}, got {x.shape}")
        return x.reshape(dim, 1), True
    if x.shape[0] != dim:
        raise ValueError(f"expected leading dimension {dim}, got {x.shape}")
    return x, False


def _merge(x, squeeze):
    return x[:, 0] if squeeze else x


def apply_single(op, x, N, n, i):
    """Apply an N x N operator to leg i (1-based)."""
    dim = N**n
    x, squeeze = _split(x, dim)
    b = x.shape[1]
    t = x.reshape((N,) * n + (b,))
    t = np.tensordot(op, t, axes=([1], [i - 1]))  # new axis 0 is leg i
    t = np.moveaxis(t, 0, i - 1)
    return _merge(t.reshape(dim, b), squeeze)


def apply_pair(op, x, N, n, i, j):
    """Apply an N^2 x N^2 operator to legs (i, j), i < j (1-based).

    The operator is indexed with rows/columns (a_i, a_j) lexicographic.
    """
    if not 1 <= i < j <= n:
        raise ValueError(f"bad leg pair ({i}, {j}) for n={n}")
    dim = N**n
    x, squeeze = _split(x, dim)
    b = x.shape[1]
    op4 = np.asarray(op, dtype=complex).reshape(N, N, N, N)
    t = x.reshape((N,) * n + (b,))
    t = np.tensordot(op4, t, axes=([2, 3], [i - 1, j - 1]))  # axes 0,1 = legs i,j
    t = np.moveaxis(t, (0, 1), (i - 1, j - 1))
    return _merge(t.reshape(dim, b), squeeze)


def permute_legs(x, N, n, perm):
    """Relabel legs: output leg k carries input leg perm[k] (0-based legs)."""
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    dim = N**n
    x, squeeze = _split(x, dim)
    b = x.shape[1]
    t = x.reshape((N,) * n + (b,))
    t = t.transpose(tuple(perm) + (n,))
    return _merge(t.reshape(dim, b), squeeze)


def reverse_legs(x, N, n):
    """The order-reversing permutation Sigma_n."""
    return permute_legs(x, N, n, tuple(range(n - 1, -1, -1)))


def swap_blocks(x, N, h, k):
    """Sigma_{h,k}: exchange the first h legs with the last k legs."""
    if h == 0 or k == 0:
        return np.asarray(x, dtype=complex)
    perm = tuple(range(h, h + k)) + tuple(range(h))
    return permute_legs(x, N, h + k, perm)


def apply_left(mat, x, right_dim):
    """(mat (x) 1_right) x for mat of shape (out, in)."""
    x, squeeze = _split(x, mat.shape[1] * right_dim)
    b = x.shape[1]
    t = x.reshape(mat.shape[1], right_dim * b)
    y = mat @ t
    return _merge(y.reshape(mat.shape[0] * right_dim, b), squeeze)


def apply_right(mat, x, left_dim):
    """(1_left (x) mat) x for mat of shape (out, in)."""
    x, squeeze = _split(x, left_dim * mat.shape[1])
    b = x.shape[1]
    t = x.reshape(left_dim, mat.shape[1], b)
    y = np.einsum("oi,lib->lob", mat, t)
    return _merge(y.reshape(left_dim * mat.shape[0], b), squeeze)


def apply_mid(mat, x, left_dim, right_dim):
    """(1_left (x) mat (x) 1_right) x for mat of shape (out, in)."""
    x, squeeze = _split(x, left_dim * mat.shape[1] * right_dim)
    b = x.shape[1]
    t = x.reshape(left_dim, mat.shape[1], right_dim * b)
    y = np.einsum("oi,lim->lom", mat, t)
    return _merge(y.reshape(left_dim * mat.shape[0] * right_dim, b), squeeze)


def dense(apply_fn, dim):
    """Materialize an operator from its action on the standard basis."""
    return np.asarray(apply_fn(np.eye(dim, dtype=complex)))
