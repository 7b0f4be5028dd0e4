"""Exact root-of-unity scalar arithmetic.

The base scalar is q = exp(i*pi/ell).  Every exponent that occurs in the
theory (inner products of weights, ribbon half-exponents, 1/N Hecke
normalizations) lies in (1/2N)*Z, so exponents are carried as exact
integer numerators over 2N and only evaluated to complex at the boundary.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import VanishingQuantumFactorial


@dataclass(frozen=True)
class QContext:
    """Configuration for one (N, ell) root-of-unity setting.

    N is the rank parameter (sl_N), ell the alcove level (ell >= N+1),
    tol the comparison tolerance used by every residual check, and
    dense_cap the maximum number of tensor legs for which N^n x N^n
    operators may be materialized densely.
    """

    N: int
    ell: int
    tol: float = 1e-9
    dense_cap: int = 6

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need N >= 2, got {self.N}")
        if self.ell < self.N + 1:
            raise ValueError(f"need ell >= N+1 = {self.N + 1}, got {self.ell}")

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi / self.ell)

    def qpow(self, r) -> complex:
        """q**r for an exact rational exponent r (QExponent, Fraction or int)."""
        return q_power(self, r)


@dataclass(frozen=True)
class QExponent:
    """Exact exponent num/(2N) of q; addition and negation are integer ops."""

    num: int
    two_n: int  # 2N, fixed by the context

    def __add__(self, other: "QExponent") -> "QExponent":
        if self.two_n != other.two_n:
            raise ValueError("mixing exponents from different contexts")
        return QExponent(self.num + other.num, self.two_n)

    def __neg__(self) -> "QExponent":
        return QExponent(-self.num, self.two_n)

    def __sub__(self, other: "QExponent") -> "QExponent":
        return self + (-other)

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.two_n)

    @classmethod
    def from_fraction(cls, r: Fraction | int, N: int) -> "QExponent":
        r = Fraction(r)
        num = r * 2 * N
        if num.denominator != 1:
            raise ValueError(f"{r} is not an integer multiple of 1/{2 * N}")
        return cls(int(num), 2 * N)


def q_power(ctx: QContext, r) -> complex:
    """Evaluate q**r = exp(i*pi*r/ell) for an exact rational exponent."""
    if isinstance(r, QExponent):
        r = r.value
    r = Fraction(r)
    return cmath.exp(1j * math.pi * r.numerator / (r.denominator * ctx.ell))


def q_int(ctx: QContext, k: int) -> float:
    """Quantum integer [k]_q = sin(k*pi/ell)/sin(pi/ell) (real at q on the circle)."""
    return math.sin(k * math.pi / ctx.ell) / math.sin(math.pi / ctx.ell)


def q_fact(ctx: QContext, k: int) -> float:
    """Quantum factorial [k]_q! = [k]_q [k-1]_q ... [2]_q, with [0]! = [1]! = 1."""
    if k < 0:
        raise ValueError(f"need k >= 0, got {k}")
    out = 1.0
    for j in range(2, k + 1):
        factor = q_int(ctx, j)
        if abs(factor) < ctx.tol:
            raise VanishingQuantumFactorial(f"[{j}]_q = 0 at ell = {ctx.ell}")
        out *= factor
    return out
