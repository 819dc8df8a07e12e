"""Arithmetic in the ring of integers of Q(sqrt p) for p = 1 (mod 4).

Elements are stored as (alpha + beta*sqrt(p)) / 2 with alpha = beta (mod 2),
which covers the half-integral units the maximal order has when p = 1 mod 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .numtheory import OddPrime, legendre

__all__ = [
    "ClassNumberError",
    "ContinuedFractionState",
    "QuadElem",
    "brute_force_unit",
    "cf_states",
    "class_number",
    "class_number_residual",
    "compute_a",
    "fundamental_unit",
    "norm",
    "quad_mul",
    "quad_pow",
    "unit_inverse_power",
    "verify_prod3",
]

CLASS_NUMBER_TOLERANCE = 1e-6


class ClassNumberError(ArithmeticError):
    """Raised when the analytic class number cannot be pinned to an odd integer."""


@dataclass(frozen=True)
class QuadElem:
    """(alpha + beta*sqrt(p)) / 2 in the ring of integers of Q(sqrt p)."""

    alpha: int
    beta: int
    p: int

    def __post_init__(self) -> None:
        if (self.alpha - self.beta) % 2:
            raise ValueError(
                f"({self.alpha} + {self.beta}*sqrt({self.p}))/2 is not an algebraic integer"
            )

    @classmethod
    def one(cls, p: int) -> "QuadElem":
        return cls(2, 0, p)

    @classmethod
    def from_integers(cls, a: int, b: int, p: int) -> "QuadElem":
        """a + b*sqrt(p)."""
        return cls(2 * a, 2 * b, p)

    def conjugate(self) -> "QuadElem":
        return QuadElem(self.alpha, -self.beta, self.p)

    def __mul__(self, other: "QuadElem") -> "QuadElem":
        return quad_mul(self, other)

    def __pow__(self, k: int) -> "QuadElem":
        return quad_pow(self, k)

    def __float__(self) -> float:
        return (self.alpha + self.beta * math.sqrt(self.p)) / 2

    @property
    def is_integral_pair(self) -> bool:
        """True when the element is a + b*sqrt(p) with a, b in Z."""
        return self.alpha % 2 == 0 and self.beta % 2 == 0

    def as_integers(self) -> tuple[int, int]:
        if not self.is_integral_pair:
            raise ValueError(f"{self} has half-integer coordinates")
        return self.alpha // 2, self.beta // 2

    def __str__(self) -> str:
        return f"({self.alpha} + {self.beta}*sqrt({self.p}))/2"


def quad_mul(x: QuadElem, y: QuadElem) -> QuadElem:
    if x.p != y.p:
        raise ValueError(f"cannot multiply elements of Q(sqrt {x.p}) and Q(sqrt {y.p})")
    alpha2 = x.alpha * y.alpha + x.p * x.beta * y.beta
    beta2 = x.alpha * y.beta + x.beta * y.alpha
    # both even because alpha = beta (mod 2) in each factor and p is odd
    return QuadElem(alpha2 // 2, beta2 // 2, x.p)


def quad_pow(x: QuadElem, k: int) -> QuadElem:
    if k < 0:
        raise ValueError("negative powers need unit_inverse_power")
    result = QuadElem.one(x.p)
    base = x
    while k:
        if k & 1:
            result = quad_mul(result, base)
        k >>= 1
        if k:
            base = quad_mul(base, base)
    return result


def norm(x: QuadElem) -> Fraction:
    """Field norm (alpha^2 - p*beta^2) / 4; an integer for ring elements."""
    return Fraction(x.alpha * x.alpha - x.p * x.beta * x.beta, 4)


def unit_inverse_power(unit: QuadElem, k: int) -> QuadElem:
    """unit**(-k) for a unit of norm -1: (-1)**k times the conjugate of unit**k."""
    if norm(unit) != -1:
        raise ValueError("unit_inverse_power expects a unit of norm -1")
    c = quad_pow(unit, k).conjugate()
    return c if k % 2 == 0 else QuadElem(-c.alpha, -c.beta, c.p)


# ---------------------------------------------------------------------------
# fundamental unit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFractionState:
    """One step of the expansion of (P + sqrt p) / Q: partial quotient a at index."""

    P: int
    Q: int
    a: int
    index: int


def cf_states(p: int) -> Iterator[ContinuedFractionState]:
    """One full period of the expansion of xi = (b + sqrt p)/2, b the largest odd b < sqrt p.

    xi lies in Z[(1 + sqrt p)/2] and is reduced (xi > 1, -1 < conj(xi) < 0),
    so its expansion is purely periodic and the period closes when (P, Q)
    returns to (b, 2).
    """
    root = math.isqrt(p)
    b = root if root % 2 else root - 1
    P, Q, index = b, 2, 0
    while True:
        if (p - P * P) % Q:
            raise AssertionError(f"surd invariant broken at P={P}, Q={Q}")
        a = (P + root) // Q
        yield ContinuedFractionState(P, Q, a, index)
        P = a * Q - P
        Q = (p - P * P) // Q
        index += 1
        if (P, Q) == (b, 2):
            return


def fundamental_unit(p: int) -> QuadElem:
    """Smallest unit > 1 of the maximal order of Q(sqrt p), p = 1 (mod 4).

    With xi = [a_0; a_1, ..., a_{l-1}] purely periodic and q_k the convergent
    denominators, eps = q_{l-1} * xi + q_{l-2}.
    """
    p = OddPrime(p)
    if p.mod4 != 1:
        raise ValueError(f"fundamental_unit needs p = 1 (mod 4), got {p}")
    root = math.isqrt(p)
    b = root if root % 2 else root - 1
    q_prev, q_cur = 0, 1          # q_{-1}, q_0
    states = list(cf_states(p))
    for st in states[1:]:
        q_prev, q_cur = q_cur, st.a * q_cur + q_prev
    eps = QuadElem(q_cur * b + 2 * q_prev, q_cur, int(p))
    nrm = norm(eps)
    if abs(nrm) != 1:
        raise AssertionError(f"continued fraction produced a non-unit {eps} of norm {nrm}")
    if nrm != -1:
        raise AssertionError(
            f"fundamental unit {eps} of Q(sqrt {p}) has norm +1; primes p = 1 mod 4 "
            "must give norm -1, so the expansion is wrong"
        )
    return eps


def brute_force_unit(p: int, beta_limit: int = 10**7) -> QuadElem:
    """Smallest unit > 1 found by scanning beta = 1, 2, ... for alpha^2 - p*beta^2 = +-4.

    For a unit (alpha + beta*sqrt p)/2 > 1 both coordinates are positive and the
    size grows with beta, so the first hit is the fundamental unit.
    """
    for beta in range(1, beta_limit + 1):
        for target in (-4, 4):
            sq = p * beta * beta + target
            if sq <= 0:
                continue
            alpha = math.isqrt(sq)
            if alpha * alpha == sq and (alpha - beta) % 2 == 0:
                return QuadElem(alpha, beta, p)
    raise ValueError(f"no unit with beta <= {beta_limit} for p = {p}")


# ---------------------------------------------------------------------------
# class number via Dirichlet's formula
# ---------------------------------------------------------------------------


def _log_unit(eps: QuadElem) -> float:
    # eps = (alpha + sqrt(alpha^2 + 4)) / 2 for a unit of norm -1, i.e. asinh(alpha/2)
    if eps.alpha.bit_length() < 1000:
        return math.asinh(eps.alpha / 2)
    return math.log(eps.alpha)


def _log_sin_sum(p: int) -> float:
    n = (p - 1) // 2
    return math.fsum(-legendre(j, p) * math.log(math.sin(math.pi * j / p)) for j in range(1, n + 1))


def _log_sin_sum_mp(p: int, digits: int) -> tuple[object, object]:
    import mpmath

    with mpmath.workdps(digits):
        n = (p - 1) // 2
        total = mpmath.fsum(
            -legendre(j, p) * mpmath.log(mpmath.sin(mpmath.pi * j / p)) for j in range(1, n + 1)
        )
        return total, mpmath


def class_number_residual(p: int, eps: QuadElem | None = None) -> tuple[int, float]:
    """(h, |T/log eps - h|) with T the log-sine sum, in double precision."""
    eps = eps or fundamental_unit(p)
    ratio = _log_sin_sum(p) / _log_unit(eps)
    h = round(ratio)
    return h, abs(ratio - h)


def class_number(p: int, eps: QuadElem | None = None) -> int:
    """Class number of Q(sqrt p) for p = 1 (mod 4).

    h * log(eps) equals the sum over 1 <= j <= (p-1)/2 of -(j/p) log sin(pi j / p).
    The double-precision quotient is accepted when it lies within 1e-6 of an
    integer; otherwise the sum is redone with mpmath at increasing precision.
    """
    p = OddPrime(p)
    if p.mod4 != 1:
        raise ValueError(f"class_number needs p = 1 (mod 4), got {p}")
    eps = eps or fundamental_unit(p)
    h, resid = class_number_residual(p, eps)
    if resid >= CLASS_NUMBER_TOLERANCE:
        for digits in (30, 60, 120):
            total, mpmath = _log_sin_sum_mp(p, digits)
            with mpmath.workdps(digits):
                log_eps = mpmath.log((eps.alpha + eps.beta * mpmath.sqrt(p)) / 2)
                ratio = total / log_eps
                h = int(mpmath.nint(ratio))
                resid = float(abs(ratio - h))
            if resid < CLASS_NUMBER_TOLERANCE:
                break
        else:
            raise ClassNumberError(f"p={p}: class number residual {resid:.3g} stays above tolerance")
    if h < 1:
        raise ClassNumberError(f"p={p}: analytic class number came out as {h}")
    if h % 2 == 0:
        raise ClassNumberError(f"p={p}: class number {h} is even, which is impossible for prime p")
    return h


def compute_a(p: int, eps: QuadElem | None = None, h: int | None = None) -> tuple[int, int]:
    """(a, b) with a + b*sqrt(p) = eps**h (p = 1 mod 8) or eps**(3h) (p = 5 mod 8)."""
    p = OddPrime(p)
    if p.mod4 != 1:
        raise ValueError(f"compute_a needs p = 1 (mod 4), got {p}")
    eps = eps or fundamental_unit(p)
    h = class_number(p, eps) if h is None else h
    exponent = h if p.mod8 == 1 else 3 * h
    power = quad_pow(eps, exponent)
    if not power.is_integral_pair:
        raise AssertionError(
            f"p={p}: eps^{exponent} = {power} has odd coordinates; unit or class number is wrong"
        )
    return power.as_integers()


def verify_prod3(p: int, eps: QuadElem, h: int, a: int) -> bool:
    """eps^k - eps^(-k) = 2a with k = (2 - (2/p)) h, the inverse power via the conjugate."""
    k = (2 - legendre(2, p)) * h
    forward = quad_pow(eps, k)
    backward = unit_inverse_power(eps, k)
    diff = QuadElem(forward.alpha - backward.alpha, forward.beta - backward.beta, eps.p)
    return diff == QuadElem.from_integers(2 * a, 0, eps.p)
