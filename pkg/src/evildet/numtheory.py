"""Primality, Legendre symbols and prime enumeration.

Everything here works on plain Python integers; :class:`OddPrime` is an
``int`` subclass that validates its value once so downstream code can rely on
it without re-checking.
"""

from __future__ import annotations

import math

__all__ = [
    "OddPrime",
    "is_prime",
    "legendre",
    "jacobi",
    "primes_in_class",
    "sieve",
]

# Deterministic for every n < 3.3 * 10**24, which covers the 64-bit range.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MAX_INPUT = 1 << 64


def is_prime(m: int) -> bool:
    """Deterministic Miller-Rabin for ``0 <= m < 2**64``."""
    if m < 0:
        raise ValueError(f"is_prime expects a nonnegative integer, got {m}")
    if m >= _MAX_INPUT:
        raise ValueError(f"is_prime is limited to 64-bit inputs, got {m.bit_length()} bits")
    if m < 2:
        return False
    for q in _MR_WITNESSES:
        if m % q == 0:
            return m == q
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def jacobi(k: int, m: int) -> int:
    """Jacobi symbol (k/m) for odd positive m, by binary reciprocity."""
    if m <= 0 or m % 2 == 0:
        raise ValueError(f"Jacobi symbol needs an odd positive modulus, got {m}")
    k %= m
    result = 1
    while k:
        while k % 2 == 0:
            k //= 2
            if m % 8 in (3, 5):
                result = -result
        k, m = m, k
        if k % 4 == 3 and m % 4 == 3:
            result = -result
        k %= m
    return result if m == 1 else 0


def legendre(k: int, p: int) -> int:
    """Legendre symbol (k/p) for an odd prime p; k may be any integer."""
    return jacobi(k, p)


class OddPrime(int):
    """An odd prime below 2**64.

    Behaves exactly like the integer it wraps and adds the accessors the rest
    of the package keeps asking for.
    """

    def __new__(cls, value: int) -> "OddPrime":
        if isinstance(value, OddPrime):
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"OddPrime expects an int, got {type(value).__name__}")
        if value == 2 or not is_prime(value):
            raise ValueError(f"{value} is not an odd prime")
        return super().__new__(cls, value)

    @property
    def value(self) -> int:
        return int(self)

    @property
    def n(self) -> int:
        """(p - 1) / 2, so the Chapman matrix has side n + 1."""
        return (int(self) - 1) // 2

    @property
    def mod4(self) -> int:
        return int(self) % 4

    @property
    def mod8(self) -> int:
        return int(self) % 8

    @property
    def mod16(self) -> int:
        return int(self) % 16

    def __repr__(self) -> str:
        return f"OddPrime({int(self)})"


def sieve(bound: int) -> list[int]:
    """All primes <= bound, ascending."""
    if bound < 2:
        return []
    flags = bytearray([1]) * (bound + 1)
    flags[0] = flags[1] = 0
    for q in range(2, math.isqrt(bound) + 1):
        if flags[q]:
            flags[q * q :: q] = bytes(len(range(q * q, bound + 1, q)))
    return [i for i, f in enumerate(flags) if f]


def primes_in_class(bound: int, residue: int, modulus: int) -> list[OddPrime]:
    """Odd primes q <= bound with q = residue (mod modulus), ascending."""
    if modulus <= 0 or not 0 <= residue < modulus:
        raise ValueError(f"need 0 <= residue < modulus, got residue={residue}, modulus={modulus}")
    return [OddPrime(q) for q in sieve(bound) if q != 2 and q % modulus == residue]
