"""Dense exact matrices and exact determinants.

Two independent determinant routes live here:

* :func:`det_bareiss` -- fraction-free (Bareiss) elimination over the integers.
* :func:`det_modular` -- determinants modulo many primes, glued together with
  the Chinese remainder theorem under a Hadamard bound (see :mod:`.modular`).

They share nothing beyond the input matrix, which is the point: the Chapman
determinant check is only as trustworthy as the determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpz

from .numtheory import OddPrime, legendre

__all__ = [
    "IntMatrix",
    "RatMatrix",
    "build_chapman",
    "det_bareiss",
    "det_modular",
    "det_rational",
    "hadamard_bound",
    "minor_bit_bounds",
]


@dataclass(frozen=True)
class IntMatrix:
    """Row-major dense matrix of Python integers."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> "IntMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        flat = tuple(int(x) for r in rows for x in r)
        return cls(len(rows), ncols, flat)

    @classmethod
    def identity(cls, size: int) -> "IntMatrix":
        return cls.from_rows([[int(i == j) for j in range(size)] for i in range(size)])

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(zip(*self.to_rows())) if self.rows else self

    def swap_rows(self, i: int, j: int) -> "IntMatrix":
        rows = self.to_rows()
        rows[i], rows[j] = rows[j], rows[i]
        return IntMatrix.from_rows(rows)

    def max_abs(self) -> int:
        return max((abs(x) for x in self.entries), default=0)


def _canonical_fraction(x) -> Fraction:
    # Fraction() already reduces and normalises the sign of the denominator
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RatMatrix:
    """Row-major dense matrix of reduced fractions."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match shape")
        object.__setattr__(self, "entries", tuple(_canonical_fraction(x) for x in self.entries))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence]) -> "RatMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), ncols, tuple(x for r in rows for x in r))

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]


def build_chapman(p: int) -> IntMatrix:
    """The (n+1) x (n+1) matrix with entry (i, j) = ((j - i)/p), n = (p-1)/2."""
    p = OddPrime(p)
    n = p.n
    # Toeplitz: one symbol per difference j - i in [-n, n]
    symbol = {d: legendre(d, p) for d in range(-n, n + 1)}
    return IntMatrix.from_rows([[symbol[j - i] for j in range(n + 1)] for i in range(n + 1)])


def _require_square(M) -> None:
    if not M.is_square:
        raise ValueError(f"determinant of a non-square {M.rows}x{M.cols} matrix")


def _squared_row_norms(M: IntMatrix) -> list[int]:
    return [sum(x * x for x in M.row(i)) for i in range(M.rows)]


def _ceil_sqrt(s: int) -> int:
    r = math.isqrt(s)
    return r if r * r == s else r + 1


def hadamard_bound(M: IntMatrix) -> int:
    """Smallest integer >= prod of Euclidean row norms, so |det M| <= result."""
    _require_square(M)
    return _ceil_sqrt(math.prod(_squared_row_norms(M)))


def _restricted_caps(lines: list[Sequence[int]], size: int) -> list[int]:
    # prefix[i][m-1]: sum of the m largest squares in line i, so an m x m
    # minor using line i has that line's part bounded by its square root
    prefix = []
    for line in lines:
        acc, out = 0, []
        for s in sorted((x * x for x in line), reverse=True):
            acc += s
            out.append(acc)
        prefix.append(out)
    caps = []
    for m in range(1, size + 1):
        best = sorted((prefix[i][m - 1] for i in range(size)), reverse=True)[:m]
        if best[-1] == 0:
            caps.append(1)
            continue
        # float log2 is accurate to ~1e-15 relative; the slack absorbs it
        half_log = sum(math.log2(v) for v in best) / 2
        caps.append(int(half_log * (1 + 1e-12)) + 3)
    return caps


def minor_bit_bounds(M: IntMatrix) -> list[int]:
    """``out[k]`` bounds the bit length (sign bit included) of every (k+1) x (k+1) minor of M.

    Hadamard's inequality applied to the rows of the minor, each row cut down
    to its k+1 largest entries, maximised over the k+1 best rows; the same is
    done for columns and the smaller bound kept.
    """
    _require_square(M)
    rows = [M.row(i) for i in range(M.rows)]
    by_rows = _restricted_caps(rows, M.rows)
    by_cols = _restricted_caps(list(zip(*rows)), M.rows)
    return [min(a, b) for a, b in zip(by_rows, by_cols)]


# ---------------------------------------------------------------------------
# Bareiss elimination on packed rows
#
# Each active row is stored as one integer sum_j f_j * 2**(W*j) with signed
# fields |f_j| < 2**(W-1).  A Bareiss row update
#     row_i <- (pivot * row_i - c_i * pivot_row) / prev
# is linear, so it can be applied to the packed integer directly: four GMP
# calls per row instead of four interpreter operations per entry.  Only the
# lowest field (the next pivot column) is ever decoded; intermediate products
# may overflow their fields freely because nothing reads them before the exact
# division brings them back to genuine minors.
# ---------------------------------------------------------------------------

_ONE = mpz(1)


@lru_cache(maxsize=64)
def _rep(width: int, count: int) -> mpz:
    """sum_{j < count} 2**(width * j)."""
    return ((_ONE << (width * count)) - 1) // ((_ONE << width) - 1)


def _pack(fields: Sequence[int], width: int) -> mpz:
    half = 1 << (width - 1)
    nbytes = width // 8
    blob = b"".join((int(f) + half).to_bytes(nbytes, "little") for f in fields)
    return mpz(int.from_bytes(blob, "little")) - (half * _rep(width, len(fields)))


def _field_bytes(row: mpz, count: int, width: int) -> np.ndarray:
    """Offset digits (f_j + 2**(width-1)) of a packed row as a (count, width/8) byte array."""
    digits = row + (_ONE << (width - 1)) * _rep(width, count)
    raw = int(digits).to_bytes(count * width // 8, "little")
    return np.frombuffer(raw, dtype=np.uint8).reshape(count, width // 8)


def _measured_bits(rows: list[mpz], count: int, width: int) -> int:
    """Upper bound on the bit length of every field, read off the packed bytes."""
    top = 0
    for row in rows:
        b = _field_bytes(row, count, width)
        nonneg = b[:, -1] >= 0x80
        mag = np.where(nonneg[:, None], b, 0xFF - b)
        mag[:, -1] &= 0x7F
        cols = np.flatnonzero(mag.any(axis=0))
        if cols.size:
            top = max(top, int(cols[-1]) + 1)
    return 8 * top + 1


def _repack(row: mpz, count: int, width: int, new_width: int) -> mpz:
    b = _field_bytes(row, count, width)
    wide = np.zeros((count, new_width // 8), dtype=np.uint8)
    wide[:, : width // 8] = b
    spread = mpz(int.from_bytes(wide.tobytes(), "little"))
    return spread - (_ONE << (width - 1)) * _rep(new_width, count)


def _round_width(bits: int) -> int:
    return -(-bits // 8) * 8


def det_bareiss(M: IntMatrix) -> int:
    """Exact determinant by fraction-free Gaussian (Bareiss) elimination.

    Pivoting takes the first nonzero entry of the current column; a column
    with no nonzero entry ends the elimination with determinant 0.
    """
    _require_square(M)
    size = M.rows
    if size == 0:
        return 1
    if size == 1:
        return M.entries[0]

    caps = minor_bit_bounds(M)
    bits = max(1, M.max_abs().bit_length())   # rigorous bound on |field|
    width = _round_width(bits + 2)
    rows = [_pack(M.row(i), width) for i in range(size)]
    count = size
    sign = 1
    prev = _ONE

    for k in range(size - 1):
        half = _ONE << (width - 1)
        full = _ONE << width
        mask = full - 1
        lead = []
        for r in rows:
            f = r & mask
            lead.append(f - full if f >= half else f)
        piv = next((i for i, f in enumerate(lead) if f), None)
        if piv is None:
            return 0
        if piv:
            rows[0], rows[piv] = rows[piv], rows[0]
            lead[0], lead[piv] = lead[piv], lead[0]
            sign = -sign
        pv = lead[0]

        # bound the next generation of minors before touching them
        max_c = max(abs(c) for c in lead[1:])
        grown = (((abs(pv) + max_c) << bits) // abs(prev)).bit_length() + 1
        new_bits = min(grown, caps[k + 1])
        if new_bits + 1 > width:
            bits = min(bits, _measured_bits(rows, count, width))
            grown = (((abs(pv) + max_c) << bits) // abs(prev)).bit_length() + 1
            new_bits = min(grown, caps[k + 1])
            if new_bits + 1 > width:
                new_width = _round_width(new_bits + 1 + max(32, new_bits // 8))
                rows = [_repack(r, count, width, new_width) for r in rows]
                width = new_width

        pivot_row = rows[0]
        divexact = gmpy2.divexact
        rows = [
            divexact((pv * r - c * pivot_row if c else pv * r) >> width, prev)
            for r, c in zip(rows[1:], lead[1:])
        ]
        bits = new_bits
        prev = pv
        count -= 1

    last = rows[0] & ((_ONE << width) - 1)
    if last >= _ONE << (width - 1):
        last -= _ONE << width
    return sign * int(last)


def det_rational(M: RatMatrix) -> Fraction:
    """Exact determinant over Q: clear denominators row by row, then Bareiss."""
    _require_square(M)
    scale = 1
    int_rows = []
    for i in range(M.rows):
        row = M.row(i)
        d = reduce(math.lcm, (x.denominator for x in row), 1)
        scale *= d
        int_rows.append([x.numerator * (d // x.denominator) for x in row])
    if M.rows == 0:
        return Fraction(1)
    return Fraction(det_bareiss(IntMatrix.from_rows(int_rows)), scale)


def det_modular(M: IntMatrix) -> int:
    """Exact determinant by multi-modular elimination and balanced CRT."""
    from .modular import det_multimodular

    _require_square(M)
    return det_multimodular(M)
