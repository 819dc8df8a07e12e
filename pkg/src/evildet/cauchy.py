"""Cauchy-kernel determinants and their bordered relatives, over any exact field.

Every function here only uses ``+ - * /``, equality with 0, and mixing with
Python ints and :class:`fractions.Fraction`.  ``Fraction`` itself qualifies,
and so does :class:`evildet.cyclotomic.CycloElem`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

__all__ = [
    "FieldMatrix",
    "FieldVector",
    "SingularDenominator",
    "build_M",
    "build_W_bordered",
    "build_kernel",
    "cauchy_kernel_det",
    "det_M_closed_form",
    "det_W_closed_form",
    "det_W_difference",
    "field_det",
    "random_rational",
    "random_vectors",
]

FieldVector = Sequence[Any]
ONE = Fraction(1)
HALF = Fraction(1, 2)


class SingularDenominator(ZeroDivisionError):
    """A 1 + u*v (or 1 + x) factor that the construction needs nonzero vanished."""


@dataclass(frozen=True)
class FieldMatrix:
    """Square matrix of field elements, stored as a tuple of row tuples."""

    rows: tuple[tuple[Any, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Any]]) -> "FieldMatrix":
        rows = tuple(tuple(r) for r in rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("FieldMatrix must be square")
        return cls(rows)

    @property
    def side(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> Any:
        i, j = ij
        return self.rows[i][j]

    def to_rows(self) -> list[list[Any]]:
        return [list(r) for r in self.rows]

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(tuple(zip(*self.rows)))


def _product(values: Iterable[Any], start: Any = 1) -> Any:
    acc = start
    for v in values:
        acc = acc * v
    return acc


def _check_lengths(u: FieldVector, v: FieldVector) -> int:
    if len(u) != len(v):
        raise ValueError(f"vectors of different lengths {len(u)} and {len(v)}")
    return len(u)


def _kernel_denominators(u: FieldVector, v: FieldVector) -> list[list[Any]]:
    den = []
    for i, ui in enumerate(u):
        row = []
        for j, vj in enumerate(v):
            d = ONE + ui * vj
            if d == 0:
                raise SingularDenominator(f"1 + u[{i}]*v[{j}] = 0")
            row.append(d)
        den.append(row)
    return den


def build_kernel(u: FieldVector, v: FieldVector) -> FieldMatrix:
    """The matrix 1 / (1 + u_i v_j)."""
    _check_lengths(u, v)
    return FieldMatrix.from_rows([[1 / d for d in row] for row in _kernel_denominators(u, v)])


def build_M(u: FieldVector, v: FieldVector) -> FieldMatrix:
    """The matrix (u_i + v_j) / (1 + u_i v_j)."""
    _check_lengths(u, v)
    den = _kernel_denominators(u, v)
    return FieldMatrix.from_rows(
        [[(ui + vj) / den[i][j] for j, vj in enumerate(v)] for i, ui in enumerate(u)]
    )


def _vandermonde_pair(u: FieldVector, v: FieldVector) -> Any:
    # prod_{i<j} (u_i - u_j)(v_j - v_i)
    m = len(u)
    return _product((u[i] - u[j]) * (v[j] - v[i]) for i in range(m) for j in range(i + 1, m))


def cauchy_kernel_det(u: FieldVector, v: FieldVector, check: bool = False) -> Any:
    """Closed form of det(1 / (1 + u_i v_j)); with ``check`` also eliminates directly."""
    _check_lengths(u, v)
    den = _kernel_denominators(u, v)
    value = _vandermonde_pair(u, v) / _product(d for row in den for d in row)
    if check:
        direct = field_det(build_kernel(u, v))
        if direct != value:
            raise ArithmeticError(f"Cauchy kernel closed form {value} != direct {direct}")
    return value


def det_M_closed_form(u: FieldVector, v: FieldVector) -> Any:
    m = _check_lengths(u, v)
    den = _kernel_denominators(u, v)
    plus = _product(1 + x for x in u) * _product(1 + y for y in v)
    minus = _product(1 - x for x in u) * _product(1 - y for y in v)
    half_sum = HALF * (plus + (-1) ** m * minus)
    return half_sum * _vandermonde_pair(u, v) / _product(d for row in den for d in row)


def _check_border(x: FieldVector, y: FieldVector) -> None:
    for name, vec in (("x", x), ("y", y)):
        for i, t in enumerate(vec):
            if 1 + t == 0:
                raise SingularDenominator(f"1 + {name}[{i}] = 0")


def build_W_bordered(x: FieldVector, y: FieldVector) -> FieldMatrix:
    """M(x, y) bordered by a zero corner and a row and column of ones."""
    m = _check_lengths(x, y)
    _check_border(x, y)
    inner = build_M(x, y)
    rows = [[0] + [1] * m]
    rows += [[1] + list(inner.rows[i]) for i in range(m)]
    return FieldMatrix.from_rows(rows)


def det_W_closed_form(x: FieldVector, y: FieldVector) -> Any:
    m = _check_lengths(x, y)
    _check_border(x, y)
    den = _kernel_denominators(x, y)
    plus = _product(1 + t for t in x) * _product(1 + t for t in y)
    minus = _product(1 - t for t in x) * _product(1 - t for t in y)
    half_diff = -HALF * (plus - (-1) ** m * minus)
    return half_diff * _vandermonde_pair(x, y) / _product(d for row in den for d in row)


def det_W_difference(x: FieldVector, y: FieldVector, det: Callable | None = None) -> Any:
    """det M_{m+1}((1, x), (1, y)) - det M_m(x, y), both by direct elimination."""
    det = det or field_det
    _check_border(x, y)
    big = build_M([1, *x], [1, *y])
    return det(big) - det(build_M(x, y))


def field_det(M: FieldMatrix | Sequence[Sequence[Any]]) -> Any:
    """Fraction-free (Bareiss) elimination over an exact field.

    Divisions by the previous pivot are exact; the inverse is taken once per
    step because inversion is the expensive operation in number fields.
    """
    rows = [list(r) for r in (M.rows if isinstance(M, FieldMatrix) else M)]
    size = len(rows)
    if size == 0:
        return ONE
    sign = 1
    prev_inv = ONE
    for k in range(size - 1):
        piv = next((i for i in range(k, size) if rows[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            rows[k], rows[piv] = rows[piv], rows[k]
            sign = -sign
        pk = rows[k]
        pv = pk[k]
        for i in range(k + 1, size):
            ri = rows[i]
            c = ri[k]
            if c == 0:
                rows[i] = [None] * (k + 1) + [pv * ri[j] * prev_inv for j in range(k + 1, size)]
            else:
                rows[i] = [None] * (k + 1) + [
                    (pv * ri[j] - c * pk[j]) * prev_inv for j in range(k + 1, size)
                ]
        prev_inv = ONE / pv
    last = rows[size - 1][size - 1]
    return last if sign == 1 else -last


# ---------------------------------------------------------------------------
# random instances for property tests
# ---------------------------------------------------------------------------


def random_rational(rng: random.Random, bound: int = 9) -> Fraction:
    """num/den with num, den uniform in [-bound, bound] and den != 0."""
    den = 0
    while den == 0:
        den = rng.randint(-bound, bound)
    return Fraction(rng.randint(-bound, bound), den)


def random_vectors(
    rng: random.Random, m: int, bordered: bool = False, distinct: bool = True, bound: int = 9
) -> tuple[list[Fraction], list[Fraction]]:
    """Rejection-sampled (u, v) with 1 + u_i v_j != 0.

    ``distinct`` rejects repeated coordinates so the closed forms are not
    trivially zero; ``bordered`` also rejects u_i = -1 and v_j = -1.
    """
    while True:
        u = [random_rational(rng, bound) for _ in range(m)]
        v = [random_rational(rng, bound) for _ in range(m)]
        if any(1 + a * b == 0 for a in u for b in v):
            continue
        if distinct and (len(set(u)) < m or len(set(v)) < m):
            continue
        if bordered and any(t == -1 for t in (*u, *v)):
            continue
        return u, v
