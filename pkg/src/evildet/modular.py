"""Multi-modular determinant kernel.

Residues are computed by LU factorisation over GF(q) for primes q < 2**22,
held in float64 with symmetric representatives.  With |entries| <= 2**21 a
dot product of up to 1024 terms stays below 2**53, so BLAS matrix products are
exact and only need a reduction afterwards.  Many primes are factored at once
as a stacked (batch, n, n) array; the determinant is recovered by CRT with a
balanced lift once the modulus product exceeds twice the Hadamard bound.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .numtheory import is_prime

__all__ = ["PRIME_CEILING", "choose_primes", "crt_balanced", "det_residues", "det_multimodular"]

PRIME_CEILING = 1 << 22
_INNER_CHUNK = 1024          # longest exact float64 dot product for q < 2**22
_BASE = 16                   # panel width below which elimination is column by column
_BATCH_ELEMENTS = 1 << 24    # batch * n * n cap (128 MiB of float64)


@lru_cache(maxsize=None)
def _primes_below_ceiling(count: int) -> tuple[int, ...]:
    out = []
    q = PRIME_CEILING - 1
    while len(out) < count:
        if is_prime(q):
            out.append(q)
        q -= 2
    return tuple(out)


def choose_primes(bound: int) -> list[int]:
    """Largest primes below 2**22, descending, whose product exceeds 2*bound."""
    target = 2 * bound
    guess = max(1, (target.bit_length() + 20) // 21)
    while True:
        primes = _primes_below_ceiling(guess)
        prod = 1
        for i, q in enumerate(primes):
            prod *= q
            if prod > target:
                return list(primes[: i + 1])
        guess *= 2


def crt_balanced(residues: list[int], moduli: list[int]) -> int:
    """The unique x with |x| < prod(moduli)/2 matching every residue."""
    x, m = 0, 1
    for r, q in zip(residues, moduli):
        # Garner step: lift x mod m to x mod m*q
        t = ((r - x) * pow(m, -1, q)) % q
        x += m * t
        m *= q
    return x - m if 2 * x > m else x


def _reduce(a: np.ndarray, q: np.ndarray, qinv: np.ndarray) -> None:
    a -= np.rint(a * qinv) * q


def _submul(c: np.ndarray, a: np.ndarray, b: np.ndarray, q: np.ndarray, qinv: np.ndarray) -> None:
    """c <- c - a @ b (mod q), batched, with the inner dimension chunked for exactness."""
    inner = a.shape[-1]
    for lo in range(0, inner, _INNER_CHUNK):
        hi = min(inner, lo + _INNER_CHUNK)
        c -= np.matmul(a[..., lo:hi], b[..., lo:hi, :])
        _reduce(c, q, qinv)


def _inverses(values: np.ndarray, moduli: list[int]) -> np.ndarray:
    out = np.zeros(len(moduli))
    for i, (v, q) in enumerate(zip(values, moduli)):
        v = int(v) % q
        if v:
            inv = pow(v, -1, q)
            out[i] = inv - q if 2 * inv > q else inv
    return out


def _trsm_unit_lower(L: np.ndarray, X: np.ndarray, q, qinv) -> None:
    """X <- L^-1 X in place, L unit lower triangular (diagonal ignored)."""
    m = L.shape[1]
    if m <= _BASE:
        for i in range(1, m):
            X[:, i : i + 1, :] -= np.matmul(L[:, i : i + 1, :i], X[:, :i, :])
            _reduce(X[:, i : i + 1, :], q, qinv)
        return
    h = m // 2
    _trsm_unit_lower(L[:, :h, :h], X[:, :h, :], q, qinv)
    _submul(X[:, h:, :], L[:, h:, :h], X[:, :h, :], q, qinv)
    _trsm_unit_lower(L[:, h:, h:], X[:, h:, :], q, qinv)


def _factor(A: np.ndarray, c0: int, c1: int, moduli, q, qinv, sign: np.ndarray) -> None:
    """Recursive LU of columns c0..c1-1 (rows c0..) with full-row pivot swaps."""
    if c1 - c0 <= _BASE:
        batch = np.arange(A.shape[0])
        for k in range(c0, c1):
            nonzero = A[:, k:, k] != 0
            found = nonzero.any(axis=1)
            where = nonzero.argmax(axis=1) + k
            swap = found & (where != k)
            if swap.any():
                bi = batch[swap]
                wi = where[swap]
                row_k = A[bi, k, :].copy()
                A[bi, k, :] = A[bi, wi, :]
                A[bi, wi, :] = row_k
                sign[swap] = -sign[swap]
            inv = _inverses(A[:, k, k], moduli)
            L = A[:, k + 1 :, k]
            L *= inv[:, None]
            _reduce(L, q[:, :, 0], qinv[:, :, 0])
            if k + 1 < c1:
                tail = A[:, k + 1 :, k + 1 : c1]
                tail -= L[:, :, None] * A[:, k, None, k + 1 : c1]
                _reduce(tail, q, qinv)
        return
    h = (c0 + c1) // 2
    _factor(A, c0, h, moduli, q, qinv, sign)
    _trsm_unit_lower(A[:, c0:h, c0:h], A[:, c0:h, h:c1], q, qinv)
    _submul(A[:, h:, h:c1], A[:, h:, c0:h], A[:, c0:h, h:c1], q, qinv)
    _factor(A, h, c1, moduli, q, qinv, sign)


def _lu_det_batch(A: np.ndarray, moduli: list[int]) -> list[int]:
    n = A.shape[1]
    q = np.array(moduli, dtype=np.float64)[:, None, None]
    qinv = 1.0 / q
    sign = np.ones(len(moduli), dtype=np.int64)
    _factor(A, 0, n, moduli, q, qinv, sign)
    out = []
    for b, m in enumerate(moduli):
        d = int(sign[b])
        for k in range(n):
            d = d * int(A[b, k, k]) % m
        out.append(d)
    return out


def det_residues(entries: list[int], size: int, moduli: list[int]) -> list[int]:
    """det mod q for each q in moduli (all q < 2**22), as residues in [0, q)."""
    if any(q >= PRIME_CEILING for q in moduli):
        raise ValueError("moduli must lie below 2**22 for exact float64 elimination")
    if size == 0:
        return [1 % q for q in moduli]
    small = all(-(1 << 62) < x < (1 << 62) for x in entries)
    base = np.array(entries, dtype=np.int64 if small else object).reshape(size, size)
    batch = max(1, _BATCH_ELEMENTS // (size * size))
    out: list[int] = []
    for lo in range(0, len(moduli), batch):
        chunk = moduli[lo : lo + batch]
        A = np.empty((len(chunk), size, size))
        for b, m in enumerate(chunk):
            r = base % m
            A[b] = np.where(2 * r > m, r - m, r).astype(np.float64)
        out.extend(_lu_det_batch(A, chunk))
    return out


def det_multimodular(M) -> int:
    from .matrix import hadamard_bound

    bound = hadamard_bound(M)
    if bound == 0:
        return 0
    moduli = choose_primes(bound)
    residues = det_residues(list(M.entries), M.rows, moduli)
    return crt_balanced(residues, moduli)


def residue_count(M) -> int:
    """How many primes det_modular will use for M."""
    from .matrix import hadamard_bound

    bound = hadamard_bound(M)
    return len(choose_primes(bound)) if bound else 0


def hadamard_bits(M) -> int:
    from .matrix import hadamard_bound

    return hadamard_bound(M).bit_length()

