"""Per-prime verification pipeline and range scans.

For p = 1 (mod 4) the determinant of the Legendre matrix is computed twice
(Bareiss and multi-modular) and compared with -a, where a comes from the
fundamental unit and class number.  For p = 3 (mod 4) the determinant must be
1.  The ``full`` depth adds the cyclotomic identities, each under a size cap.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

from . import cyclotomic, quadfield
from .matrix import build_chapman, det_bareiss, det_modular
from .numtheory import OddPrime, primes_in_class, sieve

__all__ = [
    "CHECK_NAMES",
    "ClassFilter",
    "Depth",
    "VerificationAborted",
    "VerificationError",
    "VerificationRecord",
    "VerifyConfig",
    "emit_sequence",
    "verify_prime",
    "verify_range",
]

SCHEMA_VERSION = 1

CHECK_NAMES = (
    "theorem1",
    "corollary2_parity",
    "corollary2_sign",
    "decomposition",
    "gauss_lemma",
    "gauss_corollary",
    "spec_fact",
    "prod_identities",
    "detW_threeway",
    "p3mod4_unit_det",
)

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


class Depth(str, Enum):
    DETERMINANT_ONLY = "determinant-only"
    FULL = "full"


class ClassFilter(str, Enum):
    ONE_MOD_4 = "1mod4"
    THREE_MOD_4 = "3mod4"
    BOTH = "both"


@dataclass(frozen=True)
class VerifyConfig:
    """Read-only knobs shared by every worker.

    ``bareiss_3mod4_cap`` bounds the primes p = 3 (mod 4) for which the Bareiss
    determinant is run next to the modular one (None means always).
    """

    depth: Depth = Depth.DETERMINANT_ONLY
    cyclo_cap: int = 61
    gauss_cap: int = 97
    bareiss_3mod4_cap: int | None = 1000


class VerificationError(RuntimeError):
    """A sub-computation raised; ``phase`` names the pipeline step."""

    def __init__(self, p: int, phase: str, cause: BaseException):
        super().__init__(f"p={p}: {phase} failed: {type(cause).__name__}: {cause}")
        self.p = p
        self.phase = phase


class VerificationAborted(RuntimeError):
    """Raised by verify_range when a prime fails and continue-on-failure is off."""

    def __init__(self, record: "VerificationRecord", completed: list["VerificationRecord"]):
        super().__init__(f"verification failed at p={record.p}: {record.failure_summary()}")
        self.record = record
        self.completed = completed


@dataclass
class VerificationRecord:
    p: int
    residue_class_mod8: int
    det_bareiss: int | None = None
    det_modular: int | None = None
    h: int | None = None
    epsilon: quadfield.QuadElem | None = None
    a: int | None = None
    b: int | None = None
    checks: dict[str, str] = field(default_factory=lambda: {name: SKIPPED for name in CHECK_NAMES})
    elapsed: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error or any(v == FAIL for v in self.checks.values()):
            return "FAIL"
        return "PASS"

    @property
    def det(self) -> int | None:
        return self.det_bareiss if self.det_bareiss is not None else self.det_modular

    def failure_summary(self) -> str:
        failed = [k for k, v in self.checks.items() if v == FAIL]
        parts = []
        if failed:
            parts.append("failed checks: " + ", ".join(failed))
        if self.error:
            parts.append(self.error)
        return "; ".join(parts) or "ok"

    def to_dict(self, timings: bool = False) -> dict:
        """JSON-ready mapping; timings are left out unless asked for so output is reproducible."""
        out = {
            "schema": SCHEMA_VERSION,
            "p": self.p,
            "residue_class_mod8": self.residue_class_mod8,
            "status": self.status,
            "det_bareiss": self.det_bareiss,
            "det_modular": self.det_modular,
            "h": self.h,
            "epsilon": None if self.epsilon is None else {
                "alpha": self.epsilon.alpha, "beta": self.epsilon.beta,
            },
            "a": self.a,
            "b": self.b,
            "checks": {name: self.checks[name] for name in CHECK_NAMES},
            "error": self.error,
        }
        if timings:
            out["elapsed"] = {k: round(v, 6) for k, v in self.elapsed.items()}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationRecord":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported record schema {data.get('schema')!r}")
        eps = data.get("epsilon")
        return cls(
            p=data["p"],
            residue_class_mod8=data["residue_class_mod8"],
            det_bareiss=data["det_bareiss"],
            det_modular=data["det_modular"],
            h=data["h"],
            epsilon=None if eps is None else quadfield.QuadElem(eps["alpha"], eps["beta"], data["p"]),
            a=data["a"],
            b=data["b"],
            checks=dict(data["checks"]),
            elapsed=dict(data.get("elapsed", {})),
            error=data.get("error"),
        )


def _flag(ok: bool) -> str:
    return PASS if ok else FAIL


class _Phases:
    def __init__(self, record: VerificationRecord):
        self.record = record

    def run(self, name: str, fn: Callable, *args):
        t0 = time.perf_counter()
        try:
            return fn(*args)
        except Exception as exc:
            raise VerificationError(self.record.p, name, exc) from exc
        finally:
            self.record.elapsed[name] = self.record.elapsed.get(name, 0.0) + time.perf_counter() - t0


def verify_prime(p: int, depth: Depth | str = Depth.DETERMINANT_ONLY,
                 config: VerifyConfig | None = None) -> VerificationRecord:
    """Run the pipeline for one prime; sub-computation errors raise VerificationError."""
    p = OddPrime(p)
    config = config or VerifyConfig()
    depth = Depth(depth)
    rec = VerificationRecord(p=int(p), residue_class_mod8=p.mod8)
    ph = _Phases(rec)
    checks = rec.checks

    C = ph.run("build", build_chapman, p)
    rec.det_modular = ph.run("det_modular", det_modular, C)
    if p.mod4 == 1 or config.bareiss_3mod4_cap is None or p <= config.bareiss_3mod4_cap:
        rec.det_bareiss = ph.run("det_bareiss", det_bareiss, C)
    agree = rec.det_bareiss is None or rec.det_bareiss == rec.det_modular
    det = rec.det_modular
    full = depth is Depth.FULL

    if p.mod4 == 1:
        rec.epsilon = ph.run("fundamental_unit", quadfield.fundamental_unit, p)
        rec.h = ph.run("class_number", quadfield.class_number, p, rec.epsilon)
        rec.a, rec.b = ph.run("compute_a", quadfield.compute_a, p, rec.epsilon, rec.h)
        a, b = rec.a, rec.b
        checks["theorem1"] = _flag(agree and det == -a)
        checks["corollary2_parity"] = _flag(
            det % 2 == 0 and a % 2 == 0 and a * a - p * b * b == -1 and rec.h % 2 == 1
        )
        checks["corollary2_sign"] = _flag(det < 0 and a > 0)
        if full and p <= config.cyclo_cap:
            checks["decomposition"] = _flag(ph.run("decomposition", cyclotomic.verify_decomposition, p))
            checks["spec_fact"] = _flag(ph.run("spec_fact", cyclotomic.verify_spec_fact, p, a))
            prods = ph.run("prod_identities", cyclotomic.verify_prod_identities, p, rec.h, rec.epsilon)
            prod3 = ph.run("prod_identities", quadfield.verify_prod3, p, rec.epsilon, rec.h, a)
            checks["prod_identities"] = _flag(all(prods.values()) and prod3)
            d1, d2, d3 = ph.run("detW_threeway", cyclotomic.detW_threeway, p)
            checks["detW_threeway"] = _flag(d1 == d2 == d3)
        if full and p <= config.gauss_cap:
            checks["gauss_lemma"] = _flag(ph.run(
                "gauss_lemma", lambda: all(cyclotomic.verify_gauss_product(p, r) for r in range(1, p))
            ))
            checks["gauss_corollary"] = _flag(
                ph.run("gauss_corollary", cyclotomic.verify_one_plus_zeta_products, p)
            )
    else:
        checks["p3mod4_unit_det"] = _flag(agree and det == 1)
        if full and p <= config.cyclo_cap:
            checks["decomposition"] = _flag(
                ph.run("decomposition", cyclotomic.verify_decomposition_3mod4, p)
            )
    if not agree:
        rec.error = f"det_bareiss={rec.det_bareiss} differs from det_modular={rec.det_modular}"
    return rec


def _verify_or_record(p: int, depth: Depth, config: VerifyConfig, catch: bool) -> VerificationRecord:
    try:
        return verify_prime(p, depth, config)
    except VerificationError as exc:
        if not catch:
            raise
        q = OddPrime(p)
        return VerificationRecord(p=int(q), residue_class_mod8=q.mod8, error=str(exc))


def _select(bound: int, class_filter: ClassFilter) -> list[int]:
    if class_filter is ClassFilter.ONE_MOD_4:
        return [int(q) for q in primes_in_class(bound, 1, 4)]
    if class_filter is ClassFilter.THREE_MOD_4:
        return [int(q) for q in primes_in_class(bound, 3, 4)]
    return [q for q in sieve(bound) if q != 2]


def verify_range(bound: int, depth: Depth | str = Depth.DETERMINANT_ONLY,
                 class_filter: ClassFilter | str = ClassFilter.ONE_MOD_4, *,
                 config: VerifyConfig | None = None, workers: int | None = None,
                 continue_on_failure: bool = False,
                 primes: list[int] | None = None) -> list[VerificationRecord]:
    """Records for every selected odd prime <= bound, ascending by p.

    Work is spread over a process pool, largest primes first so the slow ones
    start early; the result never depends on the worker count.  Without
    ``continue_on_failure`` the first failing prime raises VerificationAborted.
    """
    if bound < 3 and primes is None:
        raise ValueError(f"bound must be >= 3, got {bound}")
    depth = Depth(depth)
    config = replace(config or VerifyConfig(), depth=depth)
    chosen = sorted(primes) if primes is not None else _select(bound, ClassFilter(class_filter))
    workers = workers or os.cpu_count() or 1
    if workers < 1:
        raise ValueError("workers must be >= 1")

    results: dict[int, VerificationRecord] = {}

    def finish(rec: VerificationRecord) -> None:
        results[rec.p] = rec
        if rec.status != "PASS" and not continue_on_failure:
            raise VerificationAborted(rec, [results[q] for q in sorted(results)])

    if workers == 1 or len(chosen) <= 1:
        for q in chosen:
            finish(_verify_or_record(q, depth, config, continue_on_failure))
        return [results[q] for q in chosen]

    with ProcessPoolExecutor(max_workers=min(workers, len(chosen))) as pool:
        futures = {
            pool.submit(_verify_or_record, q, depth, config, continue_on_failure): q
            for q in sorted(chosen, reverse=True)
        }
        pending = set(futures)
        try:
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in sorted(done, key=futures.get):
                    finish(fut.result())
        except BaseException:
            for fut in pending:
                fut.cancel()
            raise
    return [results[q] for q in chosen]


def emit_sequence(bound: int) -> list[tuple[int, int]]:
    """(p, det C) for p = 1 (mod 4), p <= bound, ascending."""
    return [(int(q), det_modular(build_chapman(q))) for q in primes_in_class(bound, 1, 4)]
