"""``evil-det`` command line: verify primes, print the determinant sequence, benchmark kernels.

Exit status is 0 when every executed check passed, 1 when any failed and 2
for usage errors.  JSON output is one top-level array; CSV has a fixed
column order and always a header row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Sequence

from .matrix import build_chapman, det_bareiss, det_modular, hadamard_bound
from .modular import residue_count
from .numtheory import OddPrime
from .verifier import (
    CHECK_NAMES,
    SCHEMA_VERSION,
    ClassFilter,
    Depth,
    VerificationAborted,
    VerificationError,
    VerifyConfig,
    emit_sequence,
    verify_range,
)

RECORD_COLUMNS = (
    ["schema", "p", "residue_class_mod8", "status", "det_bareiss", "det_modular", "h",
     "epsilon_alpha", "epsilon_beta", "a", "b"]
    + list(CHECK_NAMES)
    + ["error"]
)
SEQUENCE_COLUMNS = ["schema", "p", "det"]
BENCH_COLUMNS = ["schema", "p", "side", "hadamard_bits", "residues", "det",
                 "bareiss_seconds", "modular_seconds", "agree"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    prime: int | None = None
    bound: int | None = None
    primes: tuple[int, ...] = ()
    depth: Depth = Depth.DETERMINANT_ONLY
    class_filter: ClassFilter = ClassFilter.ONE_MOD_4
    output_format: str = "json"
    output_path: str | None = None
    workers: int = 1
    cyclo_cap: int = 61
    continue_on_failure: bool = False
    timings: bool = False

    def __post_init__(self) -> None:
        if self.bound is not None and self.bound < 3 and self.command == "verify":
            raise UsageError(f"--range must be at least 3, got {self.bound}")
        if self.workers < 1:
            raise UsageError(f"--workers must be at least 1, got {self.workers}")
        if self.cyclo_cap < 5:
            raise UsageError(f"--cyclo-cap must be at least 5, got {self.cyclo_cap}")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "table"], default="json")
    common.add_argument("--out", metavar="PATH", help="write here instead of standard output")

    parser = argparse.ArgumentParser(prog="evil-det", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="verify one prime or a range")
    target = v.add_mutually_exclusive_group(required=True)
    target.add_argument("--prime", type=int)
    target.add_argument("--range", type=int, dest="bound", metavar="N")
    v.add_argument("--depth", choices=[d.value for d in Depth], default=Depth.DETERMINANT_ONLY.value)
    v.add_argument("--class", choices=[c.value for c in ClassFilter], default=ClassFilter.ONE_MOD_4.value,
                   dest="class_filter")
    v.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    v.add_argument("--cyclo-cap", type=int, default=61)
    v.add_argument("--continue-on-failure", action="store_true")
    v.add_argument("--timings", action="store_true", help="add per-phase wall times to each record")

    s = sub.add_parser("sequence", parents=[common], help="det C for p = 1 (mod 4) up to a bound")
    s.add_argument("--bound", "--range", type=int, required=True, dest="bound")

    b = sub.add_parser("bench", parents=[common], help="time Bareiss against multi-modular")
    b.add_argument("--primes", required=True, help="comma-separated list")
    return parser


def _parse_primes(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(OddPrime(int(part))))
        except ValueError as exc:
            raise UsageError(str(exc) if part.lstrip("-").isdigit() else f"not an integer: {part!r}")
    if not out:
        raise UsageError("--primes needs at least one prime")
    return tuple(out)


def _config(ns: argparse.Namespace) -> CliConfig:
    kw = dict(command=ns.command, output_format=ns.format, output_path=ns.out)
    if ns.command == "verify":
        if ns.prime is not None:
            try:
                OddPrime(ns.prime)
            except ValueError as exc:
                raise UsageError(str(exc))
        kw.update(prime=ns.prime, bound=ns.bound, depth=Depth(ns.depth),
                  class_filter=ClassFilter(ns.class_filter), workers=ns.workers,
                  cyclo_cap=ns.cyclo_cap, continue_on_failure=ns.continue_on_failure,
                  timings=ns.timings)
    elif ns.command == "sequence":
        kw.update(bound=ns.bound)
    else:
        kw.update(primes=_parse_primes(ns.primes))
    return CliConfig(**kw)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _flatten_record(d: dict) -> dict:
    eps = d["epsilon"] or {}
    row = {k: d[k] for k in RECORD_COLUMNS if k in d}
    row["epsilon_alpha"] = eps.get("alpha")
    row["epsilon_beta"] = eps.get("beta")
    row.update(d["checks"])
    if "elapsed" in d:
        row["elapsed_total"] = round(sum(d["elapsed"].values()), 6)
    return row


def _render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    flat = [_flatten_record(r) if "checks" in r else r for r in rows]
    if flat and "elapsed_total" in flat[0]:
        columns = columns + ["elapsed_total"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in flat:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
        return buf.getvalue()
    return _table(flat, columns)


def _table(rows: list[dict], columns: list[str]) -> str:
    if columns is RECORD_COLUMNS or "theorem1" in columns:
        # the full record is too wide for a terminal; keep the informative part
        columns = ["p", "residue_class_mod8", "status", "det_modular", "h", "a"]
        rows = [dict(r, failed=",".join(c for c in CHECK_NAMES if r.get(c) == "fail")) for r in rows]
        columns.append("failed")
    cells = [[str(c) for c in columns]]
    cells += [["" if r.get(c) is None else str(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_verify(cfg: CliConfig) -> int:
    config = VerifyConfig(depth=cfg.depth, cyclo_cap=cfg.cyclo_cap)
    code = 0
    try:
        if cfg.prime is not None:
            records = verify_range(cfg.prime, cfg.depth, config=config, workers=1,
                                   continue_on_failure=cfg.continue_on_failure, primes=[cfg.prime])
        else:
            records = verify_range(cfg.bound, cfg.depth, cfg.class_filter, config=config,
                                   workers=cfg.workers, continue_on_failure=cfg.continue_on_failure)
    except VerificationAborted as exc:
        print(f"evil-det: {exc}", file=sys.stderr)
        records = exc.completed
        code = 1
    except VerificationError as exc:
        print(f"evil-det: {exc}", file=sys.stderr)
        records = []
        code = 1
    if any(r.status != "PASS" for r in records):
        code = 1
    rows = [r.to_dict(timings=cfg.timings) for r in records]
    _write(_render(rows, RECORD_COLUMNS, cfg.output_format), cfg.output_path)
    return code


def cmd_sequence(cfg: CliConfig) -> int:
    rows = [{"schema": SCHEMA_VERSION, "p": p, "det": d} for p, d in emit_sequence(cfg.bound)]
    _write(_render(rows, SEQUENCE_COLUMNS, cfg.output_format), cfg.output_path)
    return 0


def cmd_bench(cfg: CliConfig) -> int:
    rows = []
    code = 0
    for p in cfg.primes:
        C = build_chapman(p)
        t0 = time.perf_counter()
        d_mod = det_modular(C)
        t1 = time.perf_counter()
        d_bar = det_bareiss(C)
        t2 = time.perf_counter()
        agree = d_mod == d_bar
        code |= not agree
        rows.append({
            "schema": SCHEMA_VERSION, "p": p, "side": C.rows,
            "hadamard_bits": hadamard_bound(C).bit_length(), "residues": residue_count(C),
            "det": d_bar, "bareiss_seconds": round(t2 - t1, 6),
            "modular_seconds": round(t1 - t0, 6), "agree": agree,
        })
    _write(_render(rows, BENCH_COLUMNS, cfg.output_format), cfg.output_path)
    return int(code)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config(ns)
    except UsageError as exc:
        print(f"evil-det: error: {exc}", file=sys.stderr)
        return 2
    return {"verify": cmd_verify, "sequence": cmd_sequence, "bench": cmd_bench}[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
