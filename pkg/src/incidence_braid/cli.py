"""Command-line front end.

Exit codes: 0 pass, 1 mathematical failure, 2 input or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Callable

from .braid import (
    DEFAULT_GUARD_DIM,
    LambdaTable,
    TableError,
    braid_defect_matrix,
    default_workers,
    nondegeneracy_check,
    structural_check,
    verify_braid_full,
    verify_braid_reduced,
)
from .families import (
    DEFAULT_MAX_TUPLES,
    BipartiteSpec,
    FamilyError,
    classify_search,
    lambda_build,
    params_from_json,
)
from .poset import PosetError, count_inclusion_pairs, poset_build
from .scalar import FieldError
from .sts import r_squared_check

SCHEMA = "incidence-braid/1"
EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
INPUT_ERRORS = (FieldError, FamilyError, TableError, PosetError, OSError, json.JSONDecodeError)


class InputError(Exception):
    pass


def _env_workers() -> int:
    raw = os.environ.get("INCIDENCE_BRAID_WORKERS", "1")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"INCIDENCE_BRAID_WORKERS is not an integer: {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation settings."""

    command: str
    input_path: str
    output_path: str | None
    workers: int
    guard_dim: int
    max_tuples: int
    verbose: bool

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        path = getattr(args, "params", None) or getattr(args, "table", None) \
            or getattr(args, "spec", None) or getattr(args, "poset", None)
        if not os.path.isfile(path):
            raise InputError(f"no such file: {path}")
        out = args.out
        if out and not os.path.isdir(os.path.dirname(os.path.abspath(out))):
            raise InputError(f"output directory does not exist: {out}")
        cfg = cls(
            command=args.command, input_path=path, output_path=out,
            workers=args.workers or _env_workers(),
            guard_dim=getattr(args, "guard_dim", DEFAULT_GUARD_DIM),
            max_tuples=getattr(args, "max_tuples", DEFAULT_MAX_TUPLES),
            verbose=args.verbose,
        )
        if min(cfg.workers, cfg.guard_dim, cfg.max_tuples) < 1:
            raise InputError("workers and guards must be positive")
        return cfg


def _load(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InputError("top-level JSON value must be an object")
    return data


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_build(args) -> int:
    spec, params = params_from_json(_load(args.params))
    _emit(lambda_build(spec, params).to_json(), args.out)
    return EXIT_PASS


def _matrix_report(tab: LambdaTable, guard: int) -> dict:
    res = braid_defect_matrix(tab, guard_dim=guard)
    cols = res.nonzero_columns()
    ce = None
    if cols:
        j = cols[0]
        ce = {"column": [list(tab.basis.label(k)) for k in tab.basis.unflat(j, 3)]}
    return {
        "check": "braid_matrix", "passed": res.is_zero, "checked": res.dim,
        "failures": len(cols), "counterexample": ce,
    }


def cmd_verify(args) -> int:
    tab = LambdaTable.from_json(_load(args.table))
    workers = args.workers or default_workers()
    runs: dict[str, Callable[[], dict]] = {
        "structural": lambda: structural_check(tab).to_json(),
        "nondegeneracy": lambda: nondegeneracy_check(tab).to_json(),
        "full": lambda: verify_braid_full(tab, workers, args.verbose).to_json(),
        "reduced": lambda: verify_braid_reduced(tab, workers, args.verbose).to_json(),
        "matrix": lambda: _matrix_report(tab, args.guard_dim),
        "sts": lambda: r_squared_check(tab, args.guard_dim).to_json(),
    }
    if args.mode == "all":
        gating = ["structural", "nondegeneracy", "full", "reduced", "matrix"]
        extra = ["sts"]
    else:
        gating, extra = [args.mode], []
    checks = [runs[name]() for name in gating]
    properties = [runs[name]() for name in extra]
    passed = all(c["passed"] for c in checks)
    doc = {
        "schema": SCHEMA,
        "mode": args.mode,
        "passed": passed,
        "poset": tab.P.to_json(),
        "field": tab.field.to_json(),
        "checks": checks,
    }
    if properties:
        doc["properties"] = properties
    _emit(doc, args.out)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_search(args) -> int:
    data = _load(args.spec)
    spec = BipartiteSpec.from_json(data).validate()
    rep = classify_search(spec, args.prime, workers=args.workers or default_workers(),
                          max_tuples=args.max_tuples)
    _emit(rep, args.out)
    ok = rep["soundness"]["failures"] == 0 and rep["sts_agreement"]["mismatches"] == 0
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_count(args) -> int:
    data = _load(args.poset)
    try:
        P = poset_build(data["elements"], data.get("covers", []))
    except KeyError as exc:
        raise InputError(f"missing key {exc}") from exc
    n = count_inclusion_pairs(P, args.arity)
    if args.out:
        _emit({"schema": SCHEMA, "arity": args.arity, "count": n}, args.out)
    else:
        print(n)
    return EXIT_PASS


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="incidence-braid",
        description="Build and verify braided λ-tables on incidence coalgebras.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--verbose", action="store_true", help="include per-inclusion residuals")
        p.add_argument("--workers", type=_positive, default=None,
                       help="worker processes (default: $INCIDENCE_BRAID_WORKERS or 1)")

    p = sub.add_parser("build", help="build the family table from a params file")
    p.add_argument("params")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="verify a table file")
    p.add_argument("table")
    p.add_argument("--mode", choices=["full", "reduced", "matrix", "sts", "all"], default="all")
    p.add_argument("--guard-dim", type=_positive, default=DEFAULT_GUARD_DIM,
                   help="largest matrix dimension the oracles may build")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="finite-field sweep over the family parameters")
    p.add_argument("spec")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--max-tuples", type=_positive, default=DEFAULT_MAX_TUPLES)
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("count", help="count box inclusions S ⊆ T in X^n")
    p.add_argument("poset")
    p.add_argument("--arity", type=int, choices=[2, 3], default=3)
    common(p)
    p.set_defaults(func=cmd_count)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        RunConfig.from_args(args)
        return args.func(args)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
