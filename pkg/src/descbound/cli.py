"""Command-line front end.

Subcommands:

* ``bound``  -- solve the fixed-point bound for one (p_hat, bits) pair;
* ``count``  -- parse a ``.rvw`` description and print its bit ledger;
* ``table``  -- render rows of (test error, bits, bound) in the shape of
  the published results tables;
* ``verify`` -- run the Monte Carlo / numeric checks;
* ``parse``  -- parse a ``.rvw`` file and report its structure.

Output formats: ``text`` (default), ``json``, ``csv``.  JSON outputs carry
a ``schema`` tag and validate against the schema files shipped under
``descbound/schemas/``.  Exit codes: 0 success, 1 verification failure,
2 usage or input error.  All file I/O is UTF-8.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .bounds import (BoundInputs, BoundResult, DEFAULT_CAP_C, DEFAULT_DELTA,
                     DEFAULT_N_TEST, DomainError, solve_bound)
from .codebook import Codebook, UnknownSymbolError, default_codebook, load_codebook
from .dsl import (Binding, ChainStatement, DescriptionDoc, DslError, Equation,
                  Prose, parse_file)
from .graphs import ArchDefinition
from .encoding import CountConfig, EnglishMode, PROFILES, count_description
from .verify import McConfig, kl_scan, mc_chernoff, mc_theorem_coverage

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

FORMATS = ("text", "json", "csv")

# Published (test error, bits-with-baseline, bits-without-baseline) input
# triples, consumed as inputs; the bound columns are always recomputed.
# option1 counted English prose at 1.0 bit per character, option2 at 10
# bits per word.
PRESET_ROWS: dict[str, tuple[tuple[str, float, int, int], ...]] = {
    "option1": (
        ("ResNet-152", 0.0449, 426, 729),
        ("DenseNet-264", 0.0529, 362, 741),
    ),
    "option2": (
        ("ResNet-152", 0.0449, 556, 1032),
        ("DenseNet-264", 0.0529, 454, 980),
    ),
}


@dataclass(frozen=True)
class RunConfig:
    """Shared run parameters; the defaults are the headline regime."""

    n_test: int = DEFAULT_N_TEST
    cap_c: float = DEFAULT_CAP_C
    delta: float = DEFAULT_DELTA
    english: EnglishMode = EnglishMode.per_char()
    codebook_path: str | None = None
    profile: str = "uniform8"
    fmt: str = "text"

    def __post_init__(self) -> None:
        if self.fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.fmt!r}")


@dataclass(frozen=True)
class TableRow:
    """One results-table row; bounds can never undercut the observed error."""

    model: str
    test_error: float
    desc_bits_with_baseline: int
    bound_with_baseline: float
    desc_bits_without: int
    bound_without: float

    def __post_init__(self) -> None:
        if (self.bound_with_baseline < self.test_error
                or self.bound_without < self.test_error):
            raise ValueError(f"bound below test error for {self.model!r}")


def percent(value: float) -> str:
    """Render a probability as a percentage, half-up to two decimals."""
    scaled = Decimal(repr(float(value))).scaleb(2)
    return f"{scaled.quantize(Decimal('0.01'), rounding=ROUND_HALF_UP)}%"


def _english_mode(spec: str) -> EnglishMode:
    """Parse ``per_char[:rate]`` or ``per_word[:width]``."""
    name, _, rest = spec.partition(":")
    if name == "per_char":
        return EnglishMode.per_char(float(rest) if rest else 1.0)
    if name == "per_word":
        return EnglishMode.per_word(int(rest) if rest else 10)
    raise ValueError(f"bad english mode {spec!r} "
                     f"(expected per_char[:rate] or per_word[:width])")


def _class_errors(spec: str) -> tuple[float, ...]:
    """Parse ``0.2x16`` / ``0.1,0.3x3,0.2`` into a flat error tuple."""
    out: list[float] = []
    for part in spec.split(","):
        part = part.strip()
        value, sep, count = part.partition("x")
        out.extend([float(value)] * (int(count) if sep else 1))
    return tuple(out)


def _preset_row(spec: str) -> tuple[str, float, int, int]:
    """Parse ``model,p_hat,bits_with,bits_without`` (model without commas)."""
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) != 4:
        raise ValueError(f"bad row {spec!r} "
                         f"(expected model,p_hat,bits_with,bits_without)")
    return parts[0], float(parts[1]), int(parts[2]), int(parts[3])


def _load_codebook(path: str | None) -> Codebook:
    return load_codebook(path) if path else default_codebook()


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=False))


def _emit_csv(header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    print(buf.getvalue(), end="")


# ---------------------------------------------------------------------------
# bound


def cmd_bound(args: argparse.Namespace) -> int:
    inputs = BoundInputs(p_hat=args.p_hat, desc_bits=args.bits,
                         n_test=args.n, cap_c=args.cap_c, delta=args.delta)
    result = solve_bound(inputs)
    if args.format == "json":
        _emit_json(_bound_json(inputs, result))
    elif args.format == "csv":
        _emit_csv(
            ["p_hat", "desc_bits", "n_test", "cap_c", "delta",
             "p_star", "p_star_pct", "slack", "margin", "warnings"],
            [[inputs.p_hat, inputs.desc_bits, inputs.n_test, inputs.cap_c,
              inputs.delta, repr(result.p_star), percent(result.p_star),
              repr(result.slack), repr(result.margin),
              ";".join(result.warnings)]])
    else:
        print(f"p_star:   {result.p_star!r}  ({percent(result.p_star)})")
        print(f"K:        {result.slack!r}")
        print(f"roots:    p1={result.roots[0]!r}, p2={result.roots[1]!r}")
        print(f"margin:   {result.margin!r}")
        print(f"warnings: {', '.join(result.warnings) if result.warnings else '(none)'}")
    return EXIT_OK


def _bound_json(inputs: BoundInputs, result: BoundResult) -> dict:
    return {
        "schema": "descbound.bound/1",
        "inputs": {
            "p_hat": inputs.p_hat,
            "desc_bits": inputs.desc_bits,
            "n_test": inputs.n_test,
            "cap_c": inputs.cap_c,
            "delta": inputs.delta,
        },
        "p_star": result.p_star,
        "p_star_pct": percent(result.p_star),
        "slack": result.slack,
        "roots": list(result.roots),
        "margin": result.margin,
        "warnings": list(result.warnings),
    }


# ---------------------------------------------------------------------------
# count


def _apply_inherit(doc: DescriptionDoc, baseline_path: str) -> None:
    """Mark sections whose names also appear in the baseline description."""
    baseline = parse_file(baseline_path)
    names = {section.name for section in baseline.sections}
    for section in doc.sections:
        if section.name in names:
            section.inherited_from_baseline = True
            if section.inherit_from is None:
                section.inherit_from = baseline.model_name or None


def _count_file(path: str, args: argparse.Namespace):
    codebook = _load_codebook(args.codebook)
    doc = parse_file(path, codebook)
    if args.inherit:
        _apply_inherit(doc, args.inherit)
    cfg = CountConfig(english=args.english, profile=args.profile)
    return doc, count_description(doc, cfg, codebook)


def cmd_count(args: argparse.Namespace) -> int:
    _, ledger = _count_file(args.file, args)
    if args.format == "json":
        _emit_json(ledger.to_json_dict())
    elif args.format == "csv":
        rows = [[i.label, i.bits, i.rubric,
                 "" if i.uninherited_bits is None else i.uninherited_bits]
                for i in ledger.items]
        _emit_csv(["label", "bits", "rubric", "uninherited_bits"], rows)
    else:
        print(ledger.render_text())
    return EXIT_OK


# ---------------------------------------------------------------------------
# table


def _table_rows(args: argparse.Namespace) -> list[TableRow]:
    inputs: list[tuple[str, float, int, int]] = []
    if args.paper_preset:
        inputs.extend(PRESET_ROWS[args.paper_preset])
    for spec in args.row:
        inputs.append(spec)
    if args.files:
        errors = args.test_error
        if len(errors) != len(args.files):
            raise ValueError(
                f"{len(args.files)} description file(s) but "
                f"{len(errors)} --test-error value(s)")
        for path, err in zip(args.files, errors):
            doc, ledger = _count_file(path, args)
            model = doc.model_name or Path(path).stem
            inputs.append((model, err, ledger.total_bits,
                           ledger.total_bits_uninherited))

    rows = []
    for model, p_hat, bits_with, bits_without in inputs:
        with_b = solve_bound(BoundInputs(
            p_hat=p_hat, desc_bits=bits_with, n_test=args.n,
            cap_c=args.cap_c, delta=args.delta))
        without_b = solve_bound(BoundInputs(
            p_hat=p_hat, desc_bits=bits_without, n_test=args.n,
            cap_c=args.cap_c, delta=args.delta))
        rows.append(TableRow(
            model=model, test_error=p_hat,
            desc_bits_with_baseline=bits_with,
            bound_with_baseline=with_b.p_star,
            desc_bits_without=bits_without,
            bound_without=without_b.p_star))
    return rows


_TABLE_HEADER = ["model", "test error", "bits w/ base", "bound w/ base",
                 "bits w/o base", "bound w/o base"]


def cmd_table(args: argparse.Namespace) -> int:
    rows = _table_rows(args)
    cells = [[r.model, percent(r.test_error),
              str(r.desc_bits_with_baseline), percent(r.bound_with_baseline),
              str(r.desc_bits_without), percent(r.bound_without)]
             for r in rows]
    if args.format == "json":
        _emit_json({
            "schema": "descbound.table/1",
            "config": {"n_test": args.n, "cap_c": args.cap_c,
                       "delta": args.delta},
            "rows": [{
                "model": r.model,
                "test_error": r.test_error,
                "test_error_pct": percent(r.test_error),
                "desc_bits_with_baseline": r.desc_bits_with_baseline,
                "bound_with_baseline": r.bound_with_baseline,
                "bound_with_baseline_pct": percent(r.bound_with_baseline),
                "desc_bits_without": r.desc_bits_without,
                "bound_without": r.bound_without,
                "bound_without_pct": percent(r.bound_without),
            } for r in rows],
        })
    elif args.format == "csv":
        _emit_csv(_TABLE_HEADER, cells)
    else:
        table = [_TABLE_HEADER] + cells
        widths = [max(len(row[i]) for row in table)
                  for i in range(len(_TABLE_HEADER))]
        for row in table:
            line = "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(row))
            print(line.rstrip())
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _run_checks(args: argparse.Namespace) -> list[dict]:
    cfg = McConfig(trials=args.trials, seed=args.seed, workers=args.workers)
    checks: list[dict] = []
    wanted = ("chernoff", "coverage", "kl") if args.check == "all" \
        else (args.check,)
    if "chernoff" in wanted:
        n = args.n if args.n is not None else 100
        report = mc_chernoff(args.p, args.eps, n, cfg)
        checks.append({
            "name": "chernoff",
            "params": {"p": args.p, "eps": args.eps, "n": n,
                       "trials": args.trials},
            "empirical": report.empirical,
            "analytic": report.analytic,
            "std_err": report.std_err,
            "passed": report.passed,
        })
    if "coverage" in wanted:
        n = args.n if args.n is not None else 2000
        errors = list(args.class_errors)
        report = mc_theorem_coverage(args.s_bits, n, args.cap_c,
                                     args.delta, errors, cfg)
        checks.append({
            "name": "coverage",
            "params": {"s_bits": args.s_bits, "n": n, "cap_c": args.cap_c,
                       "delta": args.delta, "classifiers": len(errors),
                       "trials": args.trials},
            "empirical": report.empirical,
            "analytic": report.analytic,
            "std_err": report.std_err,
            "passed": report.passed,
        })
    if "kl" in wanted:
        violations = kl_scan(args.grid_p, args.grid_eps)
        checks.append({
            "name": "kl_scan",
            "params": {"grid_p": args.grid_p, "grid_eps": args.grid_eps},
            "violations": violations,
            "passed": violations == 0,
        })
    return checks


def cmd_verify(args: argparse.Namespace) -> int:
    checks = _run_checks(args)
    all_passed = all(c["passed"] for c in checks)
    if args.format == "json":
        _emit_json({
            "schema": "descbound.verify/1",
            "seed": args.seed,
            "workers": args.workers,
            "checks": checks,
            "passed": all_passed,
        })
    elif args.format == "csv":
        rows = [[c["name"], c.get("empirical", ""), c.get("analytic", ""),
                 c.get("std_err", ""), c.get("violations", ""),
                 c["passed"]] for c in checks]
        _emit_csv(["name", "empirical", "analytic", "std_err", "violations",
                   "passed"], rows)
    else:
        for c in checks:
            verdict = "PASS" if c["passed"] else "FAIL"
            if c["name"] == "kl_scan":
                print(f"kl_scan: violations={c['violations']} "
                      f"grid={c['params']['grid_p']}x{c['params']['grid_eps']}"
                      f"  {verdict}")
            else:
                print(f"{c['name']}: empirical={c['empirical']:.6g} "
                      f"analytic={c['analytic']:.6g} "
                      f"std_err={c['std_err']:.3g}  {verdict}")
        print("all checks passed" if all_passed else "verification FAILED")
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# parse


def _item_entry(item) -> dict:
    if isinstance(item, Equation):
        return {"kind": "equation", "name": item.name}
    if isinstance(item, ArchDefinition):
        return {"kind": "definition", "name": item.name}
    if isinstance(item, Binding):
        return {"kind": "binding", "name": item.name}
    if isinstance(item, ChainStatement):
        return {"kind": "chain"}
    if isinstance(item, Prose):
        return {"kind": "prose"}
    raise TypeError(f"unexpected item {item!r}")


def cmd_parse(args: argparse.Namespace) -> int:
    codebook = _load_codebook(args.codebook)
    doc = parse_file(args.file, codebook)
    sections = [{
        "name": s.name,
        "kind": s.kind,
        "inherited": s.inherited_from_baseline,
        "items": [_item_entry(i) for i in s.items],
    } for s in doc.sections]
    if args.format == "json":
        _emit_json({
            "schema": "descbound.parse/1",
            "model": doc.model_name,
            "baseline": doc.baseline_ref,
            "sections": sections,
        })
    elif args.format == "csv":
        rows = [[s["name"], s["kind"], s["inherited"],
                 " ".join(e["kind"] for e in s["items"])]
                for s in sections]
        _emit_csv(["section", "kind", "inherited", "items"], rows)
    else:
        if doc.model_name:
            print(f"model:    {doc.model_name}")
        if doc.baseline_ref:
            print(f"baseline: {doc.baseline_ref}")
        for s in sections:
            flags = " [inherited]" if s["inherited"] else ""
            names = ", ".join(
                e["kind"] + (f" {e['name']}" if "name" in e else "")
                for e in s["items"])
            print(f"section {s['name']} ({s['kind']}){flags}: "
                  f"{names if names else '(empty)'}")
        print("ok")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring


def _add_format(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=FORMATS, default="text",
                     help="output format (default text)")


def _add_regime(sub: argparse.ArgumentParser, n_default: int = DEFAULT_N_TEST,
                cap_default: float = DEFAULT_CAP_C,
                delta_default: float = DEFAULT_DELTA) -> None:
    sub.add_argument("--n", type=int, default=n_default,
                     help=f"test-set size (default {n_default})")
    sub.add_argument("--cap-c", type=float, default=cap_default,
                     help=f"description-length cap C (default {cap_default:g})")
    sub.add_argument("--delta", type=float, default=delta_default,
                     help=f"confidence parameter (default {delta_default})")


def _add_count_opts(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--codebook", default=None,
                     help="codebook JSON path (default: RVW_CODEBOOK "
                          "or the bundled codebook)")
    sub.add_argument("--profile", choices=sorted(PROFILES), default="uniform8",
                     help="hyperparameter slot-width profile")
    sub.add_argument("--english", type=_english_mode,
                     default=EnglishMode.per_char(), metavar="MODE",
                     help="prose counting mode: per_char[:rate] or "
                          "per_word[:width] (default per_char:1.0)")
    sub.add_argument("--inherit", default=None, metavar="BASELINE.rvw",
                     help="mark sections that also appear in this baseline "
                          "description as inherited (charged 0 bits)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="descbound",
        description="Description-length bit counting and the fixed-point "
                    "bound on population error.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_bound = subs.add_parser(
        "bound", help="solve the bound for one (p_hat, bits) pair")
    p_bound.add_argument("--p-hat", type=float, required=True,
                         help="observed test error, e.g. 0.0449")
    p_bound.add_argument("--bits", type=float, required=True,
                         help="description length in bits")
    _add_regime(p_bound)
    _add_format(p_bound)
    p_bound.set_defaults(func=cmd_bound)

    p_count = subs.add_parser(
        "count", help="count the bits of a .rvw description file")
    p_count.add_argument("file", help=".rvw description file")
    _add_count_opts(p_count)
    _add_format(p_count)
    p_count.set_defaults(func=cmd_count)

    p_table = subs.add_parser(
        "table", help="render a results table of bounds")
    p_table.add_argument("files", nargs="*",
                         help=".rvw description files (one row each; "
                              "requires matching --test-error flags)")
    p_table.add_argument("--test-error", type=float, action="append",
                         default=[], metavar="P",
                         help="observed test error for each file, in order")
    p_table.add_argument("--row", type=_preset_row, action="append",
                         default=[], metavar="MODEL,P_HAT,BITS_W,BITS_WO",
                         help="explicit row from reported numbers")
    p_table.add_argument("--paper-preset", choices=sorted(PRESET_ROWS),
                         default=None,
                         help="use the published input pairs (option1: "
                              "prose at 1 bit/char; option2: 10 bits/word)")
    _add_count_opts(p_table)
    _add_regime(p_table)
    _add_format(p_table)
    p_table.set_defaults(func=cmd_table)

    p_verify = subs.add_parser(
        "verify", help="run Monte Carlo and numeric checks")
    p_verify.add_argument("--check", choices=("chernoff", "coverage", "kl",
                                              "all"), default="all")
    p_verify.add_argument("--trials", type=int, default=100_000,
                          help="Monte Carlo trials (default 100000)")
    p_verify.add_argument("--seed", type=int, default=42,
                          help="master RNG seed (default 42)")
    p_verify.add_argument("--workers", type=int, default=1,
                          help="parallel workers (default 1)")
    p_verify.add_argument("--p", type=float, default=0.5,
                          help="chernoff: success probability (default 0.5)")
    p_verify.add_argument("--eps", type=float, default=0.1,
                          help="chernoff: tail offset (default 0.1)")
    p_verify.add_argument("--n", type=int, default=None,
                          help="sample size per trial (default: 100 for "
                               "chernoff, 2000 for coverage)")
    p_verify.add_argument("--s-bits", type=int, default=4,
                          help="coverage: shared description length")
    p_verify.add_argument("--cap-c", type=float, default=100,
                          help="coverage: description-length cap (default 100)")
    p_verify.add_argument("--delta", type=float, default=0.05,
                          help="coverage: confidence parameter (default 0.05)")
    p_verify.add_argument("--class-errors", type=_class_errors,
                          default=_class_errors("0.2x16"), metavar="SPEC",
                          help="coverage: population errors, e.g. 0.2x16 "
                               "or 0.1,0.2,0.3 (default 0.2x16)")
    p_verify.add_argument("--grid-p", type=int, default=100,
                          help="kl: grid points in p (default 100)")
    p_verify.add_argument("--grid-eps", type=int, default=100,
                          help="kl: grid points in eps (default 100)")
    _add_format(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_parse = subs.add_parser(
        "parse", help="parse a .rvw file and report its structure")
    p_parse.add_argument("file", help=".rvw description file")
    p_parse.add_argument("--codebook", default=None,
                         help="codebook JSON path (default: RVW_CODEBOOK "
                              "or the bundled codebook)")
    _add_format(p_parse)
    p_parse.set_defaults(func=cmd_parse)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownSymbolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
