"""Command-line surface: kappa, atoms, verify, scan, example.

Exit codes: 0 success/pass, 1 counterexample or failed check, 2 parse error
or unknown statement, 3 search budget exceeded, 4 not separable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional

from . import __version__
from .groups import GroupError, parse_group
from .isoperimetry import (
    BudgetExceededError,
    NotSeparableError,
    atoms,
    kappa,
)
from .scans import ScanCampaign, parse_campaign, run_scan
from .subsets import SubsetError, format_subset, parse_subset
from .verifiers import (
    STATEMENTS,
    ExampleConstructionError,
    reproduce_example_m5,
    verify_statement,
)

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_NOT_SEPARABLE = 4

BUDGET_ENV = "CRITPAIRS_BUDGET"


def _default_budget(args_budget: Optional[int]) -> Optional[int]:
    if args_budget is not None:
        return args_budget
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else None


def _doc(command: str, config: dict, result: dict) -> dict:
    return {
        "schema": "critpairs.doc/1",
        "version": __version__,
        "command": command,
        "config": config,
        "result": result,
    }


def validate_report_document(doc: dict) -> bool:
    """Minimal schema validation for emitted JSON documents."""
    schema = doc.get("schema")
    if schema == "critpairs.doc/1":
        return all(key in doc for key in ("version", "command", "config", "result"))
    if schema == "critpairs.report/1":
        return all(
            key in doc
            for key in ("statement", "instance", "hypotheses", "conclusion")
        )
    if schema == "critpairs.summary/1":
        return all(key in doc for key in ("campaign", "per_statement", "totals"))
    return False


def _cmd_kappa(args: argparse.Namespace) -> int:
    try:
        group = parse_group(args.group)
        s = parse_subset(group, args.set)
    except (GroupError, SubsetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        result = kappa(s, args.k, budget=_default_budget(args.budget))
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    payload = {
        "k": result.k,
        "value": result.value,
        "separable": result.separable,
        "witness": list(result.witness) if result.witness is not None else None,
        "ambient_order": len(result.ambient),
    }
    if args.format == "json":
        print(json.dumps(_doc("kappa", {"group": group.spec, "set": list(s), "k": args.k}, payload)))
    else:
        witness = (
            format_subset(result.witness) if result.witness is not None else "-"
        )
        sep = "separable" if result.separable else "not separable (convention value)"
        print(
            f"kappa_{result.k}({format_subset(s)} in {group.spec}) = {result.value} "
            f"[{sep}; witness {witness}; ambient order {len(result.ambient)}]"
        )
    return EXIT_OK


def _cmd_atoms(args: argparse.Namespace) -> int:
    try:
        group = parse_group(args.group)
        s = parse_subset(group, args.set)
    except (GroupError, SubsetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        atom_set = atoms(s, args.k, budget=_default_budget(args.budget))
    except NotSeparableError as exc:
        print(f"error: not separable: {exc}", file=sys.stderr)
        return EXIT_NOT_SEPARABLE
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    payload = {
        "k": atom_set.k,
        "kappa": atom_set.value,
        "cardinality": atom_set.cardinality,
        "atoms": [list(a) for a in atom_set.atoms],
    }
    if args.format == "json":
        print(json.dumps(_doc("atoms", {"group": group.spec, "set": list(s), "k": args.k}, payload)))
    else:
        print(
            f"{len(atom_set.atoms)} {args.k}-atom(s) of size {atom_set.cardinality} "
            f"(kappa_{args.k} = {atom_set.value}):"
        )
        for a in atom_set.atoms:
            print(f"  {format_subset(a)}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    if args.statement not in STATEMENTS:
        print(f"error: unknown statement id {args.statement!r}", file=sys.stderr)
        return EXIT_PARSE
    spec = STATEMENTS[args.statement]
    try:
        if spec.kind == "ints":
            s = tuple(int(x) for x in args.set.split(","))
            t = tuple(int(x) for x in args.tset.split(",")) if args.tset else ()
            report = verify_statement(args.statement, s, t)
        elif spec.kind == "param":
            report = verify_statement(args.statement, q=args.q)
        else:
            group = parse_group(args.group)
            s = parse_subset(group, args.set)
            t = parse_subset(group, args.tset) if args.tset else None
            if spec.kind == "pair" and t is None:
                print("error: statement requires -t/--tset", file=sys.stderr)
                return EXIT_PARSE
            report = verify_statement(
                args.statement, s, t, budget=_default_budget(args.budget)
            )
    except (GroupError, SubsetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ExampleConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    print(json.dumps(report.to_json(include_timing=args.timing)))
    return EXIT_OK if report.conclusion != "fail" else EXIT_COUNTEREXAMPLE


def _cmd_example(args: argparse.Namespace) -> int:
    try:
        report = reproduce_example_m5(args.q)
    except ExampleConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    print(json.dumps(report.to_json()))
    return EXIT_OK if report.passed else EXIT_COUNTEREXAMPLE


def _summary_csv(summary_doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["statement"] + list(next(iter(summary_doc["per_statement"].values())).keys()))
    for stmt, counts in summary_doc["per_statement"].items():
        writer.writerow([stmt] + [counts[k] for k in counts])
    return buf.getvalue()


def _cmd_scan(args: argparse.Namespace) -> int:
    try:
        campaign = parse_campaign(args.config)
    except (OSError, ValueError, GroupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.jobs is not None:
        campaign.jobs = args.jobs
    if args.checkpoint is not None:
        campaign.checkpoint = args.checkpoint
    if args.budget is not None:
        campaign.budget = args.budget
    out = open(args.out, "w", encoding="utf-8") if args.out else None
    stream = out if out is not None else sys.stdout

    def sink(report: dict) -> None:
        stream.write(json.dumps(report, sort_keys=True) + "\n")

    try:
        summary = run_scan(campaign, sink=sink)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if out is not None:
            out.close()
        return EXIT_BUDGET
    doc = summary.to_json()
    if args.format == "csv":
        print(_summary_csv(doc), end="")
    else:
        print(json.dumps(doc, sort_keys=True))
    if out is not None:
        out.close()
    return EXIT_COUNTEREXAMPLE if summary.counterexample_count else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critpairs",
        description="Isoperimetric invariants and critical-pair verification "
        "in finite abelian groups.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-g", "--group", required=True, help="group spec, e.g. Z7xZ11")
    common.add_argument("-s", "--set", required=True, help="subset literal, e.g. 0,1,3")
    common.add_argument("--budget", type=int, default=None, help="node budget for exact searches")
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("kappa", parents=[common], help="compute kappa_k(S)")
    p.add_argument("-k", type=int, default=1)
    p.set_defaults(func=_cmd_kappa)

    p = sub.add_parser("atoms", parents=[common], help="enumerate k-atoms containing 0")
    p.add_argument("-k", type=int, default=1)
    p.set_defaults(func=_cmd_atoms)

    p = sub.add_parser("verify", help="verify one statement on one instance")
    p.add_argument("statement", help="statement id, e.g. thm:main")
    p.add_argument("-g", "--group", default=None)
    p.add_argument("-s", "--set", default=None)
    p.add_argument("-t", "--tset", default=None)
    p.add_argument("-k", type=int, default=None)
    p.add_argument("--q", type=int, default=11)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("scan", help="run a scan campaign from a config file")
    p.add_argument("config", help="campaign config path")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", default=None, help="write the report stream to a file")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("example", help="reproduce the m=5 example in Z/7 x Z/q")
    p.add_argument("--q", type=int, default=11)
    p.set_defaults(func=_cmd_example)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
