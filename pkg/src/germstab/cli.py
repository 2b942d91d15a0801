"""Command-line front end.

    germstab check-multigerm problem.txt --order 3
    germstab equivalence catalog:two_folds_1_1 --machine
    germstab catalog list
    germstab catalog show cusp_2_2

Exit codes: 0 positive verdict, 1 negative verdict, 2 input or precondition
error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .catalog import CatalogConfig, catalog_list, catalog_lookup, config_list
from .polyparse import ProblemSyntaxError
from .problem import (
    QUERIES,
    ProblemSemanticError,
    parse_problem,
    problem_from_catalog,
    run_query,
    serialize,
)
from .stability import check_infinitesimal_stability, default_order

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


def _load(source: str, query: str):
    if source.startswith("catalog:"):
        return problem_from_catalog(source[len("catalog:"):], query)
    if source == "-":
        text = sys.stdin.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    return parse_problem(text)


def _error(msg: str, machine: bool, query: str) -> int:
    if machine:
        print(json.dumps({"query": query, "verdict": None, "exit_code": EXIT_ERROR, "error": msg}, indent=2))
    else:
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _cmd_query(args) -> int:
    try:
        problem = _load(args.file, args.command)
    except (ProblemSyntaxError, ProblemSemanticError, KeyError, OSError, UnicodeDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        return _error(msg, args.machine, args.command)
    if args.order is not None and args.order < 1:
        return _error("--order must be at least 1", args.machine, args.command)
    report = run_query(problem, args.command, args.order, verify=args.verify_certificates)
    print(report.to_json() if args.machine else report.to_text(), end="" if not args.machine else "\n")
    return report.exit_code


def _cmd_catalog(args) -> int:
    if args.action == "list":
        entries, configs = catalog_list(), config_list()
        if args.machine:
            print(json.dumps({"entries": entries, "configurations": configs}, indent=2))
        else:
            print("single germs:")
            print("\n".join("  " + e for e in entries))
            print("configurations:")
            print("\n".join("  " + c for c in configs))
        return EXIT_POSITIVE
    if not args.name:
        return _error("catalog show needs a name", args.machine, "catalog")
    try:
        item = catalog_lookup(args.name, args.order)
    except (KeyError, ValueError) as exc:
        return _error(exc.args[0], args.machine, "catalog")
    cfg = item.config if isinstance(item, CatalogConfig) else item.config()
    k = default_order(cfg.target_dim) if args.order is None else args.order
    verdict = check_infinitesimal_stability(cfg, k)
    problem = problem_from_catalog(args.name, order=args.order)
    doc = {
        "name": args.name,
        "kind": "configuration" if isinstance(item, CatalogConfig) else "entry",
        "expected_stable": item.expected_stable,
        "computed_stable": verdict.stable,
        "order": k,
        "notes": item.notes,
        "problem": serialize(problem),
    }
    if args.machine:
        print(json.dumps(doc, indent=2))
    else:
        print(f"{doc['kind']}: {args.name}")
        print(f"notes: {item.notes}")
        print(f"expected: {'stable' if item.expected_stable else 'unstable'}")
        print(f"computed at order {k}: {'stable' if verdict.stable else 'unstable'}")
        print(serialize(problem), end="")
    return EXIT_POSITIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="germstab", description="Exact finite-jet stability checks for map germs and multigerms."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--order", type=int, default=None, help="jet order k (default: target_dim + 1)")
        p.add_argument("--machine", action="store_true", help="emit a JSON report")

    for q in QUERIES:
        p = sub.add_parser(q, help=f"run the {q} query")
        p.add_argument("file", help="problem file, '-' for stdin, or catalog:<name>")
        common(p)
        p.add_argument("--verify-certificates", action="store_true",
                       help="re-check every certificate exactly before exiting")
        p.set_defaults(func=_cmd_query)
    cat = sub.add_parser("catalog", help="list or show catalog entries")
    cat.add_argument("action", choices=["list", "show"])
    cat.add_argument("name", nargs="?")
    common(cat)
    cat.set_defaults(func=_cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which matches our input-error code
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
