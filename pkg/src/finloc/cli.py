"""Command line front end: ``finloc analyze | localize | verify | solve-system``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .abelian import abelianization, invariants_of
from .errors import FinlocError, ParseError, SearchCapExceeded
from .formats import parse_group_spec, parse_system
from .group import LATTICE_CAP, ORDER_CAP, FiniteGroup, center, derived_subgroup, is_nilpotent, nilpotency_class
from .levine import SEARCH_CAP, count_solutions_per_parameter, invisible_subgroups, solve
from .localize import PrimeSet, baumslag_localize, is_p_local
from .suites import SUITES, run_suite

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_USAGE = 0, 1, 2


def _read(source: str) -> str:
    """A path, ``-`` for stdin, or an inline JSON document."""
    if source == "-":
        return sys.stdin.read()
    if source.lstrip().startswith("{"):
        return source
    try:
        return Path(source).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {source!r}: {e.strerror}") from None


def _primes(text: str) -> PrimeSet:
    try:
        ps = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise ParseError(f"--primes expects a comma-separated list of primes, got {text!r}") from None
    try:
        return PrimeSet.of(ps)
    except ValueError as e:
        raise ParseError(str(e)) from None


def _describe(G: FiniteGroup) -> dict:
    d = {
        "name": G.name,
        "order": G.order,
        "abelian": G.is_abelian,
        "abelianization": list(abelianization(G)[0].torsion),
        "center_order": center(G).order,
        "derived_order": derived_subgroup(G).order,
        "nilpotent": is_nilpotent(G),
    }
    if d["nilpotent"]:
        d["nilpotency_class"] = nilpotency_class(G)
    if G.is_abelian:
        d["invariants"] = list(invariants_of(G).torsion)
    if G.order <= 120:
        d["invisible_subgroup_orders"] = [H.order for H in invisible_subgroups(G)]
    return d


def _print(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_analyze(args) -> int:
    G = parse_group_spec(_read(args.group), order_cap=args.order_cap)
    _print(_describe(G))
    return EXIT_OK


def cmd_localize(args) -> int:
    P = _primes(args.primes)
    G = parse_group_spec(_read(args.group), order_cap=args.order_cap)
    LG, eta = baumslag_localize(G, P)
    _print({
        "primes": list(P.primes),
        "source_order": G.order,
        "local_order": LG.order,
        "source_is_local": is_p_local(G, P),
        "eta": [int(x) for x in eta.images],
        "local_table": LG.mul.tolist() if args.table else None,
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = run_suite(args.suite, seed=args.seed, order_cap=args.order_cap, lattice_cap=args.lattice_cap)
    sys.stdout.write(rep.render_json() if args.json else rep.render_text())
    print(f"wall time {rep.wall_time:.2f}s", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_COUNTEREXAMPLE


def cmd_solve(args) -> int:
    G = parse_group_spec(_read(args.group), order_cap=args.order_cap)
    system = parse_system(_read(args.system), G)
    given = dict(system.parameter_values)
    if all(a in given for a in system.parameters):
        sols = solve(G, system, cap=args.search_cap)
        _print({"group_order": G.order, "count": len(sols), "solutions": sols})
    else:
        counts = count_solutions_per_parameter(G, system, cap=args.search_cap)
        _print({"group_order": G.order, "parameters": list(system.parameters),
                "solution_counts": [int(c) for c in counts],
                "satisfies": bool((counts == 1).all())})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finloc", description="Exact finite group toolkit.")
    p.add_argument("--version", action="version", version=f"finloc {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("analyze", help="basic invariants of a group")
    a.add_argument("group", help="group file, '-' for stdin, or inline JSON")
    a.add_argument("--order-cap", type=int, default=ORDER_CAP)
    a.set_defaults(func=cmd_analyze)

    lo = sub.add_parser("localize", help="Baumslag P-localization of a finite nilpotent group")
    lo.add_argument("group")
    lo.add_argument("--primes", required=True, help="comma-separated primes, e.g. 2,3")
    lo.add_argument("--table", action="store_true", help="include the Cayley table of LG")
    lo.add_argument("--order-cap", type=int, default=ORDER_CAP)
    lo.set_defaults(func=cmd_localize)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help="one of: " + ", ".join(sorted(SUITES)))
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--order-cap", type=int, default=ORDER_CAP)
    v.add_argument("--lattice-cap", type=int, default=LATTICE_CAP)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve-system", help="all solutions of an equation system over a group")
    s.add_argument("group")
    s.add_argument("system")
    s.add_argument("--order-cap", type=int, default=ORDER_CAP)
    s.add_argument("--search-cap", type=int, default=SEARCH_CAP)
    s.set_defaults(func=cmd_solve)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except SearchCapExceeded as e:
        print(f"error: {e} (bound {e.witness})", file=sys.stderr)
        return EXIT_USAGE
    except (FinlocError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
