"""Command-line interface.

Exit codes: 0 success / check passed, 1 semantic failure (constraint
violation or verification failure), 2 input error, 3 capability error
(graph not geared, enumeration or search budget exceeded).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .catalog import example_names, graph_to_document, resolve_graph_arg
from .errors import (
    EnumerationBudgetExceededError,
    MdagError,
    NotGearedError,
    ParseError,
    SearchBudgetExceededError,
    TooManyEdgesError,
    ZeroProbabilityError,
)
from .functional import RhoTable, get_enumeration, uniform_rhos
from .gearing import best_gearing, find_gearing
from .graph import Mdag, districts
from .intrinsic import intrinsic_sets, model_dimension, parametrizable_sets
from .kernels import kernel_from_text, kernel_matches_graph, kernel_to_text
from .nested import nmp_verify, verma_check
from .tangent import achievable_directions, verify_exclusions

Q = Fraction

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_CAPABILITY = 3

_CAPABILITY_ERRORS = (
    NotGearedError,
    EnumerationBudgetExceededError,
    SearchBudgetExceededError,
    TooManyEdgesError,
)


def _fmt_set(s) -> str:
    return "{" + ",".join(s) + "}"


def _report_data(g: Mdag) -> dict:
    records = intrinsic_sets(g)
    psets = parametrizable_sets(g)
    gearing = find_gearing(g)
    data = {
        "random": list(g.random_vertices),
        "fixed": list(g.fixed_vertices),
        "cardinalities": {v: c for v, c in g.cards},
        "districts": [list(d) for d in districts(g)],
        "intrinsic_sets": [
            {"S": list(r.intrinsic_set), "H": list(r.head), "T": list(r.tail)}
            for r in records
        ],
        "parametrizable_sets": [list(s) for s in psets.sets],
        "model_dimension": model_dimension(g),
        "saturated_dimension": _saturated_dimension(g),
        "geared": gearing is not None,
    }
    if gearing is not None:
        budgeted = best_gearing(g)
        data["gearing"] = {
            "edge_order": [list(e) for e in gearing.edge_order[: gearing.n_real]],
            "slots": [
                {"edge": list(e), "remainder": list(r)}
                for e, r in zip(budgeted.edge_order, budgeted.remainder_sets)
            ],
        }
    return data


def _saturated_dimension(g: Mdag) -> int:
    n = 1
    for v in g.random_vertices:
        n *= g.card(v)
    ctx = 1
    for w in g.fixed_vertices:
        ctx *= g.card(w)
    return (n - 1) * ctx


def cmd_report(args: argparse.Namespace) -> int:
    g = resolve_graph_arg(args.graph)
    data = _report_data(g)
    if args.format == "structured":
        print(json.dumps(data, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"random vertices: {' '.join(data['random']) or '-'}")
    print(f"fixed vertices:  {' '.join(data['fixed']) or '-'}")
    print("districts: " + " ".join(_fmt_set(d) for d in data["districts"]))
    print("intrinsic sets (S / H / T):")
    for rec in data["intrinsic_sets"]:
        t = ",".join(rec["T"]) or "-"
        print(f"  S={','.join(rec['S']):<10} H={','.join(rec['H']):<10} T={t}")
    n_psets = len(data["parametrizable_sets"])
    print(f"parametrizable sets ({n_psets}): " + " ".join(
        _fmt_set(s) for s in data["parametrizable_sets"]
    ))
    sat = data["saturated_dimension"]
    if data["model_dimension"] == sat:
        print(f"model dimension: {data['model_dimension']} (saturated)")
    else:
        print(f"model dimension: {data['model_dimension']} (saturated would be {sat})")
    if data["geared"]:
        order = " ".join(_fmt_set(e) for e in data["gearing"]["edge_order"]) or "-"
        print(f"geared: yes (edge order: {order})")
        slots = data["gearing"]["slots"]
        print("simulation slots: " + " | ".join(
            f"R{i + 1}={_fmt_set(s['remainder'])}" for i, s in enumerate(slots)
        ))
    else:
        print("geared: no (not geared)")
    return EXIT_OK


def _load_rho_file(path: str, g: Mdag, gearing) -> list[RhoTable]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read rho file {path}: {exc}") from exc
    slots = doc.get("slots")
    if not isinstance(slots, list) or len(slots) != gearing.slots:
        raise ParseError(f"rho file must list exactly {gearing.slots} slots")
    enum = get_enumeration(g, gearing)
    rhos = []
    for i, slot in enumerate(slots):
        members = tuple(str(v) for v in slot.get("members", []))
        if members != gearing.remainder_sets[i]:
            raise ParseError(
                f"slot {i + 1} members {members} do not match remainder set "
                f"{gearing.remainder_sets[i]}"
            )
        try:
            weights = tuple(Q(str(w)) for w in slot.get("weights", []))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"slot {i + 1}: bad weight: {exc}") from exc
        if len(weights) != enum.slot_sizes[i]:
            raise ParseError(
                f"slot {i + 1} expects {enum.slot_sizes[i]} weights, got {len(weights)}"
            )
        rhos.append(RhoTable(i, weights))
    return rhos


def random_rhos(g: Mdag, gearing, seed: int) -> list[RhoTable]:
    """Seeded integer weights in 1..16, slot by slot, joint index ascending."""
    enum = get_enumeration(g, gearing)
    rng = random.Random(seed)
    out = []
    for i, n in enumerate(enum.slot_sizes):
        out.append(RhoTable(i, tuple(Q(rng.randint(1, 16)) for _ in range(n))))
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    g = resolve_graph_arg(args.graph)
    gearing = best_gearing(g)
    if gearing is None:
        raise NotGearedError("graph is not geared; cannot simulate")
    if args.rho:
        rhos = _load_rho_file(args.rho, g, gearing)
    elif args.random:
        rhos = random_rhos(g, gearing, args.seed)
    else:
        rhos = uniform_rhos(g, gearing)
    kernel = get_enumeration(g, gearing).kernel(rhos)
    text = kernel_to_text(kernel)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    g = resolve_graph_arg(args.graph)
    try:
        kernel = kernel_from_text(Path(args.kernel).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read kernel file: {exc}") from exc
    if not kernel_matches_graph(kernel, g):
        raise ParseError("kernel scopes or cardinalities do not match the graph")
    violations = nmp_verify(kernel, g, tol=args.tol)
    verma = None
    if len(g.random_vertices) == 4 and not g.fixed_vertices:
        verma = verma_check(kernel)
    if args.format == "structured":
        print(json.dumps({
            "pass": not violations,
            "violations": [
                {"path": [list(s) for s in v.path], "magnitude": v.magnitude,
                 "description": v.description}
                for v in violations
            ],
            "verma_deviation": None if verma is None else float(verma),
        }, indent=2, sort_keys=True))
    else:
        if verma is not None:
            print(f"post-marginalization deviation: {float(verma):.3g}")
        if violations:
            print(f"FAIL: {len(violations)} constraint violation(s)")
            for v in violations:
                print(f"  {v}")
        else:
            print("PASS: kernel satisfies all recursive factorization constraints")
    return EXIT_OK if not violations else EXIT_FAIL


def cmd_verify_tangent(args: argparse.Namespace) -> int:
    g = resolve_graph_arg(args.graph)
    report = achievable_directions(g)
    exclusions = verify_exclusions(g, report)
    ok = report.passed and exclusions.all_zero
    if args.format == "structured":
        print(json.dumps({
            "nested_dimension": report.nested_dimension,
            "achieved_rank": report.achieved_rank,
            "rank_float": report.rank_float,
            "pass": ok,
            "per_set_status": {
                ",".join(s): st for s, st in sorted(report.per_set_status.items())
            },
            "achieved_from": {
                ",".join(s): list(v) for s, v in sorted(report.achieved_from.items())
            },
            "geared_subgraphs": [w.describe() for w in report.mixing_witnesses],
            "max_excluded_component": float(exclusions.max_violation),
        }, indent=2, sort_keys=True))
    else:
        print(report.summary())
        if not exclusions.all_zero:
            print(f"excluded-component violation: {float(exclusions.max_violation):.3g}")
        if report.missing_sets:
            print("missing sets: " + " ".join(_fmt_set(s) for s in report.missing_sets))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_examples(args: argparse.Namespace) -> int:
    if args.write:
        outdir = Path(args.write)
        outdir.mkdir(parents=True, exist_ok=True)
        from .catalog import example_graph

        for name in example_names():
            (outdir / f"{name}.graph").write_text(graph_to_document(example_graph(name)))
        print(f"wrote {len(example_names())} graph files to {outdir}")
    else:
        for name in example_names():
            print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdag",
        description="Marginal DAG models: structure reports, exact simulation, "
        "nested-Markov checks, and tangent-space verification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="districts, intrinsic sets, dimension, gearing")
    p.add_argument("graph", help="graph file or bundled example name")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="write the exact kernel of a functional model")
    p.add_argument("graph")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--uniform", action="store_true", help="all weights 1 (default)")
    src.add_argument("--random", action="store_true", help="seeded random integer weights")
    src.add_argument("--rho", metavar="FILE", help="JSON weight tables per slot")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="nested-Markov check of a kernel file")
    p.add_argument("graph")
    p.add_argument("kernel")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser(
        "verify-tangent",
        help="verify achievable directions span the nested tangent space",
    )
    p.add_argument("graph")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_verify_tangent)

    p = sub.add_parser("examples", help="list or export the bundled graphs")
    p.add_argument("--write", metavar="DIR")
    p.set_defaults(func=cmd_examples)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CAPABILITY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ParseError, ZeroProbabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MdagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
