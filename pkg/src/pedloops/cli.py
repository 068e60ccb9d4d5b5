"""Command line front end.

Three subcommands share the same input handling:

  check   count loops per family; exit status 1 signals loops were found
  break   open every loop with duplicated breakers and write the new table
  report  describe each family (counts, loop regions, planned breaks)
          without changing anything

Tables are comma or tab separated; the delimiter is sniffed unless given.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .graph import build_graph, graph_to_tgf, trim_leaves
from .model import (
    NoProbandError,
    Pedigree,
    PedigreeFormatError,
    StructureError,
    parse_pedigree,
    restrict_variants,
    serialize_pedigree,
)
from .pipeline import FamilyResult, PipelineResult, run_pipeline

EXIT_OK = 0
EXIT_LOOPS = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3

_DELIMITERS = {"comma": ",", "tab": "\t"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pedloops",
        description="Detect and break consanguinity loops in family pedigrees.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="pedigree table, or - for standard input")
    common.add_argument("--delimiter", choices=sorted(_DELIMITERS),
                        help="input delimiter (default: sniffed from the header)")
    common.add_argument("--variants",
                        help="comma separated variant columns to use; "
                             "other test columns are ignored")
    common.add_argument("--uniform-genotypes", type=int, metavar="N",
                        help="pretend every individual has N genotype states, "
                             "ignoring test results")

    p_check = sub.add_parser("check", parents=[common],
                             help="count loops; exit 1 when any family has one")
    p_check.set_defaults(func=_cmd_check)

    p_break = sub.add_parser("break", parents=[common],
                             help="open all loops and write the rewritten table")
    p_break.add_argument("-o", "--output",
                         help="output path (default: standard output)")
    p_break.add_argument("--format", choices=["csv", "tsv"], default="csv",
                         help="output delimiter (default csv)")
    p_break.add_argument("--report", choices=["text", "json"], default="text",
                         help="report style (default text)")
    p_break.add_argument("--figures", metavar="DIR",
                         help="also render per-family graph figures into DIR")
    p_break.set_defaults(func=_cmd_break)

    p_report = sub.add_parser("report", parents=[common],
                              help="describe families and planned breaks")
    p_report.add_argument("--report", choices=["text", "json"], default="text",
                          help="report style (default text)")
    p_report.add_argument("--figures", metavar="DIR",
                          help="render per-family graph figures into DIR")
    p_report.add_argument("--graphs", metavar="DIR",
                          help="dump per-family graphs in trivial graph format into DIR")
    p_report.set_defaults(func=_cmd_report)
    return parser


def _read_input(args) -> Pedigree:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.input).read_text(encoding="utf-8")
    delimiter = _DELIMITERS.get(args.delimiter) if args.delimiter else None
    p = parse_pedigree(text, delimiter=delimiter)
    if args.variants is not None:
        names = [v.strip() for v in args.variants.split(",") if v.strip()]
        p = restrict_variants(p, names)
    return p


def _weight_fn(args):
    n = args.uniform_genotypes
    if n is None:
        return None
    if n < 1:
        raise PedigreeFormatError("--uniform-genotypes must be at least 1")
    return lambda family: {ind.id: math.log(n) for ind in family}


def _cmd_check(args) -> int:
    result = run_pipeline(_read_input(args), _weight_fn(args), apply_breaks=False)
    total = 0
    for fam in result.families:
        a = fam.analysis
        print(f"family {a.index}: {a.loops} loop(s)")
        total += a.loops
    print(f"total: {total} loop(s) in {len(result.families)} family(ies)")
    return EXIT_LOOPS if total else EXIT_OK


def _cmd_break(args) -> int:
    result = run_pipeline(_read_input(args), _weight_fn(args), apply_breaks=True)
    table = serialize_pedigree(
        result.merged, delimiter="\t" if args.format == "tsv" else ",")
    if args.output:
        Path(args.output).write_text(table, encoding="utf-8")
        stream = sys.stdout
    else:
        sys.stdout.write(table)
        stream = sys.stderr  # keep the report out of the table stream
    if args.figures:
        _render_figures(result, Path(args.figures))
    if args.report == "json":
        print(json.dumps(_json_report(result, include_breaks=True), indent=2),
              file=stream)
    else:
        _print_break_report(result, stream)
    return EXIT_OK


def _cmd_report(args) -> int:
    result = run_pipeline(_read_input(args), _weight_fn(args), apply_breaks=False)
    if args.figures:
        _render_figures(result, Path(args.figures))
    if args.graphs:
        _dump_graphs(result, Path(args.graphs))
    if args.report == "json":
        print(json.dumps(_json_report(result, include_breaks=False), indent=2))
    else:
        _print_analysis_report(result, sys.stdout)
    return EXIT_OK


def _render_figures(result: PipelineResult, directory: Path) -> None:
    from .figures import render_family_figures  # matplotlib import is slow

    directory.mkdir(parents=True, exist_ok=True)
    for fam in result.families:
        g = build_graph(fam.source)
        render_family_figures(fam.source, g, trim_leaves(g),
                              directory / f"family{fam.analysis.index}")


def _dump_graphs(result: PipelineResult, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for fam in result.families:
        g = build_graph(fam.source)
        base = directory / f"family{fam.analysis.index}"
        base.with_suffix(".tgf").write_text(graph_to_tgf(g), encoding="utf-8")
        base.with_name(base.name + "_trimmed.tgf").write_text(
            graph_to_tgf(trim_leaves(g)), encoding="utf-8")


def _print_info(result: PipelineResult, stream) -> None:
    info = result.info
    print(f"families: {info['families_kept']} kept of {info['families_total']}",
          file=stream)
    if info["dropped_ids"]:
        dropped = ", ".join(map(str, info["dropped_ids"]))
        print(f"dropped (no proband): {dropped}", file=stream)
    if info["placeholder_ids"]:
        added = ", ".join(map(str, info["placeholder_ids"]))
        print(f"placeholder parents added: {added}", file=stream)


def _print_break_report(result: PipelineResult, stream) -> None:
    _print_info(result, stream)
    for fam in result.families:
        a, rep = fam.analysis, fam.report
        print(f"family {a.index}: {a.n_individuals} individuals, "
              f"{a.n_matings} matings, {a.loops} loop(s), "
              f"strategy {a.classification}", file=stream)
        for step in rep.get("steps", []):
            print(f"  step {step['step']}: duplicate {step['breaker']} "
                  f"in mating {step['mating']} as {step['clone']} "
                  f"[{step['method']}]", file=stream)
        if rep:
            cx = rep["complexity"]
            print(f"  complexity: factor {cx['factor']} "
                  f"(log {cx['total_log']:.6f})", file=stream)
            for warning in rep["warnings"]:
                print(f"  warning: {warning}", file=stream)


def _print_analysis_report(result: PipelineResult, stream) -> None:
    _print_info(result, stream)
    for fam in result.families:
        a = fam.analysis
        print(f"family {a.index}: {a.n_individuals} individuals, "
              f"{a.n_matings} matings, {a.n_offspring} children of full couples",
              file=stream)
        print(f"  loops: {a.loops}, strategy: {a.classification}", file=stream)
        print(f"  loop region: {a.trim_persons} person(s), "
              f"{a.trim_matings} mating(s), {a.trim_edges} link(s)", file=stream)
        for c in a.candidates:
            print(f"  candidate {c.person_id}: log genotypes "
                  f"{c.log_genotypes:.6f}, degree {c.trimmed_degree}, "
                  f"cost {c.cost:.6f}", file=stream)
        for step in a.planned_steps:
            print(f"  planned: duplicate {step.breaker_id} in mating "
                  f"{step.mating_id} [{step.method}]", file=stream)
        print(f"  planned total log complexity: {a.plan_total:.6f}", file=stream)


def _json_family(fam: FamilyResult, include_breaks: bool) -> dict:
    a = fam.analysis
    data = {
        "family": a.index,
        "members": list(a.member_ids),
        "individuals": a.n_individuals,
        "matings": a.n_matings,
        "offspring": a.n_offspring,
        "loops": a.loops,
        "classification": a.classification,
        "trim": {"persons": a.trim_persons, "matings": a.trim_matings,
                 "edges": a.trim_edges},
        "candidates": [
            {"person": c.person_id, "log_genotypes": c.log_genotypes,
             "degree": c.trimmed_degree, "cost": c.cost}
            for c in a.candidates],
        "planned_steps": [
            {"breaker": s.breaker_id, "mating": s.mating_id, "method": s.method}
            for s in a.planned_steps],
        "plan_total_log": a.plan_total,
    }
    if include_breaks:
        data["break"] = fam.report
    return data


def _json_report(result: PipelineResult, include_breaks: bool) -> dict:
    return {
        "info": result.info,
        "families": [_json_family(fam, include_breaks) for fam in result.families],
    }


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="warning: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoProbandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PedigreeFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StructureError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # last-resort net so the exit status stays honest
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
