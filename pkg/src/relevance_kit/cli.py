"""Command-line front end.

Exit codes: 0 YES, 1 NO, 2 ABSTAIN (step budget exhausted), 3 malformed
input, 4 capacity budget exceeded, 5 wrong shape (gadget preconditions,
asymmetric utility, threshold outside the gap).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import bench, budgets
from . import io as instance_io
from .circuit import SuccinctProblem, expand
from .core import DecisionProblem, DecisionTable, quotient, relevant_coordinates
from .dimacs import parse_dimacs, parse_qdimacs
from .errors import BudgetExhausted, FormatError, RelevanceError
from .reductions import (gadget_3sat_chain, gadget_exists_forall, gadget_majsat, gadget_setcover,
                         gadget_shifted, gadget_tautology, gadget_tqbf, verify_gadget)
from .sequential import SequentialProblem, check_seq_anchor, check_seq_sufficiency, find_seq_minimum
from .static import check_anchor, check_sufficiency, find_minimum_sufficient, steps_report
from .stochastic import (StochasticProblem, check_decisiveness, check_preservation, check_stoch_anchor,
                         check_stoch_anchor_preservation, find_stoch_minimum)
from .tractable import (PairwiseUtility, TensorRankUtility, TreeUtility, check_bounded_actions,
                        check_separable, check_sufficiency_symmetric, check_sufficiency_tensor,
                        check_sufficiency_treewidth, expand_pairwise, expand_tensor, expand_tree, relevant_tree)
from .translate import TRANSLATORS, load_translation_input
from .verdict import StepCounter, Verdict

EXIT_YES, EXIT_NO, EXIT_ABSTAIN = 0, 1, 2


# --------------------------------------------------------------------------
# Output helpers


def plain(obj: Any) -> Any:
    """JSON-friendly copy: tuples become lists, fractions become "n/d" strings."""
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if hasattr(obj, "_asdict"):
        return {k: plain(v) for k, v in obj._asdict().items()}
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [plain(x) for x in items]
    return obj


def emit(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(plain(report), sort_keys=True) + "\n")
    elif fmt == "csv":
        flat = {k: json.dumps(plain(v)) if isinstance(v, (dict, list, tuple)) else v for k, v in report.items()}
        writer = csv.DictWriter(out, fieldnames=list(flat), lineterminator="\n")
        writer.writeheader()
        writer.writerow(flat)
    else:
        for k, v in report.items():
            if v is None or v == "":
                continue
            out.write(f"{k}: {json.dumps(plain(v)) if isinstance(v, (dict, list, tuple)) else v}\n")


def verdict_report(v: Verdict, **extra) -> dict:
    report = {"answer": v.label, **extra, "witness": v.witness, "steps": v.steps, "bound": v.bound,
              "work": v.work}
    if v.note:
        report["note"] = v.note
    return report


def exit_for(v: Verdict) -> int:
    return EXIT_YES if v.answer else EXIT_NO


def parse_set(text: str | None) -> tuple[int, ...]:
    if text is None or not text.strip():
        return ()
    try:
        return tuple(sorted({int(x) for x in text.split(",")}))
    except ValueError as exc:
        raise FormatError(f"bad coordinate list {text!r}") from exc


# --------------------------------------------------------------------------
# Instance adapters


def as_static(instance):
    """The explicit decision problem underlying any instance kind."""
    if isinstance(instance, (DecisionProblem, DecisionTable)):
        return instance
    if isinstance(instance, SuccinctProblem):
        return expand(instance)
    if isinstance(instance, (StochasticProblem, SequentialProblem)):
        return instance.base
    if isinstance(instance, TensorRankUtility):
        return expand_tensor(instance)
    if isinstance(instance, TreeUtility):
        return expand_tree(instance)
    if isinstance(instance, PairwiseUtility):
        return expand_pairwise(instance)
    raise FormatError(f"unsupported instance {type(instance).__name__}")


def _need(instance, cls, what: str):
    if not isinstance(instance, cls):
        raise FormatError(f"{what} needs a {cls.__name__} instance")
    return instance


# --------------------------------------------------------------------------
# Commands; each returns an exit code


def _counted(args, run: Callable[[StepCounter], Verdict], **extra) -> int:
    counter = StepCounter(args.budget)
    try:
        v = run(counter)
    except BudgetExhausted as exc:
        emit({"answer": "ABSTAIN", **extra, "work": counter.count, "budget": exc.limit}, args.format)
        return EXIT_ABSTAIN
    emit(verdict_report(v, **extra), args.format)
    return exit_for(v)


def cmd_check(args) -> int:
    problem = as_static(instance_io.load(args.instance))
    coords = parse_set(args.set)
    return _counted(args, lambda c: check_sufficiency(problem, coords, args.strategy, c), set=coords)


def cmd_anchor(args) -> int:
    problem = as_static(instance_io.load(args.instance))
    coords = parse_set(args.set)
    return _counted(args, lambda c: check_anchor(problem, coords, c), set=coords)


def cmd_min(args) -> int:
    problem = as_static(instance_io.load(args.instance))
    k = problem.n if args.k is None else args.k
    return _counted(args, lambda c: find_minimum_sufficient(problem, k, args.mode, c),
                    k=k, mode=args.mode, relevant=relevant_coordinates(problem))


def cmd_relevant(args) -> int:
    problem = as_static(instance_io.load(args.instance))
    rel = relevant_coordinates(problem)
    emit({"relevant": rel, "size": len(rel)}, args.format)
    return EXIT_YES


def cmd_quotient(args) -> int:
    problem = as_static(instance_io.load(args.instance))
    q = quotient(problem)
    classes = [{"optset": [problem.actions[a] for a in o],
                "states": [problem.states[k] for k, c in enumerate(q.class_of) if c == j]}
               for j, o in enumerate(q.class_optset)]
    emit({"classes": q.num_classes, "partition": classes}, args.format)
    return EXIT_YES


def cmd_steps(args) -> int:
    problem = as_static(instance_io.load(args.instance))
    report = steps_report(problem, args.query, coords=parse_set(args.set),
                          k=problem.n if args.k is None else args.k)
    emit(report, args.format)
    return EXIT_YES


def cmd_stoch(args) -> int:
    sp = _need(instance_io.load(args.instance), StochasticProblem, "stoch")
    coords = parse_set(args.set)
    k = sp.base.n if args.k is None else args.k
    runs = {
        "preserve": lambda c: check_preservation(sp, coords, args.strict, args.reading, c),
        "decisive": lambda c: check_decisiveness(sp, coords, c),
        "anchor": lambda c: check_stoch_anchor(sp, coords, c),
        "anchor-preserve": lambda c: check_stoch_anchor_preservation(sp, coords, c),
        "min": lambda c: find_stoch_minimum(sp, k, args.family, c, strict=args.strict),
    }
    return _counted(args, runs[args.query], query=args.query, set=coords)


def cmd_seq(args) -> int:
    sq = _need(instance_io.load(args.instance), SequentialProblem, "seq")
    coords = parse_set(args.set)
    k = sq.base.n if args.k is None else args.k
    runs = {
        "check": lambda c: check_seq_sufficiency(sq, coords, args.strategy, c),
        "anchor": lambda c: check_seq_anchor(sq, coords, c),
        "min": lambda c: find_seq_minimum(sq, k, args.mode, c),
    }
    return _counted(args, runs[args.query], query=args.query, set=coords)


def cmd_fast(args) -> int:
    instance = instance_io.load(args.instance)
    coords = parse_set(args.set)
    path = args.path
    if path == "separable":
        ok, f, g = check_separable(as_static(instance))
        emit({"answer": "YES" if ok else "NO", "f": f, "g": g}, args.format)
        return EXIT_YES if ok else EXIT_NO
    if path == "tensor":
        v = check_sufficiency_tensor(_need(instance, TensorRankUtility, "tensor"), coords)
    elif path == "tree":
        rel = relevant_tree(_need(instance, TreeUtility, "tree"))
        outside = [i for i in rel if i not in coords]
        emit({"answer": "NO" if outside else "YES", "set": coords, "relevant": rel}, args.format)
        return EXIT_NO if outside else EXIT_YES
    elif path == "treewidth":
        v = check_sufficiency_treewidth(_need(instance, PairwiseUtility, "treewidth"), coords)
    elif path == "symmetric":
        v = check_sufficiency_symmetric(as_static(instance), coords)
    else:
        v = check_bounded_actions(as_static(instance), coords)
    emit(verdict_report(v, path=path, set=coords), args.format)
    return exit_for(v)


REDUCERS = {
    "tautology": (parse_dimacs, gadget_tautology),
    "ea-sat": (parse_qdimacs, gadget_exists_forall),
    "majsat": (parse_dimacs, gadget_majsat),
    "tqbf": (parse_qdimacs, gadget_tqbf),
    "shifted": (parse_dimacs, gadget_shifted),
    "eth-chain": (parse_dimacs, gadget_3sat_chain),
}


def _read_setcover(text: str):
    try:
        data = json.loads(text)
        return int(data["universe"]), [list(s) for s in data["sets"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"set-cover input needs 'universe' and 'sets': {exc}") from exc


def cmd_reduce(args) -> int:
    text = Path(args.source).read_text()
    if args.kind == "setcover":
        g = gadget_setcover(*_read_setcover(text))
    else:
        parse, build = REDUCERS[args.kind]
        g = build(parse(text))
    written = g.explicit() if g.kind == "majsat" else g.instance
    report = {"kind": g.kind, "query": g.query, "accounting": g.accounting}
    if args.out:
        instance_io.dump(written, args.out)
        report["written"] = args.out
    code = EXIT_YES
    if args.verify:
        r = verify_gadget(g)
        report.update(verify=r.label, source_answer=r.source_answer, target_answer=r.target_answer)
        code = EXIT_YES if r.passed else EXIT_NO
    if not args.out and args.format == "json":
        report["instance"] = instance_io.to_json(written)
    emit(report, args.format)
    return code


def cmd_translate(args) -> int:
    data = load_translation_input(args.input)
    result = TRANSLATORS[args.kind](data)
    if args.kind == "config":
        report = {"answer": "YES", "core": result.core, "target": result.target,
                  "steps": result.verdict.steps, "bound": result.verdict.bound}
        written = result.problem
    elif args.kind == "pomdp":
        report = {"answer": result.verdict.label, "coarse_optimizer": result.coarse_optimizer,
                  "full_optimizer": result.full_optimizer, "witness": result.verdict.witness}
        written = result.stochastic
    else:
        report = {"answer": result.verdict.label, "witness": result.verdict.witness,
                  "projection_sufficient": result.projection_sufficient}
        written = result.problem
    if args.out:
        instance_io.dump(written, args.out)
        report["written"] = args.out
    emit(report, args.format)
    return EXIT_YES if report["answer"] == "YES" else EXIT_NO


def cmd_bench(args) -> int:
    suite = bench.bench_suite(args.seed, args.n, args.count, args.actions)
    if args.budget_sweep:
        rows = bench.budget_sweep(suite, [int(b) for b in args.budgets.split(",")])
    else:
        wanted = bench.REGIMES if args.regimes == "all" else tuple(args.regimes.split(","))
        unknown = set(wanted) - set(bench.REGIMES)
        if unknown:
            raise FormatError(f"unknown regimes {sorted(unknown)}")
        rows = [r for r in bench.regime_rows(suite) if r["regime"] in wanted]
    sys.stdout.write(bench.to_csv(rows))
    return EXIT_YES


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relevance-kit",
                                description="Exact coordinate-relevance queries on finite decision problems.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--budget", type=int, default=None,
                        help="step budget; the run abstains (exit 2) instead of exceeding it")
    sub = p.add_subparsers(dest="command", required=True)

    def instance_cmd(name: str, func, help_text: str, with_set=True):
        c = sub.add_parser(name, parents=[common], help=help_text)
        c.add_argument("instance")
        if with_set:
            c.add_argument("--set", default="", help="comma-separated coordinates")
        c.set_defaults(func=func)
        return c

    c = instance_cmd("check", cmd_check, "is a coordinate set sufficient")
    c.add_argument("--strategy", choices=("fiber", "pairwise"), default="fiber")
    instance_cmd("anchor", cmd_anchor, "is some fiber of the set constant")
    c = instance_cmd("min", cmd_min, "is there a sufficient set of size at most k", with_set=False)
    c.add_argument("--k", type=int)
    c.add_argument("--mode", choices=("collapse", "lattice"), default="collapse")
    instance_cmd("relevant", cmd_relevant, "list relevant coordinates", with_set=False)
    instance_cmd("quotient", cmd_quotient, "partition states by optimal set", with_set=False)
    c = instance_cmd("steps", cmd_steps, "counted steps against the declared bound")
    c.add_argument("--query", choices=("sufficiency", "anchor", "minimum"), default="sufficiency")
    c.add_argument("--k", type=int)

    c = sub.add_parser("stoch", parents=[common], help="stochastic queries")
    c.add_argument("query", choices=("preserve", "decisive", "anchor", "anchor-preserve", "min"))
    c.add_argument("instance")
    c.add_argument("--set", default="")
    c.add_argument("--k", type=int)
    c.add_argument("--strict", action="store_true", help="zero-mass fibers count as violations")
    c.add_argument("--reading", choices=("exact", "inclusive"), default="exact")
    c.add_argument("--family", choices=("preservation", "decisiveness"), default="preservation")
    c.set_defaults(func=cmd_stoch)

    c = sub.add_parser("seq", parents=[common], help="sequential queries")
    c.add_argument("query", choices=("check", "anchor", "min"))
    c.add_argument("instance")
    c.add_argument("--set", default="")
    c.add_argument("--k", type=int)
    c.add_argument("--strategy", choices=("fiber", "pairwise"), default="pairwise")
    c.add_argument("--mode", choices=("lattice", "collapse"), default="lattice")
    c.set_defaults(func=cmd_seq)

    c = sub.add_parser("fast", parents=[common], help="structured fast paths")
    c.add_argument("path", choices=("separable", "tensor", "tree", "treewidth", "symmetric", "bounded"))
    c.add_argument("instance")
    c.add_argument("--set", default="")
    c.set_defaults(func=cmd_fast)

    c = sub.add_parser("reduce", parents=[common], help="build a reduction gadget")
    c.add_argument("kind", choices=tuple(REDUCERS) + ("setcover",))
    c.add_argument("source")
    c.add_argument("--out")
    c.add_argument("--verify", action="store_true")
    c.set_defaults(func=cmd_reduce)

    c = sub.add_parser("translate", parents=[common], help="translate an applied model")
    c.add_argument("kind", choices=tuple(TRANSLATORS))
    c.add_argument("input")
    c.add_argument("--out")
    c.set_defaults(func=cmd_translate)

    c = sub.add_parser("bench", parents=[common], help="CSV step tables and budget sweeps")
    c.add_argument("--regimes", default="all")
    c.add_argument("--n", type=int, default=3)
    c.add_argument("--count", type=int, default=8)
    c.add_argument("--actions", type=int, default=2)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--budget-sweep", action="store_true")
    c.add_argument("--budgets", default="0,16,64,256,1024,4096")
    c.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        budgets.budget("expand")  # validate the environment override early
        return args.func(args)
    except RelevanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
