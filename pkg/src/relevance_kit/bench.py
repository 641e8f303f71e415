"""Seeded benchmark suites, counted-step tables and budget sweeps, as CSV."""
from __future__ import annotations

import csv
import io
import random
from fractions import Fraction
from typing import Iterable, Sequence

from .certify import BudgetedCertifier, budgeted_certify
from .core import DecisionProblem
from .sequential import SequentialProblem, check_seq_anchor, check_seq_sufficiency, find_seq_minimum
from .static import check_anchor, check_sufficiency, find_minimum_sufficient
from .stochastic import (StochasticProblem, check_decisiveness, check_preservation, check_stoch_anchor,
                         find_stoch_minimum, uniform)

COLUMNS = ("instance", "regime", "query", "states", "n", "steps", "bound", "margin", "work", "budget", "outcome")
REGIMES = ("static", "stochastic", "sequential")


def random_problem(rng: random.Random, n: int, num_actions: int = 2, max_domain: int = 2,
                   values: Sequence[int] = (0, 1, 2)) -> DecisionProblem:
    domains = tuple(rng.randint(2, max_domain) for _ in range(n))
    size = 1
    for d in domains:
        size *= d
    rows = [[rng.choice(values) for _ in range(size)] for _ in range(num_actions)]
    return DecisionProblem(tuple(f"a{j}" for j in range(num_actions)), domains, rows)


def random_distribution(rng: random.Random, size: int, full_support: bool = True) -> tuple[Fraction, ...]:
    weights = [rng.randint(1 if full_support else 0, 4) for _ in range(size)]
    if not any(weights):
        weights[0] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def random_sequential(rng: random.Random, base: DecisionProblem, horizon: int = 1) -> SequentialProblem:
    S = base.num_states
    table = []
    for _ in base.actions:
        per_state = []
        for _ in range(S):
            targets = sorted(rng.sample(range(S), min(S, rng.randint(1, 2))))
            probs = random_distribution(rng, len(targets))
            per_state.append(tuple(zip(targets, probs)))
        table.append(tuple(per_state))
    return SequentialProblem(base, tuple(table), horizon)


class BenchInstance:
    """A base problem with its stochastic and sequential companions."""

    def __init__(self, name: str, problem: DecisionProblem, stochastic: StochasticProblem,
                 sequential: SequentialProblem):
        self.name = name
        self.problem = problem
        self.stochastic = stochastic
        self.sequential = sequential

    def regime_instance(self, regime: str):
        return {"static": self.problem, "stochastic": self.stochastic, "sequential": self.sequential}[regime]


def bench_suite(seed: int = 0, n: int = 3, count: int = 8, num_actions: int = 2) -> list[BenchInstance]:
    rng = random.Random(seed)
    suite = []
    for j in range(count):
        size = rng.randint(1, n)
        problem = random_problem(rng, size, num_actions)
        suite.append(BenchInstance(f"r{seed}-{j:03d}", problem, uniform(problem),
                                   random_sequential(rng, problem, rng.randint(1, 2))))
    return suite


def _row(inst: BenchInstance, regime: str, query: str, v, budget="", outcome=None) -> dict:
    base = inst.problem
    return {"instance": inst.name, "regime": regime, "query": query, "states": base.num_states, "n": base.n,
            "steps": v.steps, "bound": v.bound, "margin": v.bound - v.steps, "work": v.work,
            "budget": budget, "outcome": outcome or v.label}


def regime_rows(suite: Iterable[BenchInstance]) -> list[dict]:
    """Counted steps against declared bounds for every decider on every instance."""
    rows = []
    for inst in suite:
        p, sp, sq = inst.problem, inst.stochastic, inst.sequential
        first = (0,) if p.n else ()
        runs = [
            ("static", "sufficiency-pairwise", check_sufficiency(p, (), "pairwise")),
            ("static", "sufficiency-fiber", check_sufficiency(p, (), "fiber")),
            ("static", "anchor", check_anchor(p, first)),
            ("static", "minimum-collapse", find_minimum_sufficient(p, 1, "collapse")),
            ("static", "minimum-lattice", find_minimum_sufficient(p, 1, "lattice")),
            ("stochastic", "preservation", check_preservation(sp, ())),
            ("stochastic", "decisiveness", check_decisiveness(sp, ())),
            ("stochastic", "anchor", check_stoch_anchor(sp, first)),
            ("stochastic", "minimum-lattice", find_stoch_minimum(sp, 1, "decisiveness")),
            ("sequential", "sufficiency-pairwise", check_seq_sufficiency(sq, (), "pairwise")),
            ("sequential", "anchor", check_seq_anchor(sq, first)),
            ("sequential", "minimum-lattice", find_seq_minimum(sq, 1)),
        ]
        rows.extend(_row(inst, regime, query, v) for regime, query, v in runs)
    return sorted(rows, key=lambda r: (r["instance"], r["regime"], r["query"]))


# Budget sweep: one exhaustive counted search per regime, in increasing cost.
SWEEP_QUERIES = {
    "static": ("sufficiency", {"coords": ()}),
    "stochastic": ("stoch-minimum", {"k": 0, "family": "decisiveness", "exhaustive": True}),
    "sequential": ("seq-minimum", {"k": 0, "exhaustive": True}),
}


def budget_sweep(suite: Iterable[BenchInstance], budgets: Sequence[int]) -> list[dict]:
    rows = []
    for inst in suite:
        for regime in REGIMES:
            query, params = SWEEP_QUERIES[regime]
            for b in budgets:
                out = budgeted_certify(BudgetedCertifier(query, b, params), inst.regime_instance(regime))
                if out.kind == "ABSTAIN":
                    outcome = "ABSTAIN"
                elif out.verified:
                    outcome = out.verdict.label
                else:
                    outcome = "OVERCLAIM"
                rows.append({"instance": inst.name, "regime": regime, "query": query,
                             "states": inst.problem.num_states, "n": inst.problem.n,
                             "steps": "" if out.verdict is None else out.verdict.steps,
                             "bound": "" if out.verdict is None else out.verdict.bound,
                             "margin": "" if out.verdict is None else out.verdict.margin,
                             "work": out.work, "budget": b, "outcome": outcome})
    return sorted(rows, key=lambda r: (r["instance"], REGIMES.index(r["regime"]), r["budget"]))


def abstentions(rows: Iterable[dict]) -> dict[tuple[str, int], set[str]]:
    """Map (regime, budget) to the set of instances that abstained."""
    out: dict[tuple[str, int], set[str]] = {}
    for r in rows:
        key = (r["regime"], r["budget"])
        out.setdefault(key, set())
        if r["outcome"] == "ABSTAIN":
            out[key].add(r["instance"])
    return out


def sweep_violations(rows: Sequence[dict]) -> list[str]:
    """Overclaims, budget-monotonicity breaks and regime-containment breaks."""
    problems = [f"overclaim on {r['instance']} ({r['regime']}, budget {r['budget']})"
                for r in rows if r["outcome"] == "OVERCLAIM"]
    problems += [f"work {r['work']} over budget {r['budget']} on {r['instance']}"
                 for r in rows if r["work"] > r["budget"]]
    ab = abstentions(rows)
    budgets = sorted({b for _, b in ab})
    for regime in REGIMES:
        for lo, hi in zip(budgets, budgets[1:]):
            extra = ab.get((regime, hi), set()) - ab.get((regime, lo), set())
            if extra:
                problems.append(f"{regime}: raising budget {lo}->{hi} adds abstentions {sorted(extra)}")
    for b in budgets:
        for weaker, stronger in zip(REGIMES, REGIMES[1:]):
            extra = ab.get((weaker, b), set()) - ab.get((stronger, b), set())
            if extra:
                problems.append(f"budget {b}: {weaker} abstains where {stronger} does not: {sorted(extra)}")
    return problems


def to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in COLUMNS})
    return buf.getvalue()
