"""Limits of certification: slot-inspection lower bound, threshold decisions on
the shifted family, budgeted certifiers that abstain, and externalized
relevance.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .circuit import Formula, expand
from .core import (DecisionProblem, Refusal, argmax, coordset, is_sufficient_oracle, minimum_sufficient_set,
                   project, relevant_coordinates)
from .errors import BudgetExhausted, OutOfGapError, ShapeError
from .reductions import gadget_shifted
from .sequential import (SequentialProblem, check_seq_anchor, check_seq_sufficiency, find_seq_minimum,
                         induced_optimizer)
from .static import check_anchor, check_sufficiency, find_minimum_sufficient
from .stochastic import (StochasticProblem, check_decisiveness, check_preservation, find_stoch_minimum)
from .verdict import Assignment, Pair, StepCounter, Verdict

# --------------------------------------------------------------------------
# Slot inspection


def slot_states(n: int, z: int) -> tuple[int, int]:
    """State indices of slot z: coordinate 0 is 0 or 1, the rest spell z."""
    return 2 * z, 2 * z + 1


class SlotOracle:
    """Answers whether the two states of a slot share an optimal set, and logs queries."""

    def __init__(self, problem: DecisionProblem):
        if problem.n < 1 or set(problem.domains) != {2}:
            raise ShapeError("slot oracles need a Boolean instance with n >= 1")
        self.problem = problem
        self.log: list[int] = []

    @property
    def num_slots(self) -> int:
        return 2 ** (self.problem.n - 1)

    def query(self, z: int) -> bool:
        if not 0 <= z < self.num_slots:
            raise ShapeError(f"slot {z} out of range")
        self.log.append(z)
        x, y = slot_states(self.problem.n, z)
        return self.problem.opt_table[x] == self.problem.opt_table[y]


def _slot_instance(n: int, flipped: int | None) -> DecisionProblem:
    flip_state = None if flipped is None else slot_states(n, flipped)[1]

    def utility(a, s):
        k = sum(d << i for i, d in enumerate(s))
        prefer_first = k != flip_state
        return int(prefer_first) if a == 0 else int(not prefer_first)

    return DecisionProblem.from_function(("a0", "a1"), (2,) * n, utility)


@dataclass(frozen=True)
class FoolingPair:
    yes: DecisionProblem
    no: DecisionProblem
    slot: int


def adversary_game(n: int, inspected: Iterable[int]) -> FoolingPair | Refusal:
    """Two instances no checker confined to ``inspected`` slots can tell apart.

    YES prefers a0 everywhere, so the empty set is sufficient.  NO agrees
    except at the upper state of the smallest uninspected slot, which breaks
    sufficiency while leaving every inspected slot's answer unchanged.
    """
    if n < 1:
        raise ShapeError("n must be at least 1")
    seen = set(inspected)
    free = [z for z in range(2 ** (n - 1)) if z not in seen]
    if not free:
        return Refusal("every slot was inspected; no fooling pair exists")
    return FoolingPair(_slot_instance(n, None), _slot_instance(n, free[0]), free[0])


def transcript(problem: DecisionProblem, slots: Iterable[int]) -> tuple[bool, ...]:
    oracle = SlotOracle(problem)
    return tuple(oracle.query(z) for z in slots)


# --------------------------------------------------------------------------
# Threshold decider


def exact_minimum(problem: DecisionProblem) -> tuple[int, ...]:
    return minimum_sufficient_set(problem)


def threshold_decider(rho: int | Fraction, solver: Callable[[DecisionProblem], Iterable[int]] = exact_minimum
                      ) -> Callable[[Formula], bool]:
    """Decide tautology by one size comparison on the shifted gadget.

    The gadget's minimum sufficient set has size 1 for tautologies and n + 1
    otherwise, so any solver within factor ``rho < n + 1`` separates them.
    """
    if rho < 1:
        raise OutOfGapError(f"threshold {rho} is below the tautology size 1")

    def decide(f: Formula) -> bool:
        if rho >= f.num_vars + 1:
            raise OutOfGapError(f"threshold {rho} is not below n + 1 = {f.num_vars + 1}")
        found = tuple(solver(expand(gadget_shifted(f).instance)))
        return len(found) <= rho

    return decide


# --------------------------------------------------------------------------
# Budgeted certification

QUERIES = ("sufficiency", "anchor", "minimum", "stoch-preservation", "stoch-decisiveness",
           "stoch-minimum", "seq-sufficiency", "seq-anchor", "seq-minimum")


@dataclass(frozen=True)
class BudgetedCertifier:
    """Runs a counted decider under a work budget; ``always_abstain`` never answers."""

    query: str
    budget: int | None
    params: dict = field(default_factory=dict)
    always_abstain: bool = False

    def __post_init__(self):
        if self.query not in QUERIES:
            raise ValueError(f"unknown query {self.query!r}")


@dataclass(frozen=True)
class Outcome:
    kind: str  # "VERDICT" or "ABSTAIN"
    verdict: Verdict | None
    work: int
    verified: bool | None = None

    @property
    def label(self) -> str:
        return "ABSTAIN" if self.kind == "ABSTAIN" else self.verdict.label


def _run(query: str, instance, params: dict, counter: StepCounter) -> Verdict:
    coords = params.get("coords", ())
    k = params.get("k", 0)
    exhaustive = params.get("exhaustive", False)
    if query == "sufficiency":
        return check_sufficiency(instance, coords, params.get("strategy", "fiber"), counter)
    if query == "anchor":
        return check_anchor(instance, coords, counter)
    if query == "minimum":
        return find_minimum_sufficient(instance, k, params.get("mode", "collapse"), counter, exhaustive)
    if query == "stoch-preservation":
        return check_preservation(instance, coords, params.get("strict", False), counter=counter)
    if query == "stoch-decisiveness":
        return check_decisiveness(instance, coords, counter)
    if query == "stoch-minimum":
        return find_stoch_minimum(instance, k, params.get("family", "decisiveness"), counter, exhaustive,
                                  params.get("strict", False))
    if query == "seq-sufficiency":
        return check_seq_sufficiency(instance, coords, params.get("strategy", "fiber"), counter)
    if query == "seq-anchor":
        return check_seq_anchor(instance, coords, counter)
    return find_seq_minimum(instance, k, params.get("mode", "lattice"), counter, exhaustive)


def budgeted_certify(certifier: BudgetedCertifier, instance) -> Outcome:
    """Run the decider; abstain as soon as its work would exceed the budget.

    Every emitted verdict is re-checked by :func:`verify_outcome`, which uses
    definitional oracles independent of the counted deciders.
    """
    if certifier.always_abstain:
        return Outcome("ABSTAIN", None, 0, None)
    counter = StepCounter(certifier.budget)
    try:
        v = _run(certifier.query, instance, certifier.params, counter)
    except BudgetExhausted:
        return Outcome("ABSTAIN", None, counter.count, None)
    return Outcome("VERDICT", v, counter.count, verify_outcome(certifier.query, instance, certifier.params, v))


# Oracles used for verification: direct definitional computations.


def _fiber_opts(sp: StochasticProblem, members) -> dict:
    groups: dict[tuple, list[int]] = {}
    for k, s in enumerate(sp.base.states):
        groups.setdefault(project(s, members), []).append(k)
    out = {}
    for key, ks in groups.items():
        mass = sum(sp.dist[k] for k in ks)
        if mass > 0:
            out[key] = argmax([sum(sp.dist[k] * row[k] for k in ks) / mass for row in sp.base.utilities])
    return out


def _preserving(sp: StochasticProblem, members, strict: bool) -> bool:
    opts = _fiber_opts(sp, members)
    for k, s in enumerate(sp.base.states):
        key = project(s, members)
        if key not in opts:
            if strict:
                return False
            continue
        if opts[key] != sp.base.opt_table[k]:
            return False
    return True


def _decisive(sp: StochasticProblem, members) -> bool:
    return all(len(o) == 1 for o in _fiber_opts(sp, members).values())


class _InducedView:
    """States of a sequential problem paired with its induced OptSets."""

    def __init__(self, sq: SequentialProblem):
        base = sq.base
        self.n, self.domains, self.states = base.n, base.domains, base.states
        self.num_states = base.num_states
        self.opt_table = induced_optimizer(sq).optsets
        self.index_of = base.index_of


def _replay_pair(problem, members, pair: Pair) -> bool:
    a, b = problem.index_of(pair.first), problem.index_of(pair.second)
    return (a is not None and b is not None and project(pair.first, members) == project(pair.second, members)
            and problem.opt_table[a] != problem.opt_table[b])


def _fiber_constant(problem, members, alpha: Assignment) -> bool:
    opts = {problem.opt_table[k] for k, s in enumerate(problem.states) if project(s, members) == alpha.values}
    return len(opts) == 1


def _minimum_size(problem) -> int:
    return len(relevant_coordinates(problem))


def verify_outcome(query: str, instance, params: dict, v: Verdict) -> bool:
    """Independently confirm a verdict: replay NO pairs, re-check YES claims."""
    coords = params.get("coords", ())
    k = params.get("k", 0)
    if query.startswith("seq-"):
        problem = _InducedView(instance)
        query = query[4:]
    elif query.startswith("stoch-"):
        problem = None
    else:
        problem = instance
    if query == "sufficiency":
        members = coordset(coords, problem.n)
        if v.answer:
            return is_sufficient_oracle(problem, members).answer
        return _replay_pair(problem, members, v.witness)
    if query == "anchor":
        members = coordset(coords, problem.n)
        if v.answer:
            alpha = v.witness[0] if isinstance(v.witness, tuple) and not isinstance(v.witness, Assignment) \
                else v.witness
            return _fiber_constant(problem, members, alpha)
        return all(_replay_pair(problem, members, pair) for _, pair in v.witness) and \
            len(v.witness) == len({project(s, members) for s in problem.states})
    if query == "minimum":
        size = _minimum_size(problem)
        if v.answer:
            return v.witness is not None and len(v.witness) <= k and \
                is_sufficient_oracle(problem, v.witness).answer
        return size > k
    sp = instance
    if query == "stoch-preservation":
        return v.answer == _preserving(sp, coordset(coords, sp.base.n), params.get("strict", False))
    if query == "stoch-decisiveness":
        return v.answer == _decisive(sp, coordset(coords, sp.base.n))
    if query == "stoch-minimum":
        family = params.get("family", "decisiveness")
        strict = params.get("strict", False)
        test = (lambda I: _decisive(sp, I)) if family == "decisiveness" else (lambda I: _preserving(sp, I, strict))
        if v.answer:
            return len(v.witness) <= k and test(v.witness)
        return not any(test(I) for size in range(min(k, sp.base.n) + 1)
                       for I in itertools.combinations(range(sp.base.n), size))
    raise ValueError(f"unknown query {query!r}")


# --------------------------------------------------------------------------
# Externalized relevance


def externalized_relevance(problem: DecisionProblem, interface: Iterable[int]
                           ) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split the relevant coordinates into those the interface exposes and the rest.

    A nonempty second part means the interface cannot be sufficient; this is
    confirmed with the decider.
    """
    members = set(coordset(interface, problem.n))
    relevant = relevant_coordinates(problem)
    internal = tuple(i for i in relevant if i in members)
    external = tuple(i for i in relevant if i not in members)
    if external:
        assert not check_sufficiency(problem, sorted(members)).answer
    else:
        assert check_sufficiency(problem, sorted(members)).answer
    return internal, external
