"""Sequential problems: transitions, a horizon, and the induced optimizer.

In ``backup`` mode the induced optimizer is the argmax of the horizon-H
action values::

    Q_0(a, s) = U(a, s)
    Q_t(a, s) = sum_{s'} T(a, s)(s') * V_{t-1}(s')
    V_t(s)    = max_a Q_t(a, s)

In ``immediate`` mode it is the one-step optimizer of the base problem.
The deciders reuse the static scans on the induced OptSets, which are
compared whole (one step per comparison).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from . import budgets
from .core import DecisionProblem, OptSet, Rational, argmax, rational
from .errors import DistributionError, FormatError
from .static import OptView, lattice_search, relevance_scan, scan_anchor, scan_sufficiency
from .verdict import StepCounter, Verdict

Row = tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class SequentialProblem:
    """``transitions[a][k]`` lists ``(next state index, probability)`` pairs."""

    base: DecisionProblem
    transitions: tuple[tuple[Row, ...], ...] | None = field(default=None, repr=False)
    horizon: int = 0
    mode: str = "backup"
    observations: tuple[Any, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("backup", "immediate"):
            raise FormatError(f"unknown mode {self.mode!r}")
        if self.horizon < 0:
            raise FormatError("horizon must be non-negative")
        if self.observations is not None:
            obs = tuple(self.observations)
            if len(obs) != self.base.num_states:
                raise FormatError("one observation label per state is required")
            object.__setattr__(self, "observations", obs)
        if self.transitions is None:
            if self.mode == "backup":
                raise FormatError("backup mode needs transitions")
            return
        S = self.base.num_states
        table = []
        if len(self.transitions) != len(self.base.actions):
            raise FormatError("one transition table per action is required")
        for a, per_state in enumerate(self.transitions):
            if len(per_state) != S:
                raise FormatError(f"action {a}: expected {S} transition rows")
            rows = []
            for k, row in enumerate(per_state):
                clean = tuple((int(t), Fraction(rational(p))) for t, p in row)
                if any(not 0 <= t < S for t, _ in clean):
                    raise FormatError(f"transition from state {k} under action {a} leaves the state space")
                if any(p < 0 for _, p in clean) or sum(p for _, p in clean) != 1:
                    raise DistributionError(f"transition row ({a}, {k}) is not a distribution")
                rows.append(clean)
            table.append(tuple(rows))
        object.__setattr__(self, "transitions", tuple(table))


@dataclass(frozen=True)
class InducedOptimizer:
    optsets: tuple[OptSet, ...]
    q_values: tuple[tuple[Rational, ...], ...]
    value_history: tuple[tuple[Rational, ...], ...]
    work: int
    bound: int


def induced_optimizer(sq: SequentialProblem, counter: StepCounter | None = None) -> InducedOptimizer:
    """Compute Opt_seq exactly; counts one step per multiply-add and per comparison."""
    counter = counter or StepCounter()
    start = counter.count
    base = sq.base
    A, S = len(base.actions), base.num_states
    if sq.mode == "immediate" or sq.horizon == 0:
        counter.tick(S * A)
        return InducedOptimizer(base.opt_table, base.utilities, (), counter.count - start, S * A)
    row_total = sum(len(row) for per_state in sq.transitions for row in per_state)
    bound = sq.horizon * (row_total + S * A) + S * A
    q: tuple[tuple[Rational, ...], ...] = base.utilities
    history = []
    for _ in range(sq.horizon):
        counter.tick(S * A)
        v = tuple(max(q[a][k] for a in range(A)) for k in range(S))
        history.append(v)
        new_q = []
        for a in range(A):
            counter.tick(sum(len(row) for row in sq.transitions[a]))
            new_q.append(tuple(sum((p * v[t] for t, p in row), Fraction(0)) for row in sq.transitions[a]))
        q = tuple(new_q)
    counter.tick(S * A)
    optsets = tuple(argmax(col) for col in zip(*q))
    return InducedOptimizer(optsets, q, tuple(history), counter.count - start, bound)


def _opt_view(sq: SequentialProblem, induced: InducedOptimizer) -> OptView:
    return OptView(sq.base.domains, sq.base.states, induced.optsets, 1)


def check_seq_sufficiency(sq: SequentialProblem, coords: Iterable[int], strategy: str = "pairwise",
                          counter: StepCounter | None = None) -> Verdict:
    """Is Opt_seq constant on every fiber of ``coords``?

    ``steps`` counts the scan (at most |S|^2 pairwise, 2|S| fiber-grouped);
    ``work`` also includes computing the induced optimizer.
    """
    counter = counter or StepCounter()
    start = counter.count
    induced = induced_optimizer(sq, counter)
    v = scan_sufficiency(_opt_view(sq, induced), coords, strategy, counter)
    return Verdict(v.answer, v.witness, v.steps, v.bound, counter.count - start)


def check_seq_anchor(sq: SequentialProblem, coords: Iterable[int],
                     counter: StepCounter | None = None) -> Verdict:
    """Is there an anchor state whose agreement class has constant Opt_seq?"""
    counter = counter or StepCounter()
    start = counter.count
    induced = induced_optimizer(sq, counter)
    v = scan_anchor(_opt_view(sq, induced), coords, counter)
    witness = v.witness
    if v.answer:
        alpha = witness
        anchor = [0] * sq.base.n
        for i, d in zip(alpha.coords, alpha.values):
            anchor[i] = d
        witness = (alpha, tuple(anchor))
    return Verdict(v.answer, witness, v.steps, v.bound, counter.count - start, v.note)


def find_seq_minimum(sq: SequentialProblem, k: int, mode: str = "lattice",
                     counter: StepCounter | None = None, exhaustive: bool = False) -> Verdict:
    """Smallest sequentially sufficient set, by lattice scan or via relevance.

    The lattice scan recomputes the induced optimizer for every candidate,
    as an independent checker call would.
    """
    budgets.require("lattice", sq.base.n, "sequential lattice search (coordinates)")
    counter = counter or StepCounter()
    if mode == "lattice":
        return lattice_search(lambda I: check_seq_sufficiency(sq, I, "fiber", counter),
                              sq.base.n, k, counter, exhaustive)
    if mode == "collapse":
        start = counter.count
        induced = induced_optimizer(sq, counter)
        relevant, steps, bound = relevance_scan(_opt_view(sq, induced), counter)
        return Verdict(len(relevant) <= k, relevant, steps, bound, counter.count - start)
    raise ValueError(f"unknown mode {mode!r}")


def deterministic(base: DecisionProblem, successor, horizon: int,
                  observations: Sequence[Any] | None = None) -> SequentialProblem:
    """Build a backup-mode problem from ``successor(action, state index) -> index``."""
    S = base.num_states
    table = tuple(tuple(((successor(a, k), Fraction(1)),) for k in range(S))
                  for a in range(len(base.actions)))
    return SequentialProblem(base, table, horizon, "backup", observations)
