"""Distributions over states and the conditional (fiber) optimizer.

Step unit: one state accumulated into its fiber, one OptSet computation or
one comparison.  The anchor search additionally charges ``|A|`` per fiber it
inspects for a unique optimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, NamedTuple, Sequence

from . import budgets
from .core import DecisionProblem, OptSet, State, argmax, coordset, project, rational
from .errors import DistributionError
from .static import lattice_search
from .verdict import Assignment, StepCounter, Verdict


@dataclass(frozen=True)
class StochasticProblem:
    base: DecisionProblem
    dist: tuple[Fraction, ...] = field(repr=False)

    def __post_init__(self):
        probs = tuple(Fraction(rational(p)) for p in self.dist)
        if len(probs) != self.base.num_states:
            raise DistributionError(f"distribution has {len(probs)} entries, expected {self.base.num_states}")
        if any(p < 0 for p in probs):
            raise DistributionError("probabilities must be non-negative")
        if sum(probs) != 1:
            raise DistributionError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "dist", probs)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, p in enumerate(self.dist) if p > 0)

    @property
    def full_support(self) -> bool:
        return all(p > 0 for p in self.dist)


def uniform(problem: DecisionProblem) -> StochasticProblem:
    size = problem.num_states
    return StochasticProblem(problem, (Fraction(1, size),) * size)


def point_mass(problem: DecisionProblem, k: int) -> StochasticProblem:
    return StochasticProblem(problem, tuple(Fraction(int(j == k)) for j in range(problem.num_states)))


class FiberEntry(NamedTuple):
    mass: Fraction
    expected: tuple[Fraction, ...]
    optset: OptSet


@dataclass(frozen=True)
class FiberOptimizer:
    """Conditional expected utilities and OptSet for each positive-mass fiber."""

    coords: tuple[int, ...]
    entries: dict[Any, FiberEntry]
    members: dict[Any, tuple[int, ...]]

    def optset(self, alpha) -> OptSet | None:
        entry = self.entries.get(tuple(alpha) if isinstance(alpha, list) else alpha)
        return None if entry is None else entry.optset


class Violation(NamedTuple):
    state: State
    fiber_optset: OptSet | None
    pointwise_optset: OptSet


def _fibers(sp: StochasticProblem, keys: Sequence[Any], counter: StepCounter):
    """Accumulate mass and weighted utilities per fiber label."""
    base = sp.base
    mass: dict[Any, Fraction] = {}
    sums: dict[Any, list] = {}
    members: dict[Any, list[int]] = {}
    for k, key in enumerate(keys):
        counter.tick()
        members.setdefault(key, []).append(k)
        p = sp.dist[k]
        if key not in mass:
            mass[key] = Fraction(0)
            sums[key] = [Fraction(0)] * len(base.actions)
        if p:
            mass[key] += p
            acc = sums[key]
            for a, row in enumerate(base.utilities):
                acc[a] += p * row[k]
    entries = {}
    for key, m in mass.items():
        if m > 0:
            expected = tuple(x / m for x in sums[key])
            entries[key] = FiberEntry(m, expected, argmax(expected))
    return FiberOptimizer((), entries, {key: tuple(v) for key, v in members.items()})


def _keys(sp: StochasticProblem, coords: Iterable[int]) -> tuple[tuple[int, ...], list]:
    members = coordset(coords, sp.base.n)
    return members, [project(s, members) for s in sp.base.states]


def fiber_optimizer(sp: StochasticProblem, coords: Iterable[int],
                    counter: StepCounter | None = None) -> FiberOptimizer:
    """Conditional optimizer of every positive-mass fiber of ``coords``."""
    members, keys = _keys(sp, coords)
    fo = _fibers(sp, keys, counter or StepCounter())
    return FiberOptimizer(members, fo.entries, fo.members)


def fiber_optimizer_under(sp: StochasticProblem, phi: Callable[[int], Any] | Sequence[Any],
                          counter: StepCounter | None = None) -> FiberOptimizer:
    """Same as :func:`fiber_optimizer` for an arbitrary labelling of states."""
    label = phi if callable(phi) else phi.__getitem__
    return _fibers(sp, [label(k) for k in range(sp.base.num_states)], counter or StepCounter())


def _preservation(sp: StochasticProblem, keys: Sequence[Any], strict: bool, reading: str,
                  counter: StepCounter | None) -> Verdict:
    counter = counter or StepCounter()
    start = counter.count
    fo = _fibers(sp, keys, counter)
    bound = 3 * sp.base.num_states
    skipped = 0
    for k, key in enumerate(keys):
        entry = fo.entries.get(key)
        pointwise = sp.base.opt_table[k]
        if entry is None:
            if strict:
                steps = counter.count - start
                return Verdict(False, Violation(sp.base.states[k], None, pointwise), steps, bound, steps,
                               note="state lies in a zero-mass fiber (strict mode)")
            skipped += 1
            continue
        counter.tick(2)
        if reading == "exact":
            ok = entry.optset == pointwise
        elif reading == "inclusive":
            ok = set(pointwise) <= set(entry.optset)
        else:
            raise ValueError(f"unknown reading {reading!r}")
        if not ok:
            steps = counter.count - start
            return Verdict(False, Violation(sp.base.states[k], entry.optset, pointwise), steps, bound, steps)
    steps = counter.count - start
    note = f"skipped {skipped} states in zero-mass fibers" if skipped else ""
    return Verdict(True, None, steps, bound, steps, note=note)


def check_preservation(sp: StochasticProblem, coords: Iterable[int], strict: bool = False,
                       reading: str = "exact", counter: StepCounter | None = None) -> Verdict:
    """Does the fiber optimizer of ``coords`` equal Opt(s) at every state?

    States in zero-mass fibers have no fiber optimizer; they are skipped
    (and counted in the note) unless ``strict`` is set, in which case the
    first such state is returned as a violation.  ``reading="inclusive"``
    only asks that Opt(s) be contained in the fiber's OptSet.
    """
    _, keys = _keys(sp, coords)
    return _preservation(sp, keys, strict, reading, counter)


def check_preservation_under(sp: StochasticProblem, phi: Callable[[int], Any] | Sequence[Any],
                             strict: bool = False, counter: StepCounter | None = None) -> Verdict:
    label = phi if callable(phi) else phi.__getitem__
    keys = [label(k) for k in range(sp.base.num_states)]
    return _preservation(sp, keys, strict, "exact", counter)


def check_decisiveness(sp: StochasticProblem, coords: Iterable[int],
                       counter: StepCounter | None = None) -> Verdict:
    """Is every positive-mass fiber's conditional optimum unique?"""
    counter = counter or StepCounter()
    start = counter.count
    members, keys = _keys(sp, coords)
    fo = _fibers(sp, keys, counter)
    bound = 2 * sp.base.num_states
    for alpha, entry in fo.entries.items():
        counter.tick()
        if len(entry.optset) != 1:
            steps = counter.count - start
            return Verdict(False, Assignment(members, alpha), steps, bound, steps)
    steps = counter.count - start
    return Verdict(True, None, steps, bound, steps)


def check_stoch_anchor(sp: StochasticProblem, coords: Iterable[int],
                       counter: StepCounter | None = None) -> Verdict:
    """Is there a positive-mass fiber with a unique conditional optimum?"""
    counter = counter or StepCounter()
    start = counter.count
    members, keys = _keys(sp, coords)
    fo = _fibers(sp, keys, counter)
    A = len(sp.base.actions)
    bound = 2 * sp.base.num_states * A
    for alpha, entry in fo.entries.items():
        counter.tick(A)
        if len(entry.optset) == 1:
            steps = counter.count - start
            return Verdict(True, (Assignment(members, alpha), entry.optset[0]), steps, bound, steps)
    steps = counter.count - start
    return Verdict(False, None, steps, bound, steps)


def check_stoch_anchor_preservation(sp: StochasticProblem, coords: Iterable[int],
                                    counter: StepCounter | None = None) -> Verdict:
    """Is there a positive-mass fiber on which the fiber optimizer matches Opt everywhere?

    Zero-mass fibers have no optimizer and cannot serve as anchors.
    """
    counter = counter or StepCounter()
    start = counter.count
    members, keys = _keys(sp, coords)
    fo = _fibers(sp, keys, counter)
    bound = 3 * sp.base.num_states
    for alpha, entry in fo.entries.items():
        ok = True
        for k in fo.members[alpha]:
            counter.tick(2)
            if sp.base.opt_table[k] != entry.optset:
                ok = False
                break
        if ok:
            anchor = sp.base.states[fo.members[alpha][0]]
            steps = counter.count - start
            return Verdict(True, (Assignment(members, alpha), anchor), steps, bound, steps)
    steps = counter.count - start
    return Verdict(False, None, steps, bound, steps)


def find_stoch_minimum(sp: StochasticProblem, k: int, family: str = "preservation",
                       counter: StepCounter | None = None, exhaustive: bool = False,
                       strict: bool = False) -> Verdict:
    """Subset-lattice search for a preserving or decisive set of size at most ``k``."""
    n = sp.base.n
    budgets.require("lattice", n, "stochastic lattice search (coordinates)")
    counter = counter or StepCounter()
    if family == "preservation":
        def check(I):
            return check_preservation(sp, I, strict=strict, counter=counter)
    elif family == "decisiveness":
        def check(I):
            return check_decisiveness(sp, I, counter=counter)
    else:
        raise ValueError(f"unknown family {family!r}")
    return lattice_search(check, n, k, counter, exhaustive)


def stochastic_partition(sp: StochasticProblem, coords: Iterable[int]) -> tuple[OptSet | None, ...]:
    """Label each state by its fiber's conditional OptSet (None off the support)."""
    fo = fiber_optimizer(sp, coords)
    return tuple(fo.optset(project(s, fo.coords)) for s in sp.base.states)
