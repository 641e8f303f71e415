"""Counted explicit-state searches for sufficiency, anchors and minimum sets.

Step unit: one OptSet computation or one OptSet equality comparison.  The
anchor scan charges one step per visited state (its comparison against the
fiber's first OptSet rides along), and the lattice search charges one step
per sufficiency-checker call.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import DecisionProblem, OptSet, State, coordset, project, strides
from .verdict import Assignment, Pair, StepCounter, Verdict


@dataclass(frozen=True)
class OptView:
    """The parts of a problem the scans look at: states and their OptSets."""

    domains: tuple[int, ...]
    states: tuple[State, ...]
    optsets: tuple[OptSet, ...]
    num_actions: int

    @classmethod
    def of(cls, problem) -> "OptView":
        return cls(problem.domains, problem.states, problem.opt_table, len(problem.actions))

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def size(self) -> int:
        return len(self.states)


def _view(problem) -> OptView:
    return problem if isinstance(problem, OptView) else OptView.of(problem)


def scan_sufficiency(view: OptView, coords: Iterable[int], strategy: str = "fiber",
                     counter: StepCounter | None = None) -> Verdict:
    counter = counter or StepCounter()
    start = counter.count
    members = coordset(coords, view.n)
    S = view.size
    if strategy == "fiber":
        bound = 2 * S * view.num_actions
        first: dict[tuple[int, ...], int] = {}
        for k, s in enumerate(view.states):
            counter.tick()
            rep = first.setdefault(project(s, members), k)
            if rep != k:
                counter.tick()
                if view.optsets[rep] != view.optsets[k]:
                    steps = counter.count - start
                    return Verdict(False, Pair(view.states[rep], s), steps, bound, steps)
    elif strategy == "pairwise":
        bound = S * S * view.num_actions ** 2
        keys = [project(s, members) for s in view.states]
        counter.tick(S)
        for x in range(S):
            for y in range(x + 1, S):
                if keys[x] == keys[y]:
                    counter.tick()
                    if view.optsets[x] != view.optsets[y]:
                        steps = counter.count - start
                        return Verdict(False, Pair(view.states[x], view.states[y]), steps, bound, steps)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    steps = counter.count - start
    return Verdict(True, None, steps, bound, steps)


def anchor_order(domains: Sequence[int], members: Sequence[int]) -> list[tuple[int, ...]]:
    """Assignments to ``members`` in mixed-radix order (first member fastest)."""
    ranges = [range(domains[i]) for i in reversed(members)]
    return [a[::-1] for a in itertools.product(*ranges)]


def scan_anchor(view: OptView, coords: Iterable[int],
                counter: StepCounter | None = None) -> Verdict:
    counter = counter or StepCounter()
    start = counter.count
    members = coordset(coords, view.n)
    w = strides(view.domains)
    rest = [i for i in range(view.n) if i not in members]
    offsets = [sum(d * w[i] for d, i in zip(a, rest)) for a in anchor_order(view.domains, rest)]
    failures = []
    for alpha in anchor_order(view.domains, members):
        base = sum(d * w[i] for d, i in zip(alpha, members))
        ref = None
        bad = None
        for off in offsets:
            k = base + off
            counter.tick()
            if ref is None:
                ref = k
            elif view.optsets[k] != view.optsets[ref]:
                bad = Pair(view.states[ref], view.states[k])
                break
        if bad is None:
            steps = counter.count - start
            return Verdict(True, Assignment(members, alpha), steps, view.size, steps)
        failures.append((Assignment(members, alpha), bad))
    steps = counter.count - start
    return Verdict(False, tuple(failures), steps, view.size, steps,
                   note="witness lists one disagreeing pair per fiber")


def relevance_scan(view: OptView, counter: StepCounter | None = None) -> tuple[tuple[int, ...], int, int]:
    """Counted relevance search; returns (relevant set, steps, bound)."""
    counter = counter or StepCounter()
    start = counter.count
    w = strides(view.domains)
    counter.tick(view.size)
    bound = view.size + view.size * sum(d - 1 for d in view.domains)
    relevant = []
    for i in range(view.n):
        found = False
        for k, s in enumerate(view.states):
            for v in range(s[i] + 1, view.domains[i]):
                counter.tick()
                if view.optsets[k] != view.optsets[k + (v - s[i]) * w[i]]:
                    found = True
                    break
            if found:
                break
        if found:
            relevant.append(i)
    return tuple(relevant), counter.count - start, bound


def lattice_search(check, n: int, k: int, counter: StepCounter, exhaustive: bool = False) -> Verdict:
    """Scan subsets by size then lexicographically; ``check(I)`` returns a Verdict."""
    start = counter.count
    calls = 0
    best = None
    for size in range(n + 1):
        if not exhaustive and size > k:
            break
        for subset in itertools.combinations(range(n), size):
            calls += 1
            if check(subset).answer and best is None:
                best = subset
                if not exhaustive:
                    break
        if best is not None and not exhaustive:
            break
    answer = best is not None and len(best) <= k
    return Verdict(answer, best, calls, 2 ** n, counter.count - start)


def check_sufficiency(problem: DecisionProblem | OptView, coords: Iterable[int],
                      strategy: str = "fiber", counter: StepCounter | None = None) -> Verdict:
    """Decide whether ``coords`` is sufficient.

    ``strategy="fiber"`` groups states by projection (at most 2*|S| steps);
    ``"pairwise"`` inspects every pair of states (at most |S|^2 steps).
    """
    return scan_sufficiency(_view(problem), coords, strategy, counter)


def check_anchor(problem: DecisionProblem | OptView, coords: Iterable[int],
                 counter: StepCounter | None = None) -> Verdict:
    """Look for an assignment to ``coords`` whose fiber has a constant OptSet.

    Fibers are tried in mixed-radix order, so the witness is the smallest
    such assignment.  On NO the witness holds a disagreeing pair per fiber.
    """
    return scan_anchor(_view(problem), coords, counter)


def find_minimum_sufficient(problem: DecisionProblem | OptView, k: int, mode: str = "collapse",
                            counter: StepCounter | None = None, exhaustive: bool = False) -> Verdict:
    """Is there a sufficient set of size at most ``k``?

    The collapse mode computes the relevant coordinates directly; the lattice
    mode tries subsets in order of size and must agree with it.
    """
    view = _view(problem)
    counter = counter or StepCounter()
    if mode == "collapse":
        relevant, steps, bound = relevance_scan(view, counter)
        return Verdict(len(relevant) <= k, relevant, steps, bound, steps)
    if mode == "lattice":
        return lattice_search(lambda I: scan_sufficiency(view, I, "fiber", counter),
                              view.n, k, counter, exhaustive)
    raise ValueError(f"unknown mode {mode!r}")


def steps_report(problem: DecisionProblem | OptView, query: str, **params) -> dict:
    """Run ``query`` and report its counted steps against the declared bound."""
    view = _view(problem)
    if query == "sufficiency":
        v = check_sufficiency(view, params.get("coords", ()), params.get("strategy", "fiber"))
    elif query == "anchor":
        v = check_anchor(view, params.get("coords", ()))
    elif query == "minimum":
        v = find_minimum_sufficient(view, params.get("k", view.n), params.get("mode", "collapse"))
    else:
        raise ValueError(f"unknown query {query!r}")
    return {"states": view.size, "actions": view.num_actions, "steps": v.steps,
            "bound": v.bound, "margin": v.bound - v.steps, "answer": v.label}
