"""Verdicts and step counting shared by the deciders."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, NamedTuple

from .errors import BudgetExhausted


class Pair(NamedTuple):
    """Two states (as digit tuples) whose optimal action sets differ."""

    first: tuple[int, ...]
    second: tuple[int, ...]


class Assignment(NamedTuple):
    """A partial assignment: values for the coordinates in ``coords``."""

    coords: tuple[int, ...]
    values: tuple[int, ...]


@dataclass(frozen=True)
class Verdict:
    """Outcome of a counted decision procedure.

    ``steps`` is measured in the unit the operation declares (an OptSet
    computation or comparison for the scans, one checker call for the lattice
    searches) and never exceeds ``bound``.  ``work`` counts every primitive
    tick including nested calls; budgets are charged against it.
    """

    answer: bool
    witness: Any = None
    steps: int = 0
    bound: int | None = None
    work: int = 0
    note: str = ""

    @property
    def label(self) -> str:
        return "YES" if self.answer else "NO"

    @property
    def margin(self) -> int | None:
        return None if self.bound is None else self.bound - self.steps


class StepCounter:
    """Counts primitive steps; a tick that would pass ``limit`` raises :class:`BudgetExhausted` instead."""

    def __init__(self, limit: int | None = None):
        self.count = 0
        self.limit = limit

    def tick(self, k: int = 1) -> None:
        if self.limit is not None and self.count + k > self.limit:
            raise BudgetExhausted(self.count + k, self.limit)
        self.count += k
