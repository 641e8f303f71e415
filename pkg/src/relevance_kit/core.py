"""Finite decision problems, the optimizer map and definitional oracles.

A problem has actions ``A``, coordinates with finite domains ``X_0..X_{n-1}``
and an exact utility ``U(a, s)``.  States are digit tuples; their index is
mixed radix with coordinate 0 least significant.  Everything here is brute
force on purpose: the faster deciders elsewhere are tested against it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Sequence, Union

from .errors import DimensionError, FormatError
from .verdict import Pair, Verdict

Rational = Union[int, Fraction]
State = tuple[int, ...]
OptSet = tuple[int, ...]


def rational(value: Any) -> Rational:
    """Normalize ``value`` to an exact rational (``int`` when integral)."""
    if isinstance(value, bool) or isinstance(value, float):
        raise FormatError(f"utility {value!r} is not an exact rational")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            value = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"bad rational {value!r}") from exc
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    raise FormatError(f"utility {value!r} is not an exact rational")


def argmax(values: Sequence[Rational]) -> OptSet:
    best = max(values)
    return tuple(i for i, v in enumerate(values) if v == best)


def coordset(coords: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate and canonicalize a coordinate set as a sorted tuple."""
    members = tuple(sorted(set(coords)))
    for i in members:
        if not isinstance(i, int) or not 0 <= i < n:
            raise DimensionError(f"coordinate {i!r} out of range for n={n}")
    return members


def project(s: Sequence[int], coords: Sequence[int]) -> tuple[int, ...]:
    return tuple(s[i] for i in coords)


def strides(domains: Sequence[int]) -> tuple[int, ...]:
    out, w = [], 1
    for d in domains:
        out.append(w)
        w *= d
    return tuple(out)


def enumerate_states(domains: Sequence[int]) -> tuple[State, ...]:
    """All states in ascending mixed-radix index order."""
    ranges = [range(d) for d in reversed(domains)]
    return tuple(s[::-1] for s in itertools.product(*ranges))


@dataclass(frozen=True)
class DecisionProblem:
    """Explicit decision problem over a product state space.

    ``utilities[a][k]`` is the utility of action ``a`` in the state with
    index ``k``.
    """

    actions: tuple[str, ...]
    domains: tuple[int, ...]
    utilities: tuple[tuple[Rational, ...], ...] = field(repr=False)

    def __post_init__(self):
        actions = tuple(str(a) for a in self.actions)
        domains = tuple(self.domains)
        if not actions:
            raise FormatError("a decision problem needs at least one action")
        if len(set(actions)) != len(actions):
            raise FormatError("action names must be distinct")
        for d in domains:
            if isinstance(d, bool) or not isinstance(d, int) or d < 1:
                raise FormatError(f"coordinate domain size {d!r} must be a positive integer")
        size = 1
        for d in domains:
            size *= d
        rows = tuple(tuple(rational(u) for u in row) for row in self.utilities)
        if len(rows) != len(actions) or any(len(row) != size for row in rows):
            raise FormatError(
                f"utility table must be {len(actions)} x {size}, got "
                f"{len(rows)} x {[len(r) for r in rows]}"
            )
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "utilities", rows)

    @classmethod
    def from_function(cls, actions: Sequence[str], domains: Sequence[int],
                      utility: Callable[[int, State], Any]) -> "DecisionProblem":
        """Tabulate ``utility(action_index, state)`` over every state."""
        states = enumerate_states(domains)
        rows = [[utility(a, s) for s in states] for a in range(len(actions))]
        return cls(tuple(actions), tuple(domains), rows)

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def num_states(self) -> int:
        return len(self.utilities[0])

    @cached_property
    def strides(self) -> tuple[int, ...]:
        return strides(self.domains)

    @cached_property
    def states(self) -> tuple[State, ...]:
        return enumerate_states(self.domains)

    @cached_property
    def opt_table(self) -> tuple[OptSet, ...]:
        return tuple(argmax(col) for col in zip(*self.utilities))

    def index(self, s: Sequence[int]) -> int:
        if len(s) != self.n:
            raise DimensionError(f"state has {len(s)} coordinates, expected {self.n}")
        k = 0
        for digit, d, w in zip(s, self.domains, self.strides):
            if not 0 <= digit < d:
                raise DimensionError(f"digit {digit} out of range for domain of size {d}")
            k += digit * w
        return k

    def index_of(self, s: Sequence[int]) -> int | None:
        try:
            return self.index(s)
        except DimensionError:
            return None

    def state(self, k: int) -> State:
        if not 0 <= k < self.num_states:
            raise DimensionError(f"state index {k} out of range")
        return self.states[k]

    def utility(self, a: int, s: Sequence[int]) -> Rational:
        return self.utilities[a][self.index(s)]


@dataclass(frozen=True)
class DecisionTable:
    """Decision problem whose states are an explicit list of coordinate rows.

    Unlike :class:`DecisionProblem` the rows need not exhaust the product of
    the domains, and two objects may share a row.  This is the decision-table
    view used for attribute reduction; several minimal sufficient sets may
    coexist here, and a table whose equal rows disagree has none at all.
    """

    actions: tuple[str, ...]
    domains: tuple[int, ...]
    rows: tuple[State, ...]
    utilities: tuple[tuple[Rational, ...], ...] = field(repr=False)

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        domains = tuple(self.domains)
        if not self.actions:
            raise FormatError("a decision table needs at least one action")
        if not rows:
            raise FormatError("a decision table needs at least one row")
        for r in rows:
            if len(r) != len(domains) or any(not 0 <= v < d for v, d in zip(r, domains)):
                raise DimensionError(f"row {r} does not fit domains {domains}")
        utilities = tuple(tuple(rational(u) for u in row) for row in self.utilities)
        if len(utilities) != len(self.actions) or any(len(u) != len(rows) for u in utilities):
            raise FormatError("utility table shape does not match actions x rows")
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "utilities", utilities)

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def num_states(self) -> int:
        return len(self.rows)

    @property
    def states(self) -> tuple[State, ...]:
        return self.rows

    @cached_property
    def opt_table(self) -> tuple[OptSet, ...]:
        return tuple(argmax(col) for col in zip(*self.utilities))

    @cached_property
    def _row_index(self) -> dict[State, int]:
        index: dict[State, int] = {}
        for k, r in enumerate(self.rows):
            index.setdefault(r, k)
        return index

    def index_of(self, s: Sequence[int]) -> int | None:
        return self._row_index.get(tuple(s))


Problem = Union[DecisionProblem, DecisionTable]


def induced_table(problem: DecisionProblem) -> DecisionTable:
    """The same problem viewed as a decision table with one row per state."""
    return DecisionTable(problem.actions, problem.domains, problem.states, problem.utilities)


def opt(problem: Problem, s: Sequence[int]) -> OptSet:
    k = problem.index_of(s)
    if k is None:
        raise DimensionError(f"{tuple(s)} is not a state of this problem")
    return problem.opt_table[k]


def is_sufficient_oracle(problem: Problem, coords: Iterable[int]) -> Verdict:
    """Group states by their projection and compare OptSets within each group."""
    members = coordset(coords, problem.n)
    first: dict[tuple[int, ...], int] = {}
    steps = 0
    for k, s in enumerate(problem.states):
        key = project(s, members)
        steps += 1
        rep = first.setdefault(key, k)
        if rep != k:
            steps += 1
            if problem.opt_table[rep] != problem.opt_table[k]:
                return Verdict(False, Pair(problem.states[rep], s), steps, 2 * problem.num_states, steps)
    return Verdict(True, None, steps, 2 * problem.num_states, steps)


def is_sufficient_pairwise(problem: Problem, coords: Iterable[int]) -> bool:
    """Literal reading of the definition: every pair of states is inspected."""
    members = coordset(coords, problem.n)
    table, states = problem.opt_table, problem.states
    for x in range(len(states)):
        for y in range(len(states)):
            if project(states[x], members) == project(states[y], members) and table[x] != table[y]:
                return False
    return True


def relevance_witnesses(problem: Problem) -> dict[int, Pair]:
    """For each relevant coordinate, the first pair differing only there."""
    if isinstance(problem, DecisionTable):
        return _table_relevance(problem)
    found: dict[int, Pair] = {}
    table = problem.opt_table
    for i in range(problem.n):
        for k, s in enumerate(problem.states):
            for v in range(problem.domains[i]):
                if v == s[i]:
                    continue
                t = s[:i] + (v,) + s[i + 1:]
                j = problem.index_of(t)
                if j is not None and table[j] != table[k]:
                    found[i] = Pair(s, t)
                    break
            if i in found:
                break
    return found


def _table_relevance(table: DecisionTable) -> dict[int, Pair]:
    found: dict[int, Pair] = {}
    for i in range(table.n):
        groups: dict[State, list[int]] = {}
        for k, r in enumerate(table.rows):
            groups.setdefault(r[:i] + r[i + 1:], []).append(k)
        for members in groups.values():
            pair = next(((x, y) for x in members for y in members
                         if table.rows[x][i] != table.rows[y][i]
                         and table.opt_table[x] != table.opt_table[y]), None)
            if pair:
                found[i] = Pair(table.rows[pair[0]], table.rows[pair[1]])
                break
    return found


def relevant_coordinates(problem: Problem) -> tuple[int, ...]:
    return tuple(sorted(relevance_witnesses(problem)))


def structural_rank(problem: Problem) -> int:
    return len(relevant_coordinates(problem))


def minimum_sufficient_set(problem: DecisionProblem, verify: bool = False) -> tuple[int, ...]:
    """The relevant coordinates, which form the unique minimal sufficient set.

    With ``verify`` the result is re-checked: it is sufficient and dropping
    any member breaks sufficiency.
    """
    result = relevant_coordinates(problem)
    if verify:
        assert is_sufficient_oracle(problem, result).answer
        for i in result:
            rest = [j for j in result if j != i]
            assert not is_sufficient_oracle(problem, rest).answer
    return result


@dataclass(frozen=True)
class Quotient:
    class_of: tuple[int, ...]
    representatives: tuple[int, ...]
    class_optset: tuple[OptSet, ...]

    @property
    def num_classes(self) -> int:
        return len(self.representatives)


def quotient(problem: Problem) -> Quotient:
    """Partition states by OptSet; class ids follow first appearance."""
    ids: dict[OptSet, int] = {}
    reps: list[int] = []
    class_of = []
    for k, o in enumerate(problem.opt_table):
        if o not in ids:
            ids[o] = len(reps)
            reps.append(k)
        class_of.append(ids[o])
    return Quotient(tuple(class_of), tuple(reps), tuple(ids))


@dataclass(frozen=True)
class Factorization:
    """A map from labels to quotient classes with ``class_of == psi . phi``."""

    psi: dict[Any, int]


@dataclass(frozen=True)
class Refusal:
    reason: str
    witness: Pair | None = None
    missing: tuple[Any, ...] = ()


def factor_through(problem: Problem, phi: Sequence[Any] | Mapping[int, Any] | Callable[[int], Any],
                   codomain: Iterable[Any] | None = None) -> Factorization | Refusal:
    """Factor the quotient map through a labelling ``phi`` of state indices.

    When ``codomain`` is given, labels it contains that ``phi`` never hits make
    the factorization non-unique and are refused.
    """
    label = phi if callable(phi) else phi.__getitem__
    q = quotient(problem)
    psi: dict[Any, int] = {}
    seen: dict[Any, int] = {}
    for k in range(problem.num_states):
        lab = label(k)
        if lab in psi:
            if psi[lab] != q.class_of[k]:
                return Refusal("labelling merges states with different optimal sets",
                               Pair(problem.states[seen[lab]], problem.states[k]))
        else:
            psi[lab] = q.class_of[k]
            seen[lab] = k
    if codomain is not None:
        missing = tuple(lab for lab in codomain if lab not in psi)
        if missing:
            return Refusal("labelling is not surjective onto the declared codomain", None, missing)
    return Factorization(psi)
