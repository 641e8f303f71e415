"""Boolean circuits, formulas and succinct (circuit-encoded) utilities.

A circuit is a topologically ordered gate list.  Gates are tuples::

    ("input", i)  ("const", b)  ("not", g)  ("and", g, h)  ("or", g, h)

where ``g`` and ``h`` index earlier gates.  Formula variables are numbered
from 1; variable ``j`` is circuit input ``j - 1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

from . import budgets
from .core import DecisionProblem, Rational, rational
from .errors import FormatError, ShapeError

Gate = tuple


@dataclass(frozen=True)
class BoolCircuit:
    gates: tuple[Gate, ...]
    output: int

    def __post_init__(self):
        gates = tuple(tuple(g) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        for k, g in enumerate(gates):
            kind = g[0] if g else None
            if kind == "input":
                ok = len(g) == 2 and isinstance(g[1], int) and g[1] >= 0
            elif kind == "const":
                ok = len(g) == 2 and g[1] in (0, 1)
            elif kind == "not":
                ok = len(g) == 2 and _earlier(g[1], k)
            elif kind in ("and", "or"):
                ok = len(g) == 3 and _earlier(g[1], k) and _earlier(g[2], k)
            else:
                ok = False
            if not ok:
                raise FormatError(f"gate {k} is malformed: {g!r}")
        if not isinstance(self.output, int) or not 0 <= self.output < len(gates):
            raise FormatError(f"output index {self.output!r} does not name a gate")

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def num_inputs(self) -> int:
        """One more than the largest input index used (0 if none)."""
        return max((g[1] + 1 for g in self.gates if g[0] == "input"), default=0)


def _earlier(ref, k: int) -> bool:
    return isinstance(ref, int) and not isinstance(ref, bool) and 0 <= ref < k


class CircuitBuilder:
    """Appends gates, sharing inputs, constants and negated inputs."""

    def __init__(self):
        self.gates: list[Gate] = []
        self._memo: dict[Gate, int] = {}

    def _add(self, gate: Gate) -> int:
        if gate in self._memo:
            return self._memo[gate]
        self.gates.append(gate)
        self._memo[gate] = len(self.gates) - 1
        return len(self.gates) - 1

    def input(self, i: int) -> int:
        return self._add(("input", i))

    def const(self, b: int) -> int:
        return self._add(("const", int(bool(b))))

    def not_(self, g: int) -> int:
        return self._add(("not", g))

    def and_(self, g: int, h: int) -> int:
        return self._add(("and", g, h))

    def or_(self, g: int, h: int) -> int:
        return self._add(("or", g, h))

    def and_all(self, gs: Sequence[int]) -> int:
        if not gs:
            return self.const(1)
        out = gs[0]
        for g in gs[1:]:
            out = self.and_(out, g)
        return out

    def or_all(self, gs: Sequence[int]) -> int:
        if not gs:
            return self.const(0)
        out = gs[0]
        for g in gs[1:]:
            out = self.or_(out, g)
        return out

    def xor(self, g: int, h: int) -> int:
        return self.and_(self.or_(g, h), self.not_(self.and_(g, h)))

    def embed(self, c: BoolCircuit, inputs: Sequence[int] | Mapping[int, int]) -> int:
        """Copy ``c`` in, wiring its input ``i`` to existing gate ``inputs[i]``."""
        ids: list[int] = []
        for g in c.gates:
            kind = g[0]
            if kind == "input":
                ids.append(inputs[g[1]])
            elif kind == "const":
                ids.append(self.const(g[1]))
            elif kind == "not":
                ids.append(self.not_(ids[g[1]]))
            else:
                ids.append(self._add((kind, ids[g[1]], ids[g[2]])))
        return ids[c.output]

    def build(self, output: int) -> BoolCircuit:
        return BoolCircuit(tuple(self.gates), output)


def eval_circuit(c: BoolCircuit, s: Sequence[int]) -> int:
    """Evaluate ``c`` on the bit vector ``s`` in one forward pass."""
    vals: list[int] = []
    for g in c.gates:
        kind = g[0]
        if kind == "input":
            if g[1] >= len(s):
                raise FormatError(f"input {g[1]} out of range for {len(s)} bits")
            vals.append(1 if s[g[1]] else 0)
        elif kind == "const":
            vals.append(g[1])
        elif kind == "not":
            vals.append(1 - vals[g[1]])
        elif kind == "and":
            vals.append(vals[g[1]] & vals[g[2]])
        else:
            vals.append(vals[g[1]] | vals[g[2]])
    return vals[c.output]


@lru_cache(maxsize=256)
def _input_mask(i: int, n: int) -> int:
    """Bitmask over the 2^n states whose digit i is 1."""
    period = 1 << (i + 1)
    mask = ((1 << (1 << i)) - 1) << (1 << i)
    total = 1 << n
    while period < total:
        mask |= mask << period
        period <<= 1
    return mask


def truth_table(c: BoolCircuit, n: int) -> int:
    """Evaluate ``c`` on all 2^n inputs at once; bit k is the value at state k."""
    if c.num_inputs > n:
        raise FormatError(f"circuit reads input {c.num_inputs - 1} but only {n} bits exist")
    full = (1 << (1 << n)) - 1
    vals: list[int] = []
    for g in c.gates:
        kind = g[0]
        if kind == "input":
            vals.append(_input_mask(g[1], n))
        elif kind == "const":
            vals.append(full if g[1] else 0)
        elif kind == "not":
            vals.append(full ^ vals[g[1]])
        elif kind == "and":
            vals.append(vals[g[1]] & vals[g[2]])
        else:
            vals.append(vals[g[1]] | vals[g[2]])
    return vals[c.output]


def _bits(mask: int, count: int) -> str:
    return format(mask, "b").zfill(count)[::-1]


# --------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class CNF:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.num_vars < 0:
            raise FormatError("variable count must be non-negative")
        for c in clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise FormatError(f"literal {lit} invalid for {self.num_vars} variables")

    def evaluate(self, assign: Sequence[int]) -> int:
        return int(all(any((assign[abs(l) - 1] == 1) == (l > 0) for l in c) for c in self.clauses))

    @property
    def size(self) -> int:
        """Variables plus clauses plus literal occurrences."""
        return self.num_vars + len(self.clauses) + sum(len(c) for c in self.clauses)


@dataclass(frozen=True)
class CircuitFormula:
    num_vars: int
    circuit: BoolCircuit

    def __post_init__(self):
        if self.circuit.num_inputs > self.num_vars:
            raise FormatError("circuit reads more inputs than the formula declares")

    def evaluate(self, assign: Sequence[int]) -> int:
        return eval_circuit(self.circuit, assign[: self.num_vars])


@dataclass(frozen=True)
class TruthTable:
    """Formula given by its value on every assignment (bit k = value at k)."""

    num_vars: int
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < 1 << (1 << self.num_vars):
            raise FormatError("truth table has bits beyond its 2^n entries")

    def evaluate(self, assign: Sequence[int]) -> int:
        k = sum(1 << j for j in range(self.num_vars) if assign[j])
        return (self.bits >> k) & 1


Formula = Union[CNF, CircuitFormula, TruthTable]


def cnf_to_circuit(f: CNF) -> BoolCircuit:
    """Or of literals per clause, and of clauses."""
    b = CircuitBuilder()
    clause_gates = []
    for c in f.clauses:
        lits = [b.input(l - 1) if l > 0 else b.not_(b.input(-l - 1)) for l in c]
        clause_gates.append(b.or_all(lits))
    return b.build(b.and_all(clause_gates))


def truth_table_to_circuit(f: TruthTable) -> BoolCircuit:
    """Shannon expansion on the highest variable with shared subtables."""
    b = CircuitBuilder()
    memo: dict[tuple[int, int], int] = {}

    def build(bits: int, nv: int) -> int:
        full = (1 << (1 << nv)) - 1
        if bits == 0:
            return b.const(0)
        if bits == full:
            return b.const(1)
        if (bits, nv) in memo:
            return memo[bits, nv]
        half = 1 << (nv - 1)
        lo, hi = bits & ((1 << half) - 1), bits >> half
        sub_full = (1 << half) - 1
        if lo == hi:
            out = build(lo, nv - 1)
        else:
            x = b.input(nv - 1)
            if lo == 0 and hi == sub_full:
                out = x
            elif lo == sub_full and hi == 0:
                out = b.not_(x)
            elif lo == 0:
                out = b.and_(x, build(hi, nv - 1))
            elif hi == 0:
                out = b.and_(b.not_(x), build(lo, nv - 1))
            elif hi == sub_full:
                out = b.or_(x, build(lo, nv - 1))
            elif lo == sub_full:
                out = b.or_(b.not_(x), build(hi, nv - 1))
            else:
                out = b.or_(b.and_(x, build(hi, nv - 1)), b.and_(b.not_(x), build(lo, nv - 1)))
        memo[bits, nv] = out
        return out

    return b.build(build(f.bits, f.num_vars))


def formula_circuit(f: Formula) -> BoolCircuit:
    if isinstance(f, CNF):
        return cnf_to_circuit(f)
    if isinstance(f, TruthTable):
        return truth_table_to_circuit(f)
    return f.circuit


def formula_vars(f: Formula) -> int:
    return f.num_vars


def formula_variables_used(f: Formula) -> set[int]:
    if isinstance(f, CNF):
        return {abs(l) for c in f.clauses for l in c}
    return set(range(1, f.num_vars + 1))


def is_tautology_oracle(f: Formula) -> bool:
    """Exhaustive truth-table check."""
    budgets.require("formula", f.num_vars, "tautology oracle (variables)")
    return all(f.evaluate(a) for a in itertools.product((0, 1), repeat=f.num_vars))


def count_models(f: Formula) -> int:
    budgets.require("formula", f.num_vars, "model counting oracle (variables)")
    return sum(f.evaluate(a) for a in itertools.product((0, 1), repeat=f.num_vars))


@dataclass(frozen=True)
class QBF:
    """Prenex QBF: ``prefix`` lists ``("e"|"a", variable)`` outermost first."""

    prefix: tuple[tuple[str, int], ...]
    matrix: Formula

    def __post_init__(self):
        prefix = tuple((q, int(v)) for q, v in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        seen = set()
        for q, v in prefix:
            if q not in ("e", "a"):
                raise FormatError(f"unknown quantifier {q!r}")
            if v < 1 or v in seen:
                raise FormatError(f"variable {v} quantified twice or invalid")
            seen.add(v)
        free = formula_variables_used(self.matrix) - seen
        if free:
            raise FormatError(f"matrix variables {sorted(free)} are not quantified")

    @property
    def num_vars(self) -> int:
        return max([v for _, v in self.prefix] + [self.matrix.num_vars], default=0)

    def blocks(self) -> list[tuple[str, list[int]]]:
        out: list[tuple[str, list[int]]] = []
        for q, v in self.prefix:
            if out and out[-1][0] == q:
                out[-1][1].append(v)
            else:
                out.append((q, [v]))
        return out


def eval_qbf_oracle(q: QBF) -> bool:
    """Game-tree evaluation over the prefix."""
    budgets.require("qbf", len(q.prefix), "QBF oracle (quantified variables)")
    assign = [0] * q.num_vars

    def value(depth: int) -> bool:
        if depth == len(q.prefix):
            return bool(q.matrix.evaluate(assign))
        quant, var = q.prefix[depth]
        results = []
        for bit in (0, 1):
            assign[var - 1] = bit
            results.append(value(depth + 1))
        assign[var - 1] = 0
        return any(results) if quant == "e" else all(results)

    return value(0)


# --------------------------------------------------------------------------
# Succinct utilities


@dataclass(frozen=True)
class SuccinctProblem:
    """Utilities ``U(a, s) = sum_j weight_j * circuit_j(s)`` over {0,1}^n."""

    n: int
    actions: tuple[str, ...]
    terms: tuple[tuple[tuple[BoolCircuit, Rational], ...], ...] = field(repr=False)

    def __post_init__(self):
        if self.n < 0:
            raise FormatError("n must be non-negative")
        if not self.actions:
            raise FormatError("a succinct problem needs at least one action")
        terms = tuple(tuple((c, rational(w)) for c, w in row) for row in self.terms)
        if len(terms) != len(self.actions):
            raise FormatError("one term list per action is required")
        for row in terms:
            for c, _ in row:
                if c.num_inputs > self.n:
                    raise FormatError(f"circuit reads input {c.num_inputs - 1} but n={self.n}")
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "terms", terms)

    def utility(self, a: int, s: Sequence[int]) -> Rational:
        if len(s) != self.n:
            raise ShapeError(f"state has {len(s)} bits, expected {self.n}")
        return sum((w * eval_circuit(c, s) for c, w in self.terms[a]), 0)


def instance_length(sp: SuccinctProblem) -> int:
    """|A| + n + total gate count over all terms."""
    return len(sp.actions) + sp.n + gate_count(sp)


def gate_count(sp: SuccinctProblem) -> int:
    return sum(c.size for row in sp.terms for c, _ in row)


def expand(sp: SuccinctProblem) -> DecisionProblem:
    """Tabulate a succinct problem; refuses beyond the expansion budget."""
    count = 1 << sp.n
    budgets.require("expand", count * len(sp.actions), "expansion (table entries)")
    rows = []
    for term_list in sp.terms:
        row: list[Rational] = [0] * count
        for c, w in term_list:
            bits = _bits(truth_table(c, sp.n), count)
            for k, bit in enumerate(bits):
                if bit == "1":
                    row[k] += w
        rows.append(row)
    return DecisionProblem(sp.actions, (2,) * sp.n, rows)


def circuit_of(gates: Iterable[Gate], output: int | None = None) -> BoolCircuit:
    """Convenience constructor; the output defaults to the last gate."""
    gates = tuple(gates)
    return BoolCircuit(gates, len(gates) - 1 if output is None else output)
