"""Reduction gadgets and an oracle-backed harness that checks each one.

Every generator returns a :class:`GadgetOutput` holding the target instance,
the query it should be asked, and exact size accounting.  ``verify_gadget``
answers the source question with a brute-force oracle, answers the target
query with the library's deciders, and compares.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .circuit import (CNF, QBF, BoolCircuit, CircuitBuilder, CircuitFormula, Formula,
                      SuccinctProblem, count_models, eval_qbf_oracle, expand, formula_circuit,
                      gate_count, instance_length, is_tautology_oracle)
from .core import DecisionProblem, DecisionTable, is_sufficient_oracle, minimum_sufficient_set
from .errors import ShapeError
from .sequential import SequentialProblem, check_seq_sufficiency
from .static import check_anchor, check_sufficiency, find_minimum_sufficient
from .stochastic import check_decisiveness, uniform


@dataclass(frozen=True)
class GadgetOutput:
    kind: str
    instance: Any
    query: tuple[str, Any]
    accounting: dict[str, int]
    source: Any = field(repr=False, default=None)

    def explicit(self):
        """The instance in explicit form (expanding succinct utilities)."""
        if self.kind == "majsat":
            return uniform(expand(self.instance))
        if isinstance(self.instance, SuccinctProblem):
            return expand(self.instance)
        return self.instance


def _formula_inputs(b: CircuitBuilder, f: Formula, offset: int) -> int:
    """Embed ``f`` with variable j wired to coordinate ``offset + j - 1``."""
    c = formula_circuit(f)
    used = sorted({g[1] for g in c.gates if g[0] == "input"})
    return b.embed(c, {j: b.input(offset + j) for j in used})


def _accounting(f_gates: int, sp: SuccinctProblem) -> dict[str, int]:
    return {"input_size": f_gates, "output_gates": gate_count(sp),
            "output_length": instance_length(sp), "coordinates": sp.n}


def gadget_tautology(f: Formula) -> GadgetOutput:
    """Sufficiency of the empty set encodes tautology of ``f``.

    Coordinate 0 selects the reference state (value 1); coordinates 1..n carry
    an assignment.  U(accept) = 1 on the reference and f(x) elsewhere;
    U(reject) = 0 everywhere.
    """
    n = f.num_vars
    b = CircuitBuilder()
    sel = b.input(0)
    body = _formula_inputs(b, f, 1)
    accept = b.build(b.or_(sel, body))
    sp = SuccinctProblem(n + 1, ("accept", "reject"), (((accept, 1),), ()))
    return GadgetOutput("tautology", sp, ("sufficiency", ()),
                        _accounting(formula_circuit(f).size, sp), f)


def _relabel(f: Formula, order: Sequence[int]) -> BoolCircuit:
    """Circuit for ``f`` whose input ``k`` is the variable ``order[k]``."""
    c = formula_circuit(f)
    pos = {v: k for k, v in enumerate(order)}
    b = CircuitBuilder()
    inputs = [b.input(pos[j + 1]) if j + 1 in pos else b.const(0) for j in range(c.num_inputs)]
    return b.build(b.embed(c, inputs))


def gadget_exists_forall(q: QBF) -> GadgetOutput:
    """Anchor sufficiency on the x-coordinates encodes ``exists x forall y. phi``.

    U(YES) = 2 when phi holds, U(NO) = 1 when y is all zeros.  A QBF without
    universal variables gets one dummy universal variable.
    """
    blocks = q.blocks()
    kinds = [k for k, _ in blocks]
    if kinds not in (["e", "a"], ["e"], ["a"], []):
        raise ShapeError(f"expected one existential block then one universal block, got {kinds}")
    xs = [v for k, vs in blocks if k == "e" for v in vs]
    ys = [v for k, vs in blocks if k == "a" for v in vs]
    padded = not ys
    if padded:
        ys = [max(xs + [q.num_vars]) + 1]
    order = xs + ys
    n = len(order)
    phi = _relabel(q.matrix, order)
    b = CircuitBuilder()
    yes = b.build(b.embed(phi, [b.input(k) for k in range(phi.num_inputs)]))
    b = CircuitBuilder()
    no = b.build(b.and_all([b.not_(b.input(len(xs) + j)) for j in range(len(ys))]))
    sp = SuccinctProblem(n, ("YES", "NO"), (((yes, 2),), ((no, 1),)))
    acc = _accounting(formula_circuit(q.matrix).size, sp)
    acc["padded"] = int(padded)
    return GadgetOutput("exists-forall", sp, ("anchor", tuple(range(len(xs)))), acc, q)


def gadget_majsat(f: Formula) -> GadgetOutput:
    """Decisiveness of the empty set under the uniform distribution encodes MAJSAT.

    U(accept) = f(s); both hold actions pay 1/2 - 2^-(n+1), so the expected
    value of accept beats them exactly when at least half the assignments
    satisfy f, and otherwise the two holds tie.
    """
    n = f.num_vars
    if n < 1:
        raise ShapeError("the MAJSAT gadget needs at least one variable")
    b = CircuitBuilder()
    accept = b.build(_formula_inputs(b, f, 0))
    one = BoolCircuit((("const", 1),), 0)
    hold = Fraction(1, 2) - Fraction(1, 2 ** (n + 1))
    sp = SuccinctProblem(n, ("accept", "hold_L", "hold_R"),
                         (((accept, 1),), ((one, hold),), ((one, hold),)))
    return GadgetOutput("majsat", sp, ("decisiveness", ()), _accounting(formula_circuit(f).size, sp), f)


TQBF_ACTIONS = ("go", "bail", "set0", "set1")


def gadget_tqbf(q: QBF) -> GadgetOutput:
    """Sequential sufficiency of the empty set (backup mode) encodes truth of ``q``.

    States are a reference state, a root, an absorbing sink, and one game node
    per (level, partial assignment).  From the root, ``bail`` moves to the
    reference state, worth 1 forever; every other action enters the game.
    Existential nodes let set0/set1 pick the next bit, universal nodes branch
    uniformly, and leaves pay the matrix value once and then fall into the
    sink (worth 0).  With horizon p + 1 only the root sees the game at the
    right time: every other state has all actions tied, and the root ties
    too exactly when the game value is 1, i.e. when ``q`` is true.
    """
    p = len(q.prefix)
    REF, ROOT, SINK = 0, 1, 2

    def node(level: int, bits: int) -> int:
        return 3 + (1 << level) - 1 + bits

    S = 3 + (1 << (p + 1)) - 1
    A = len(TQBF_ACTIONS)
    utilities = [[0] * S for _ in range(A)]
    trans: list[list[tuple]] = [[()] * S for _ in range(A)]
    labels = ["reference", "root", "sink"] + [""] * (S - 3)
    one = Fraction(1)
    for a in range(A):
        utilities[a][REF] = 1
        trans[a][REF] = ((REF, one),)
        trans[a][SINK] = ((SINK, one),)
        trans[a][ROOT] = ((REF, one),) if TQBF_ACTIONS[a] == "bail" else ((node(0, 0), one),)
    assign = [0] * max(q.num_vars, 1)
    for level in range(p + 1):
        for bits in range(1 << level):
            k = node(level, bits)
            labels[k] = f"L{level}:" + "".join(str((bits >> j) & 1) for j in range(level))
            if level == p:
                for j, (_, var) in enumerate(q.prefix):
                    assign[var - 1] = (bits >> j) & 1
                value = q.matrix.evaluate(assign)
                for a in range(A):
                    utilities[a][k] = value
                    trans[a][k] = ((SINK, one),)
                continue
            child0, child1 = node(level + 1, bits), node(level + 1, bits | (1 << level))
            quant = q.prefix[level][0]
            for a, name in enumerate(TQBF_ACTIONS):
                if quant == "a":
                    trans[a][k] = ((child0, Fraction(1, 2)), (child1, Fraction(1, 2)))
                else:
                    trans[a][k] = ((child1 if name == "set1" else child0, one),)
    base = DecisionProblem(TQBF_ACTIONS, (S,), utilities)
    sq = SequentialProblem(base, tuple(tuple(r) for r in trans), p + 1, "backup", tuple(labels))
    acc = {"input_size": len(q.prefix), "output_length": S * A, "coordinates": 1, "states": S}
    return GadgetOutput("tqbf", sq, ("seq-sufficiency", ()), acc, q)


def gadget_setcover(universe: int, sets: Sequence[Sequence[int]]) -> GadgetOutput:
    """Decision table whose sufficient coordinate sets are exactly the covers.

    Each element u contributes a false row (all zeros, optimum ``keep``) and a
    true row whose coordinate i is 1 iff set i contains u (optimum ``flip``).
    """
    if universe < 1:
        raise ShapeError("the universe must be nonempty")
    sets = [tuple(sorted(set(s))) for s in sets]
    for s in sets:
        if any(not 1 <= u <= universe for u in s):
            raise ShapeError(f"set {s} has elements outside 1..{universe}")
    rows, keep, flip = [], [], []
    for u in range(1, universe + 1):
        rows.append((0,) * len(sets))
        keep.append(1), flip.append(0)
        rows.append(tuple(int(u in s) for s in sets))
        keep.append(0), flip.append(1)
    table = DecisionTable(("keep", "flip"), (2,) * len(sets), tuple(rows), (keep, flip))
    acc = {"input_size": universe + sum(len(s) for s in sets), "output_length": len(rows) * (len(sets) + 2),
           "coordinates": len(sets)}
    return GadgetOutput("setcover", table, ("minimum", None), acc, (universe, tuple(sets)))


def gadget_shifted(f: Formula) -> GadgetOutput:
    """Minimum sufficient size is 1 on tautologies and n + 1 otherwise.

    Coordinate 0 is a gate.  Closed (0): every action pays 0, so all tie.
    Open (1): accept pays 2 when f holds; otherwise exactly one of reject or
    abstain pays 1, chosen by the parity of the assignment.  The gate is
    always relevant; each variable is relevant exactly when some assignment
    falsifies f, since flipping any bit of it changes the unique optimum.
    """
    n = f.num_vars
    if n < 1:
        raise ShapeError("the shifted family needs at least one variable")
    b = CircuitBuilder()
    gate = b.input(0)
    accept = b.build(b.and_(gate, _formula_inputs(b, f, 1)))
    b = CircuitBuilder()
    par = b.input(1)
    for j in range(2, n + 1):
        par = b.xor(par, b.input(j))
    gate = b.input(0)
    reject = b.build(b.and_(gate, b.not_(par)))
    abstain = b.build(b.and_(gate, par))
    sp = SuccinctProblem(n + 1, ("accept", "reject", "abstain"),
                         (((accept, 2),), ((reject, 1),), ((abstain, 1),)))
    return GadgetOutput("shifted", sp, ("minimum", None), _accounting(formula_circuit(f).size, sp), f)


def negate_cnf(f: CNF) -> CircuitFormula:
    b = CircuitBuilder()
    out = b.not_(_formula_inputs(b, f, 0))
    return CircuitFormula(f.num_vars, b.build(out))


def gadget_3sat_chain(f: CNF) -> GadgetOutput:
    """3-SAT to TAUTOLOGY (negation) to SUFFICIENCY, with size accounting.

    ``m_in`` is the gate count of the compiled CNF and ``m_out`` the gate
    count of the gadget's utility circuits.
    """
    neg = negate_cnf(f)
    g = gadget_tautology(neg)
    acc = {"m_in": formula_circuit(f).size, "m_out": g.accounting["output_gates"],
           "negation_gates": neg.circuit.size, "output_length": g.accounting["output_length"],
           "coordinates": g.accounting["coordinates"], "variables": f.num_vars,
           "clauses": len(f.clauses)}
    return GadgetOutput("eth-chain", g.instance, g.query, acc, f)


# --------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class GadgetReport:
    kind: str
    source_answer: Any
    target_answer: Any
    passed: bool
    witness: Any = None

    @property
    def label(self) -> str:
        return "PASS" if self.passed else "FAIL"


def min_cover(universe: int, sets: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """Brute-force minimum set cover (indices), or None when infeasible."""
    need = set(range(1, universe + 1))
    for size in range(len(sets) + 1):
        for combo in itertools.combinations(range(len(sets)), size):
            if need <= set().union(*[set(sets[i]) for i in combo]):
                return combo
    return None


def covers(universe: int, sets: Sequence[Sequence[int]], chosen: Sequence[int]) -> bool:
    return set(range(1, universe + 1)) <= set().union(*[set(sets[i]) for i in chosen])


def table_minimum(table: DecisionTable) -> tuple[int, ...] | None:
    """Smallest sufficient coordinate set of a decision table by lattice scan."""
    for size in range(table.n + 1):
        for combo in itertools.combinations(range(table.n), size):
            if is_sufficient_oracle(table, combo).answer:
                return combo
    return None


def verify_gadget(g: GadgetOutput) -> GadgetReport:
    kind = g.kind
    if kind in ("tautology", "eth-chain"):
        f = g.source
        source = is_tautology_oracle(f if kind == "tautology" else negate_cnf(f))
        v = check_sufficiency(g.explicit(), ())
        return GadgetReport(kind, source, v.answer, source == v.answer, v.witness)
    if kind == "exists-forall":
        source = eval_qbf_oracle(g.source)
        v = check_anchor(g.explicit(), g.query[1])
        return GadgetReport(kind, source, v.answer, source == v.answer, v.witness if v.answer else None)
    if kind == "majsat":
        f = g.source
        source = count_models(f) >= 2 ** (f.num_vars - 1)
        v = check_decisiveness(g.explicit(), ())
        return GadgetReport(kind, source, v.answer, source == v.answer, v.witness)
    if kind == "tqbf":
        source = eval_qbf_oracle(g.source)
        v = check_seq_sufficiency(g.instance, (), "fiber")
        return GadgetReport(kind, source, v.answer, source == v.answer, v.witness)
    if kind == "setcover":
        universe, sets = g.source
        table = g.instance
        best = min_cover(universe, sets)
        found = table_minimum(table)
        agree = all(is_sufficient_oracle(table, I).answer == covers(universe, sets, I)
                    for size in range(table.n + 1)
                    for I in itertools.combinations(range(table.n), size))
        size = lambda x: None if x is None else len(x)
        return GadgetReport(kind, size(best), size(found), agree and size(best) == size(found), found)
    if kind == "shifted":
        f = g.source
        expected = 1 if is_tautology_oracle(f) else f.num_vars + 1
        problem = g.explicit()
        got = minimum_sufficient_set(problem)
        lattice = find_minimum_sufficient(problem, problem.n, mode="lattice").witness
        ok = len(got) == expected and tuple(lattice) == tuple(got)
        return GadgetReport(kind, expected, len(got), ok, got)
    raise ValueError(f"unknown gadget kind {kind!r}")
