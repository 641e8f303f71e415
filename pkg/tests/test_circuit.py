import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from relevance_kit.circuit import (CNF, QBF, BoolCircuit, CircuitBuilder, CircuitFormula, SuccinctProblem,
                                   TruthTable, circuit_of, count_models, eval_circuit, eval_qbf_oracle, expand,
                                   formula_circuit, instance_length, is_tautology_oracle, truth_table)
from relevance_kit.dimacs import parse_dimacs, parse_qdimacs, to_dimacs, to_qdimacs
from relevance_kit.errors import CapacityError, FormatError, ParseError
from relevance_kit.reductions import gadget_majsat, gadget_tautology


class TestEval:
    def test_input(self):
        assert eval_circuit(circuit_of([("input", 0)]), (1,)) == 1

    def test_contradiction_and_excluded_middle(self):
        contra = circuit_of([("input", 0), ("not", 0), ("and", 0, 1)])
        lem = circuit_of([("input", 0), ("not", 0), ("or", 0, 1)])
        for s in ((0,), (1,)):
            assert eval_circuit(contra, s) == 0
            assert eval_circuit(lem, s) == 1

    @pytest.mark.parametrize("gates", [
        [("and", 0, 0)],                   # forward reference
        [("input", 0), ("not", 1)],        # self reference
        [("xor", 0, 0)],
        [("const", 2)],
        [("input", -1)],
    ])
    def test_malformed_circuits(self, gates):
        with pytest.raises(FormatError):
            circuit_of(gates)

    def test_bad_output_index(self):
        with pytest.raises(FormatError):
            BoolCircuit((("input", 0),), 3)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 4), st.data())
    def test_truth_table_agrees_with_eval(self, n, data):
        b = CircuitBuilder()
        pool = [b.input(i) for i in range(n)] + [b.const(data.draw(st.integers(0, 1)))]
        for _ in range(data.draw(st.integers(0, 6))):
            op = data.draw(st.sampled_from(["not", "and", "or", "xor"]))
            g = data.draw(st.sampled_from(pool))
            h = data.draw(st.sampled_from(pool))
            pool.append(b.not_(g) if op == "not" else getattr(b, op + ("_" if op in ("and", "or") else ""))(g, h))
        c = b.build(pool[-1])
        table = truth_table(c, n)
        for k, s in enumerate(itertools.product((0, 1), repeat=n)):
            s = s[::-1]
            idx = sum(bit << i for i, bit in enumerate(s))
            assert (table >> idx) & 1 == eval_circuit(c, s)


class TestExpand:
    def test_single_input_term(self):
        sp = SuccinctProblem(1, ("a",), (((circuit_of([("input", 0)]), 1),),))
        assert expand(sp).utilities == ((0, 1),)

    def test_zero_inputs(self):
        one = circuit_of([("const", 1)])
        p = expand(SuccinctProblem(0, ("a", "b"), (((one, 3),), ((one, 2),))))
        assert p.num_states == 1 and p.utilities == ((3,), (2,))

    def test_majsat_gadget_for_x(self):
        p = expand(gadget_majsat(CNF(1, ((1,),))).instance)
        assert p.actions == ("accept", "hold_L", "hold_R")
        assert p.utilities == ((0, 1), (Fraction(1, 4),) * 2, (Fraction(1, 4),) * 2)

    def test_capacity_refusal(self, monkeypatch):
        monkeypatch.setenv("RELEVANCE_KIT_BUDGET", "expand=8")
        sp = SuccinctProblem(3, ("a", "b"), ((), ()))
        with pytest.raises(CapacityError):
            expand(sp)

    def test_wrong_arity_rejected(self):
        with pytest.raises(FormatError):
            SuccinctProblem(1, ("a",), (((circuit_of([("input", 3)]), 1),),))


class TestInstanceLength:
    def test_direct_sum(self):
        two = circuit_of([("input", 0), ("not", 0)])
        three = circuit_of([("input", 1), ("input", 2), ("and", 0, 1)])
        sp = SuccinctProblem(3, ("a", "b"), (((two, 1),), ((three, 1),)))
        assert instance_length(sp) == 10

    def test_empty(self):
        assert instance_length(SuccinctProblem(0, ("a",), ((),))) == 1

    def test_tautology_gadget_accounting(self):
        phi = CircuitFormula(2, circuit_of([("input", 0), ("input", 1), ("not", 1), ("or", 0, 2)]))
        g = gadget_tautology(phi)
        gates = sum(c.size for row in g.instance.terms for c, _ in row)
        assert g.accounting["output_length"] == instance_length(g.instance) == 2 + 3 + gates


class TestDimacs:
    def test_unit_clause(self):
        f = parse_dimacs("p cnf 1 1\n1 0")
        assert f == CNF(1, ((1,),))

    def test_unsatisfiable_pair(self):
        f = parse_dimacs("p cnf 1 2\n1 0\n-1 0")
        assert len(f.clauses) == 2 and count_models(f) == 0

    def test_comments_and_multiline_clauses(self):
        f = parse_dimacs("c hello\np cnf 3 2\n1 -2\n 3 0 2 0\n")
        assert f.clauses == ((1, -2, 3), (2,))

    def test_qdimacs_exists_forall(self):
        q = parse_qdimacs("p cnf 2 2\ne 1 0\na 2 0\n1 2 0\n1 -2 0\n")
        assert q.prefix == (("e", 1), ("a", 2))
        assert eval_qbf_oracle(q)

    @pytest.mark.parametrize("text,line", [
        ("p cnf 1 1\n2 0", 2),
        ("p cnf 1 2\n1 0", 2),
        ("p dnf 1 1\n1 0", 1),
        ("p cnf 1 1\n1 x 0", 2),
        ("p cnf 1 1\n1", 2),
    ])
    def test_parse_errors_carry_line_numbers(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_dimacs(text)
        assert info.value.line == line

    def test_missing_header(self):
        with pytest.raises(ParseError):
            parse_dimacs("c only a comment\n")

    def test_quantifier_after_matrix(self):
        with pytest.raises(ParseError):
            parse_qdimacs("p cnf 2 1\n1 2 0\ne 1 0\n")

    def test_roundtrip(self):
        f = CNF(3, ((1, -2), (3,), (-1, 2, -3)))
        assert parse_dimacs(to_dimacs(f)) == f
        q = QBF((("a", 1), ("e", 2)), CNF(2, ((1, 2), (-1, -2))))
        assert parse_qdimacs(to_qdimacs(q)) == q


class TestOracles:
    def test_excluded_middle_is_tautology(self):
        assert is_tautology_oracle(CNF(1, ((1, -1),)))

    def test_single_variable_is_not(self):
        assert not is_tautology_oracle(CNF(1, ((1,),)))

    def test_forall_exists_xor(self):
        xor = TruthTable(2, 0b0110)
        assert eval_qbf_oracle(QBF((("a", 1), ("e", 2)), xor))
        assert not eval_qbf_oracle(QBF((("e", 2), ("a", 1)), xor))

    def test_unquantified_matrix_variable_rejected(self):
        with pytest.raises(FormatError):
            QBF((("a", 1),), TruthTable(2, 0b0110))

    @pytest.mark.parametrize("bits", range(16))
    def test_truth_table_circuit_matches_table(self, bits):
        f = TruthTable(2, bits)
        c = formula_circuit(f)
        for x in itertools.product((0, 1), repeat=2):
            assert eval_circuit(c, x) == f.evaluate(x)

    def test_cnf_circuit_matches_cnf(self):
        f = CNF(3, ((1, -2), (2, 3), (-1, -3)))
        c = formula_circuit(f)
        for x in itertools.product((0, 1), repeat=3):
            assert eval_circuit(c, x) == f.evaluate(x)

    def test_oracle_capacity(self, monkeypatch):
        monkeypatch.setenv("RELEVANCE_KIT_BUDGET", "formula=2")
        with pytest.raises(CapacityError):
            is_tautology_oracle(CNF(3, ()))
