from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import coord_sets, distributions, problems, stochastic_problems, worked_stochastic, xor_problem
from relevance_kit.circuit import CNF, TruthTable
from relevance_kit.core import DecisionProblem, is_sufficient_oracle, project, relevant_coordinates
from relevance_kit.errors import DistributionError
from relevance_kit.io import load
from relevance_kit.reductions import gadget_majsat
from relevance_kit.static import check_anchor, check_sufficiency, find_minimum_sufficient
from relevance_kit.stochastic import (StochasticProblem, check_decisiveness, check_preservation,
                                      check_stoch_anchor, check_stoch_anchor_preservation, fiber_optimizer,
                                      find_stoch_minimum, point_mass, stochastic_partition, uniform)


class TestModel:
    @pytest.mark.parametrize("dist", [(Fraction(1, 2), Fraction(1, 3)), (2, -1), (1,)])
    def test_bad_distributions(self, dist):
        with pytest.raises(DistributionError):
            StochasticProblem(DecisionProblem(("a",), (2,), [[0, 0]]), dist)

    def test_support(self):
        sp = point_mass(xor_problem(), 2)
        assert sp.support == (2,) and not sp.full_support


class TestFiberOptimizer:
    def test_worked_example_expectations(self):
        entry = fiber_optimizer(worked_stochastic(), ()).entries[()]
        assert entry.expected == (1, 2) and entry.optset == (1,)

    @pytest.mark.parametrize("k", range(4))
    def test_point_mass_recovers_pointwise(self, k):
        p = xor_problem()
        fo = fiber_optimizer(point_mass(p, k), ())
        assert fo.optset(()) == p.opt_table[k]

    def test_uniform_xor_ties_at_half(self):
        fo = fiber_optimizer(uniform(xor_problem()), (0,))
        for entry in fo.entries.values():
            assert entry.expected == (Fraction(1, 2), Fraction(1, 2))

    @settings(max_examples=100, deadline=None)
    @given(stochastic_problems(), st.data())
    def test_conditional_expectation_formula(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        fo = fiber_optimizer(sp, I)
        for alpha, entry in fo.entries.items():
            ks = [k for k, s in enumerate(sp.base.states) if project(s, I) == alpha]
            mass = sum(sp.dist[k] for k in ks)
            assert mass > 0 and entry.mass == mass
            for a, row in enumerate(sp.base.utilities):
                assert entry.expected[a] == sum(sp.dist[k] * row[k] for k in ks) / mass


class TestPreservation:
    def test_worked_example_fails(self):
        v = check_preservation(worked_stochastic(), ())
        assert not v.answer and v.witness.state == (0,) and v.witness.pointwise_optset == (0,)

    def test_uniform_xor_both_readings(self):
        sp = uniform(xor_problem())
        assert not check_preservation(sp, (0,)).answer
        assert check_preservation(sp, (0,), reading="inclusive").answer

    @settings(max_examples=200, deadline=None)
    @given(stochastic_problems(full_support=True), st.data())
    def test_full_support_equivalence(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        assert check_preservation(sp, I).answer == is_sufficient_oracle(sp.base, I).answer

    @settings(max_examples=200, deadline=None)
    @given(stochastic_problems(), st.data())
    def test_preservation_implies_static_and_relevance_containment(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        if check_preservation(sp, I, strict=True).answer:
            assert is_sufficient_oracle(sp.base, I).answer
            assert set(relevant_coordinates(sp.base)) <= set(I)

    @settings(max_examples=200, deadline=None)
    @given(stochastic_problems(), st.data())
    def test_positive_fibers_transfer_static_sufficiency(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        masses = {}
        for k, s in enumerate(sp.base.states):
            key = project(s, I)
            masses[key] = masses.get(key, 0) + sp.dist[k]
        if is_sufficient_oracle(sp.base, I).answer and all(m > 0 for m in masses.values()):
            assert check_preservation(sp, I, strict=True).answer

    @settings(max_examples=200, deadline=None)
    @given(stochastic_problems(), st.data())
    def test_singleton_constant_optima_transfer_for_any_distribution(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        singleton = all(len(o) == 1 for o in sp.base.opt_table)
        if singleton and is_sufficient_oracle(sp.base, I).answer:
            assert check_preservation(sp, I).answer

    @settings(max_examples=150, deadline=None)
    @given(stochastic_problems(full_support=True), st.data())
    def test_quotient_equivalence_under_full_support(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        if check_preservation(sp, I).answer:
            assert stochastic_partition(sp, I) == sp.base.opt_table

    def test_static_but_not_stochastic_fixture(self, fixtures):
        sp = load(fixtures / "static_not_stochastic.json")
        assert check_sufficiency(sp.base, (0,)).answer
        strict = check_preservation(sp, (0,), strict=True)
        assert not strict.answer and strict.witness.fiber_optset is None
        lenient = check_preservation(sp, (0,))
        assert lenient.answer and "zero-mass" in lenient.note


class TestDecisiveness:
    def test_worked_example(self):
        assert check_decisiveness(worked_stochastic(), ()).answer

    def test_uniform_xor(self):
        assert not check_decisiveness(uniform(xor_problem()), (0,)).answer

    @pytest.mark.parametrize("bits,decisive", [(0b10, True), (0b00, False), (0b11, True)])
    def test_majsat_gadget_single_variable(self, bits, decisive):
        sp = gadget_majsat(TruthTable(1, bits)).explicit()
        assert check_decisiveness(sp, ()).answer == decisive

    @settings(max_examples=150, deadline=None)
    @given(stochastic_problems(), st.data())
    def test_decisive_implies_anchor(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        v = check_decisiveness(sp, I)
        assert v.steps <= v.bound
        if v.answer:
            assert check_stoch_anchor(sp, I).answer


class TestStochAnchor:
    def test_decisive_instance(self):
        v = check_stoch_anchor(worked_stochastic(), ())
        assert v.answer and v.witness[1] == 1

    def test_all_ties(self):
        sp = uniform(DecisionProblem(("a", "b"), (2,), [[0, 0], [0, 0]]))
        assert not check_stoch_anchor(sp, ()).answer

    def test_majsat_minority(self):
        sp = gadget_majsat(CNF(1, ((1,), (-1,)))).explicit()
        assert not check_stoch_anchor(sp, ()).answer


class TestStochMinimum:
    def test_majsat_majority_k0(self):
        sp = gadget_majsat(CNF(2, ((1, 2),))).explicit()
        v = find_stoch_minimum(sp, 0, "decisiveness")
        assert v.answer and v.witness == ()

    @settings(max_examples=100, deadline=None)
    @given(stochastic_problems(full_support=True), st.integers(0, 3))
    def test_full_support_preservation_matches_static(self, sp, k):
        a = find_stoch_minimum(sp, k, "preservation")
        b = find_minimum_sufficient(sp.base, k)
        assert a.answer == b.answer

    @settings(max_examples=100, deadline=None)
    @given(stochastic_problems())
    def test_k_equals_n_always_preserves(self, sp):
        assert find_stoch_minimum(sp, sp.base.n, "preservation").answer


class TestAnchorPreservation:
    @settings(max_examples=150, deadline=None)
    @given(stochastic_problems(full_support=True), st.data())
    def test_full_support_static_anchor_transfers(self, sp, data):
        I = data.draw(coord_sets(sp.base.n))
        if check_anchor(sp.base, I).answer:
            assert check_stoch_anchor_preservation(sp, I).answer

    def test_worked_example(self):
        assert not check_stoch_anchor_preservation(worked_stochastic(), ()).answer

    @pytest.mark.parametrize("k", range(4))
    def test_point_mass(self, k):
        p = DecisionProblem.from_function(("a", "b"), (2, 2), lambda a, s: int(a == s[0]) + (a == 0) * s[1])
        sp = point_mass(p, k)
        fiber = fiber_optimizer(sp, ()).optset(())
        expected = all(p.opt_table[j] == fiber for j in range(p.num_states))
        assert check_stoch_anchor_preservation(sp, ()).answer == expected


def test_matching_first_coordinate_is_decisive_and_preserving():
    # U(a, s) = [a == s_0] under uniform P with I = {0}: both predicates hold
    sp = uniform(DecisionProblem.from_function(("a0", "a1"), (2, 2), lambda a, s: int(a == s[0])))
    assert check_decisiveness(sp, (0,)).answer
    assert check_preservation(sp, (0,)).answer
