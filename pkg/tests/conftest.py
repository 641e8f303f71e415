from __future__ import annotations

import itertools
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from relevance_kit.core import DecisionProblem
from relevance_kit.stochastic import StochasticProblem

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def xor_problem() -> DecisionProblem:
    return DecisionProblem.from_function(("a0", "a1"), (2, 2), lambda a, s: int(a == (s[0] ^ s[1])))


def worked_stochastic() -> StochasticProblem:
    base = DecisionProblem(("a", "b"), (2,), [[2, 0], [1, 3]])
    return StochasticProblem(base, (Fraction(1, 2), Fraction(1, 2)))


def subsets(n: int):
    for size in range(n + 1):
        yield from itertools.combinations(range(n), size)


@st.composite
def problems(draw, max_n: int = 3, max_domain: int = 3, max_actions: int = 3, values=(0, 1, 2)):
    n = draw(st.integers(0, max_n))
    domains = tuple(draw(st.integers(1, max_domain)) for _ in range(n))
    size = 1
    for d in domains:
        size *= d
    num_actions = draw(st.integers(1, max_actions))
    rows = [[draw(st.sampled_from(values)) for _ in range(size)] for _ in range(num_actions)]
    return DecisionProblem(tuple(f"a{j}" for j in range(num_actions)), domains, rows)


@st.composite
def coord_sets(draw, n: int):
    return tuple(i for i in range(n) if draw(st.booleans()))


@st.composite
def distributions(draw, size: int, full_support: bool = False):
    weights = [draw(st.integers(1 if full_support else 0, 3)) for _ in range(size)]
    if not any(weights):
        weights[draw(st.integers(0, size - 1))] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


@st.composite
def stochastic_problems(draw, full_support: bool = False, max_n: int = 3):
    base = draw(problems(max_n=max_n))
    return StochasticProblem(base, draw(distributions(base.num_states, full_support)))
