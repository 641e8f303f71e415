"""Exact coordinate relevance for finite decision problems."""
from .core import (DecisionProblem, DecisionTable, factor_through, is_sufficient_oracle, minimum_sufficient_set,
                   opt, quotient, relevant_coordinates)
from .errors import (BudgetExhausted, CapacityError, DimensionError, DistributionError, FormatError,
                     OutOfGapError, ParseError, RelevanceError, ShapeError, SymmetryError)
from .sequential import SequentialProblem, induced_optimizer
from .static import check_anchor, check_sufficiency, find_minimum_sufficient
from .stochastic import StochasticProblem, check_decisiveness, check_preservation
from .verdict import Assignment, Pair, StepCounter, Verdict

__version__ = "0.1.0"

__all__ = [
    "Assignment", "BudgetExhausted", "CapacityError", "DecisionProblem", "DecisionTable", "DimensionError",
    "DistributionError", "FormatError", "OutOfGapError", "Pair", "ParseError", "RelevanceError",
    "SequentialProblem", "ShapeError", "StepCounter", "StochasticProblem", "SymmetryError", "Verdict",
    "check_anchor", "check_decisiveness", "check_preservation", "check_sufficiency", "factor_through",
    "find_minimum_sufficient", "induced_optimizer", "is_sufficient_oracle", "minimum_sufficient_set", "opt",
    "quotient", "relevant_coordinates",
]
