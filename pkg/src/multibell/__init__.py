"""Multi-component Bell functions for (n,2,d) scenarios with prime d.

Bell functions with vector coefficients, the two-to-one iteration that
builds n-party functions, exact LHV bounds, GHZ violations under
multiport beam splitters, the equivalence group and the orbit search.
"""

from .algebra import Coefficient, OutcomeVector, outcome_vector
from .bell import (
    BellFunction,
    ProbabilityForm,
    cglmp_function,
    iterate,
    mabk_function,
    parse_probability_form,
    restrict,
    to_probability_form,
)
from .lhv import LhvReport, lhv_bound
from .quantum import QuantumReport, critical_visibility, optimize_phases
from .symmetry import Transformation, apply, canonical_form, equivalent, orbit, parse_recipe

__version__ = "0.1.0"

__all__ = [
    "BellFunction",
    "Coefficient",
    "LhvReport",
    "OutcomeVector",
    "ProbabilityForm",
    "QuantumReport",
    "Transformation",
    "apply",
    "canonical_form",
    "cglmp_function",
    "critical_visibility",
    "equivalent",
    "iterate",
    "lhv_bound",
    "mabk_function",
    "optimize_phases",
    "orbit",
    "outcome_vector",
    "parse_probability_form",
    "parse_recipe",
    "restrict",
    "to_probability_form",
]
