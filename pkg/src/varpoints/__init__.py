"""Exact counting of rational, Lehmer and visible points on affine
varieties over prime fields, with the asymptotic main terms and error
budgets those counts are measured against."""

from .catalog import CATALOG
from .counting import (
    CongruenceSpec,
    balancing_K,
    classical_lehmer_count,
    classical_lehmer_report,
    count_lehmer,
    count_M,
    count_visible,
    count_visible_lehmer,
    count_visible_via_moebius,
    lehmer_class_ratio_experiment,
    moebius_tail_sum,
)
from .errors import InvariantViolation, ValidationError
from .expsum import (
    complete_variety_sum,
    incomplete_progression_sum,
    katz_bound_check,
    lemma1_total,
    parseval_sum,
    per_u_bound,
    variety_sum_sweep,
)
from .family import FamilySweepReport, fiber_variety, sweep_family
from .numtheory import (
    ArithCache,
    coprime_moebius_sum,
    gcd_tuple,
    is_prime,
    phi_r,
    primes_in_range,
    zeta,
)
from .polynomial import ParseError, Polynomial, parse, unparse
from .region import BoxRegion, progression_count
from .reports import CountReport, ExpSumRecord
from .variety import VarietySpec, count_points, iter_points, points_array

__version__ = "0.1.0"

__all__ = [
    "ArithCache",
    "BoxRegion",
    "CATALOG",
    "CongruenceSpec",
    "CountReport",
    "ExpSumRecord",
    "FamilySweepReport",
    "InvariantViolation",
    "ParseError",
    "Polynomial",
    "ValidationError",
    "VarietySpec",
    "balancing_K",
    "classical_lehmer_count",
    "classical_lehmer_report",
    "complete_variety_sum",
    "coprime_moebius_sum",
    "count_M",
    "count_lehmer",
    "count_points",
    "count_visible",
    "count_visible_lehmer",
    "count_visible_via_moebius",
    "fiber_variety",
    "gcd_tuple",
    "incomplete_progression_sum",
    "is_prime",
    "iter_points",
    "katz_bound_check",
    "lehmer_class_ratio_experiment",
    "lemma1_total",
    "moebius_tail_sum",
    "parse",
    "parseval_sum",
    "per_u_bound",
    "phi_r",
    "points_array",
    "primes_in_range",
    "progression_count",
    "sweep_family",
    "unparse",
    "variety_sum_sweep",
    "zeta",
]
