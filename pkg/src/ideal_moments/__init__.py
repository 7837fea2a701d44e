"""Ramanujan sums over ideals of number fields and their moments.

Supported fields are Q, quadratic fields Q(sqrt{d}) and cyclotomic fields
Q(zeta{m}); ideals are handled through their prime-ideal factorizations, so
no algebraic integers are ever constructed.
"""

from .analytic import AnalyticConstants, constants, dedekind_zeta, main_term_first, main_term_second
from .arith import ZParam, moebius, ramanujan_sum, sigma_z, verify_lemma21, verify_lemma22, verify_lemma23_local
from .errors import (
    CacheError,
    ConfigError,
    DegenerateInputError,
    FieldMismatchError,
    IdealMomentsError,
    PoleError,
    ResourceLimitError,
    TableCoverageError,
)
from .field import NumberField, split_prime
from .ideals import Ideal, PrimeIdeal, enumerate_ideals, ideal_count_table
from .moments import MomentResult, first_moment, inner_sum, moment_sums, second_moment

__version__ = "0.1.0"

__all__ = [
    "AnalyticConstants", "CacheError", "ConfigError", "DegenerateInputError", "FieldMismatchError",
    "Ideal", "IdealMomentsError", "MomentResult", "NumberField", "PoleError", "PrimeIdeal",
    "ResourceLimitError", "TableCoverageError", "ZParam", "constants", "dedekind_zeta",
    "enumerate_ideals", "first_moment", "ideal_count_table", "inner_sum", "main_term_first",
    "main_term_second", "moebius", "moment_sums", "ramanujan_sum", "second_moment", "sigma_z",
    "split_prime", "verify_lemma21", "verify_lemma22", "verify_lemma23_local",
]
