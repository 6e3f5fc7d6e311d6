"""Explicit sieve bounds and exhaustive checks for almost primes between consecutive squares."""

from .errors import (
    CheckpointError,
    ContractError,
    DomainError,
    LedgerViolation,
    PreconditionError,
    RegimeError,
    SieveKitError,
)
from .kuhn import SiftingInstance, kuhn_lower, scan_parameters, theorem_pipeline
from .linear_sieve import PUBLISHED_PARAMS, SieveParams, lower_bound_S, upper_sum_Sq
from .primes import PrimeTable, factor_interval, mertens_product, primes_up_to
from .report import emit_report
from .verifier import scan_epsilon_case1, verify_4p, verify_interval, verify_mertens

__version__ = "0.1.0"
