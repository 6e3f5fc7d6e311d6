"""Sieve special functions and classical explicit bounds.

F and f are only available in closed form on the ranges where they are
elementary (``1 <= s <= 3`` and ``2 <= s <= 4``); outside them we raise
rather than extrapolate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DomainError, RegimeError

EULER_GAMMA_30 = "0.577215664901532860606512090082"
EULER_GAMMA = float(EULER_GAMMA_30)
EXP_GAMMA = math.exp(EULER_GAMMA)
EXP_NEG_GAMMA = math.exp(-EULER_GAMMA)

# Mertens band regimes
COMPUTED_LIMIT = 4 * 10**9
ASYMPTOTIC_START = math.exp(22)
MERTENS_ASYM_CONST = 0.841

V_LOWER_START = 285
PI_BOUND_START = 10**7


def h_of(s: float) -> float:
    """Piecewise weight ``h(s)`` of the explicit linear sieve error term."""
    if s < 1:
        raise DomainError(f"h(s) needs s >= 1, got {s}")
    if s <= 2:
        return math.exp(-2.0)
    if s <= 3:
        return math.exp(-s)
    return 3.0 * math.exp(-s) / s


def F_of(s: float) -> float:
    """Upper sieve function ``F(s) = 2e^γ/s`` on ``[1, 3]``."""
    if not 1 <= s <= 3:
        raise DomainError(f"closed form for F needs 1 <= s <= 3, got {s}")
    return 2.0 * EXP_GAMMA / s


def f_of(s: float) -> float:
    """Lower sieve function ``f(s) = 2e^γ log(s-1)/s`` on ``[2, 4]``."""
    if not 2 <= s <= 4:
        raise DomainError(f"closed form for f needs 2 <= s <= 4, got {s}")
    return 2.0 * EXP_GAMMA * math.log(s - 1.0) / s


def C_of(s: float) -> float:
    """``C(s) = (2e^γ log(s-1) - 0.73 e^(2-s)) / s`` for ``3 <= s <= 4``."""
    if not 3 <= s <= 4:
        raise DomainError(f"C(s) is only used for 3 <= s <= 4, got {s}")
    return (2.0 * EXP_GAMMA * math.log(s - 1.0) - 0.73 * math.exp(2.0 - s)) / s


def V_band(z: float) -> Tuple[Optional[float], float]:
    """Bounds for ``prod_{p<z} (1 - 1/p)``.

    The upper bound holds for every ``z > 1``; the lower one is only returned
    (non-None) from ``z >= 285``.
    """
    L = math.log(z)
    main = EXP_NEG_GAMMA / L
    corr = 1.0 / (2.0 * L * L)
    lower = main * (1.0 - corr) if z >= V_LOWER_START else None
    return lower, main * (1.0 + corr)


@dataclass(frozen=True)
class MertensBand:
    """Where ``I(x) = prod_{p<=x} (1 - 1/p)^(-1)`` is known to lie."""

    x: float
    lower: float
    upper: float
    regime: str  # "computational", "asymptotic" or "both"
    strict: bool = True

    def contains(self, value: float) -> bool:
        if self.strict:
            return self.lower < value < self.upper
        return self.lower <= value <= self.upper


def _computational(x: float) -> Tuple[float, float]:
    base = EXP_GAMMA * math.log(x)
    return base, base + 2.0 * EXP_GAMMA / math.sqrt(x)


def _asymptotic(x: float) -> Tuple[float, float]:
    base = EXP_GAMMA * math.log(x)
    t = MERTENS_ASYM_CONST / math.log(x) ** 3
    return base / (1.0 + t), base / (1.0 - t)


def mertens_band(x: float) -> MertensBand:
    """Explicit band for ``I(x)`` in whichever regime(s) cover ``x``."""
    comp = 2 <= x <= COMPUTED_LIMIT
    asym = x >= ASYMPTOTIC_START
    if comp and asym:
        a, b = _computational(x)
        c, d = _asymptotic(x)
        # mert1 is strict, mert2 is not; strictness follows the binding side
        return MertensBand(x, max(a, c), min(b, d), "both", strict=True)
    if comp:
        lo, hi = _computational(x)
        return MertensBand(x, lo, hi, "computational", strict=True)
    if asym:
        lo, hi = _asymptotic(x)
        return MertensBand(x, lo, hi, "asymptotic", strict=False)
    raise RegimeError(f"no explicit Mertens band is known at x = {x}")


def mert1_holds(x: float, product: float) -> Tuple[bool, bool]:
    """Evaluate both sides of the computational band at any ``x > 1``.

    Unlike :func:`mertens_band` this does not check the regime, so it can be
    used to exhibit failures below 2.
    """
    lo, hi = _computational(x)
    return lo < product, product < hi


def pi_upper(y: float) -> float:
    """``pi(y) < 1.1 y / log y`` for ``y >= 10^7``."""
    if y < PI_BOUND_START:
        raise DomainError(f"pi bound needs y >= 1e7, got {y}")
    return 1.1 * y / math.log(y)


def squarefree_upper(x: float) -> float:
    """Upper bound ``(6/π²) x + 0.5 sqrt(x)`` for the squarefree count, x >= 10."""
    if x < 10:
        raise DomainError(f"squarefree bound needs x >= 10, got {x}")
    return 6.0 / math.pi**2 * x + 0.5 * math.sqrt(x)


def reciprocal_sum_upper(a: float, b: float) -> float:
    """Upper bound for ``sum_{a<=p<b} 1/p`` valid for ``b > a > 1000``."""
    if not b > a > 1000:
        raise DomainError(f"reciprocal sum bound needs b > a > 1000, got a={a}, b={b}")
    return math.log(math.log(b)) - math.log(math.log(a)) + 5.0 / math.log(a) ** 3
