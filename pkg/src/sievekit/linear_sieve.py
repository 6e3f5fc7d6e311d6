"""Explicit linear-sieve bounds specialised to ``A(N)`` with ``g(d) = 1/d``.

The lower bound for ``S(A, P, z)`` and the upper bound for
``sum_{z<=q<y} S(A_q, P, z)`` are evaluated from their general formulas;
rounded constants never enter the bound path, they only appear in the
ledger as cross-checks (see :mod:`sievekit.kuhn`).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

import numpy as np
from scipy import integrate

from . import bounds
from .bounds import EXP_GAMMA, EXP_NEG_GAMMA, f_of, h_of
from .errors import DomainError, PreconditionError
from .primes import interval_max, squarefree_count

EPSILON_MAX = 1.0 / 74
# smallest z for which epsilon = 1.97e-3 (Q = 2) is certified
EPSILON_Z_MIN = 3024
EXACT_SQUAREFREE_MAX = 10**9


@dataclass(frozen=True)
class SieveParams:
    """Parameter bundle of the weighted sieve; defaults are the published choice."""

    k1: float = 8
    k2: int = 4
    alpha: float = 0.07
    s: float = 3.3
    epsilon: float = 1.97e-3
    Q: int = 2
    C1: float = 121
    C2: float = 122
    c1: float = 0.01
    c2: float = 0.07

    def __post_init__(self):
        if not (self.k1 >= self.k2 >= 2):
            raise DomainError(f"need k1 >= k2 >= 2, got k1={self.k1}, k2={self.k2}")
        if int(self.k2) != self.k2:
            raise DomainError("k2 must be an integer")
        if not 2 < self.k1 <= 8:
            raise DomainError(f"need 2 < k1 <= 8, got {self.k1}")
        if not 0 < self.alpha < self.alpha_max:
            raise DomainError(f"need 0 < alpha < {self.alpha_max:.6g}, got {self.alpha}")
        if not 0 < self.epsilon <= EPSILON_MAX:
            raise DomainError(f"need 0 < epsilon <= 1/74, got {self.epsilon}")
        if self.Q < 1 or min(self.C1, self.C2, self.c1, self.c2) <= 0:
            raise DomainError("Q, C1, C2, c1, c2 must be positive")

    @property
    def alpha_max(self) -> float:
        return 0.5 - 1.0 / self.k1 - 1.0 / self.k2

    @property
    def k_alpha(self) -> float:
        return self.k1 * (0.5 - 1.0 / self.k2 - self.alpha)

    def replace(self, **changes) -> "SieveParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


PUBLISHED_PARAMS = SieveParams()


@dataclass(frozen=True)
class IntervalGeometry:
    N: int
    X: int
    size: int
    sqrt_N: float
    log_X: float
    z: float
    y: float


def geometry(N: int, k1: float, k2: float) -> IntervalGeometry:
    """``X = max A(N)``, ``|A(N)|``, ``z = X^(1/k1)`` and ``y = X^(1/k2)``."""
    N = int(N)
    X = interval_max(N)
    log_X = math.log(X)
    return IntervalGeometry(
        N=N,
        X=X,
        size=X - N,
        sqrt_N=math.sqrt(N),
        log_X=log_X,
        z=math.exp(log_X / k1),
        y=math.exp(log_X / k2),
    )


@dataclass
class ConditionReport:
    values: Dict[str, float]
    checks: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> List[str]:
        return [k for k, v in self.checks.items() if not v]


def check_conditions(params: SieveParams, z: float, D: Optional[float] = None) -> ConditionReport:
    """Side conditions of the linear-sieve lower bound at level ``z``.

    ``D`` defaults to ``z ** params.s``; when given, ``s`` is recomputed as
    ``log D / log z``.
    """
    if D is None:
        D, s = z**params.s, params.s
    else:
        s = math.log(D) / math.log(z)
    try:
        f = f_of(s)
    except DomainError:
        f = 0.0 if s <= 2 else float("nan")
    try:
        penalty = params.epsilon * params.C2 * math.e**2 * h_of(s)
    except DomainError:
        penalty = float("inf")
    checks = {
        "D >= z^2": D >= z * z * (1 - 1e-15),
        "f(s) > eps*C2*e^2*h(s)": f > penalty,
        "z >= 3024 (epsilon certified)": z >= EPSILON_Z_MIN,
        "z >= 285 (V lower band)": z >= bounds.V_LOWER_START,
        "epsilon <= 1/74": params.epsilon <= EPSILON_MAX,
    }
    return ConditionReport({"z": z, "D": D, "s": s, "f(s)": f, "penalty": penalty}, checks)


class LowerBoundS(NamedTuple):
    value: float
    main_term: float
    squarefree_term: float
    squarefree_mode: str


def squarefree_below(x: float, mode: str = "auto") -> tuple:
    """``sum_{d < x} mu(d)^2``: exact count or the analytic upper bound."""
    if mode == "auto":
        mode = "exact" if x <= EXACT_SQUAREFREE_MAX else "analytic"
    if mode == "exact":
        return float(squarefree_count(math.ceil(x) - 1)), "exact"
    if mode == "analytic":
        return bounds.squarefree_upper(x), "analytic"
    raise ValueError(f"unknown squarefree mode {mode!r}")


def lower_bound_S(N: int, params: SieveParams = PUBLISHED_PARAMS, squarefree: str = "auto") -> LowerBoundS:
    """Lower bound for ``S(A(N), P, z)`` with ``z = X^(1/k1)``, ``D = z^s``."""
    g = geometry(N, params.k1, params.k2)
    report = check_conditions(params, g.z)
    if not report.ok:
        raise PreconditionError("sieve conditions fail: " + "; ".join(report.failures()))
    s = params.s
    log_z = math.log(g.z)
    density = EXP_NEG_GAMMA * (2.0 * g.sqrt_N - 1.0) / log_z * (1.0 - 1.0 / (2.0 * log_z**2))
    main = density * (f_of(s) - params.epsilon * params.C2 * math.e**2 * h_of(s))
    sqf, mode = squarefree_below(params.Q * g.z**s, squarefree)
    return LowerBoundS(main - sqf, main, sqf, mode)


class UpperSum(NamedTuple):
    M1: float
    M2: float
    E: float
    leading: float
    total: float


def leading_factor(N: int, params: SieveParams = PUBLISHED_PARAMS) -> float:
    """``k1 e^(-γ) (1 + k1^2 / (2 log^2 X))``."""
    log_X = math.log(interval_max(N))
    return params.k1 * EXP_NEG_GAMMA * (1.0 + params.k1**2 / (2.0 * log_X**2))


def upper_sum_Sq(N: int, params: SieveParams = PUBLISHED_PARAMS) -> UpperSum:
    """Upper bound for ``sum_{z<=q<y} S(A_q, P, z)`` split as ``M1, M2, E``."""
    k1, k2, a = params.k1, params.k2, params.alpha
    g = geometry(N, k1, k2)
    if not g.y > g.z > 1000:
        raise PreconditionError(f"need y > z > 1000, got z={g.z:.6g}, y={g.y:.6g}")
    ka = params.k_alpha
    # largest s_q must stay inside the closed-form range of F
    if k1 * (0.5 - a) - 1.0 > 3.0:
        raise PreconditionError("s_q leaves [1, 3]")
    L = g.log_X
    eC1h = params.epsilon * params.C1 * math.e**2 * h_of(ka)
    ratio = (k1 - 2 * k1 * a - 2) / (k2 - 2 * k2 * a - 2)
    recip = math.log(k1 / k2) + 5.0 * k1**3 / L**3
    M1 = (2.0 * g.sqrt_N / L) * (
        (2.0 * EXP_GAMMA / k1) * (math.log(ratio) / (0.5 - a) + 5.0 * k1**4 / (ka * L**3))
        + eC1h * recip
    )
    M2 = g.y / L * (2.0 * EXP_GAMMA / ka + eC1h)
    E = params.Q * math.exp((0.5 - a) * L) * recip
    lead = k1 * EXP_NEG_GAMMA * (1.0 + k1**2 / (2.0 * L**2))
    return UpperSum(M1, M2, E, lead, lead * (M1 + M2) + E)


def m1_displayed_coefficient(N: int) -> float:
    """The ``M1`` bracket exactly as printed for k1=8, k2=4, alpha=0.07
    (``log 3.4``, ``(log X)^2`` and the rounded 0.24), times ``log X/sqrt N``."""
    L = math.log(interval_max(N))
    return 2.0 * (
        EXP_GAMMA / 4.0 * (math.log(3.4) / 0.43 + 20480.0 / (1.44 * L**2))
        + 0.24 * (math.log(2.0) + 2560.0 / L**3)
    )


def logdt_closed_form(log_X: float, k1: float, k2: float, alpha: float) -> float:
    """Closed form of ``int_z^y dt / (t log t log(X^(1/2-alpha)/t))``."""
    ratio = (k1 - 2 * k1 * alpha - 2) / (k2 - 2 * k2 * alpha - 2)
    return math.log(ratio) / ((0.5 - alpha) * log_X)


def logdt_quadrature(log_X: float, k1: float, k2: float, alpha: float) -> float:
    """Same integral by adaptive quadrature in ``t`` over log-spaced pieces."""
    z = math.exp(log_X / k1)
    y = math.exp(log_X / k2)
    top = (0.5 - alpha) * log_X

    def integrand(t):
        lt = math.log(t)
        return 1.0 / (t * lt * (top - lt))

    edges = np.geomspace(z, y, 65)
    edges[0], edges[-1] = z, y
    pieces = [
        integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ]
    return math.fsum(pieces)


@dataclass
class LedgerEntry:
    name: str
    computed: float
    paper_value: float
    direction: str  # "upper": computed <= paper_value, "lower": computed >= paper_value

    @property
    def ok(self) -> bool:
        if self.direction == "upper":
            return self.computed <= self.paper_value
        return self.computed >= self.paper_value

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "computed": self.computed,
            "paper_value": self.paper_value,
            "direction": self.direction,
            "ok": self.ok,
        }


@dataclass
class BoundBreakdown:
    """Every intermediate quantity of the ``r_4`` lower bound at one ``N``."""

    N: int
    X: int
    z: float
    y: float
    D: float
    params: SieveParams
    S_lower: float
    squarefree_mode: str
    M1: float
    M2: float
    E_remainder: float
    leading: float
    sum_upper: float
    kuhn_remainder: float
    r4_lower: float
    constant_ledger: List[LedgerEntry] = field(default_factory=list)
    published_chain_r4: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def ledger_ok(self) -> bool:
        return all(e.ok for e in self.constant_ledger)

    @property
    def certified(self) -> bool:
        """``r4_lower > 0``: some ``a`` in ``A(N)`` has at most ``k2`` prime factors."""
        return self.r4_lower > 0 and self.ledger_ok
