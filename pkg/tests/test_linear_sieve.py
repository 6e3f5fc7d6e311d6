import math

import mpmath
import pytest

from sievekit.errors import DomainError, PreconditionError
from sievekit.linear_sieve import (
    PUBLISHED_PARAMS,
    LedgerEntry,
    SieveParams,
    check_conditions,
    geometry,
    leading_factor,
    logdt_closed_form,
    logdt_quadrature,
    lower_bound_S,
    m1_displayed_coefficient,
    squarefree_below,
    upper_sum_Sq,
)
from sievekit.primes import squarefree_count

N0 = 198 * 10**26 + 1


def test_params_defaults_and_validation():
    p = SieveParams()
    assert p.alpha_max == pytest.approx(0.125)
    assert p.k_alpha == pytest.approx(8 * 0.18)
    with pytest.raises(DomainError):
        SieveParams(alpha=0.125)
    with pytest.raises(DomainError):
        SieveParams(epsilon=0.02)
    with pytest.raises(DomainError):
        SieveParams(k1=3, k2=4)
    assert p.replace(s=3.5).s == 3.5


def test_geometry_at_threshold():
    g = geometry(N0, 8, 4)
    assert g.X == N0 + math.isqrt(4 * N0)
    assert g.z == pytest.approx(3444.1587, rel=1e-7)
    assert g.y == pytest.approx(1.18622e7, rel=1e-5)


def test_conditions():
    rep = check_conditions(PUBLISHED_PARAMS, 3444.16)
    assert rep.ok, rep.failures()
    bad = check_conditions(PUBLISHED_PARAMS, 3000.0)
    assert bad.failures() == ["z >= 3024 (epsilon certified)"]
    low_s = check_conditions(PUBLISHED_PARAMS, 5000.0, D=5000.0**1.5)
    assert "D >= z^2" in low_s.failures()


def test_lower_bound_matches_mpmath():
    p = PUBLISHED_PARAMS
    res = lower_bound_S(N0, p)
    with mpmath.workdps(40):
        N = mpmath.mpf(N0)
        X = N + math.isqrt(4 * N0)
        lz = mpmath.log(X) / 8
        eg = mpmath.exp(mpmath.euler)
        s = mpmath.mpf("3.3")
        f = 2 * eg * mpmath.log(s - 1) / s
        h = 3 * mpmath.exp(-s) / s
        main = (2 * mpmath.sqrt(N) - 1) / (eg * lz) * (1 - 1 / (2 * lz**2)) * (f - mpmath.mpf("1.97e-3") * 122 * mpmath.e**2 * h)
        D2 = 2 * mpmath.exp(lz * s)
        sqf = 6 / mpmath.pi**2 * D2 + mpmath.sqrt(D2) / 2
    assert res.squarefree_mode == "analytic"
    assert res.main_term == pytest.approx(float(main), rel=1e-12)
    assert res.squarefree_term == pytest.approx(float(sqf), rel=1e-12)
    assert res.value > 0


def test_squarefree_modes_agree_where_both_exist():
    exact, m1 = squarefree_below(10**6 + 0.5, "exact")
    analytic, m2 = squarefree_below(10**6 + 0.5, "analytic")
    assert (m1, m2) == ("exact", "analytic")
    assert exact == squarefree_count(10**6)
    assert exact <= analytic
    assert squarefree_below(1e10)[1] == "analytic"


def test_lower_bound_refuses_failed_conditions():
    with pytest.raises(PreconditionError, match="3024"):
        lower_bound_S(10**20, PUBLISHED_PARAMS)


def test_upper_sum_coefficients_at_threshold():
    up = upper_sum_Sq(N0)
    g = geometry(N0, 8, 4)
    L, r = g.log_X, g.sqrt_N
    assert up.leading == pytest.approx(4.5255335, rel=1e-7)
    assert up.M1 * L / r == pytest.approx(2.9083303, rel=1e-7)
    assert up.M2 * L / g.y == pytest.approx(2.7120817, rel=1e-7)
    assert up.E / math.exp(0.43 * L) == pytest.approx(1.4048048, rel=1e-7)
    assert up.total * L / r == pytest.approx(14.1185, rel=1e-5)
    assert leading_factor(N0) == up.leading


def test_upper_sum_M1_with_mpmath():
    with mpmath.workdps(40):
        N = mpmath.mpf(N0)
        L = mpmath.log(N + math.isqrt(4 * N0))
        eg = mpmath.exp(mpmath.euler)
        a = mpmath.mpf("0.07")
        ka = 8 * (mpmath.mpf(1) / 2 - mpmath.mpf(1) / 4 - a)
        h = mpmath.exp(-2)  # k_alpha = 1.44 <= 2
        eC1h = mpmath.mpf("1.97e-3") * 121 * mpmath.e**2 * h
        ratio = (8 - 16 * a - 2) / (4 - 8 * a - 2)
        M1 = 2 * mpmath.sqrt(N) / L * (
            eg / 4 * (mpmath.log(ratio) / (mpmath.mpf(1) / 2 - a) + 5 * 8**4 / (ka * L**3))
            + eC1h * (mpmath.log(2) + 5 * 8**3 / L**3)
        )
    assert upper_sum_Sq(N0).M1 == pytest.approx(float(M1), rel=1e-12)


def test_displayed_M1_bracket_is_too_large():
    # the (log X)^2 exponent overshoots the stated 2.909 by a wide margin
    assert m1_displayed_coefficient(N0) > 5


@pytest.mark.parametrize(
    "k1, k2, alpha",
    [(8, 4, 0.07), (8, 4, 0.01), (8, 4, 0.12), (8, 3, 0.03), (7, 3, 0.02), (6, 4, 0.05), (5, 4, 0.04)],
)
def test_logdt_closed_form_vs_quadrature(k1, k2, alpha):
    L = math.log(geometry(N0, k1, k2).X)
    closed = logdt_closed_form(L, k1, k2, alpha)
    quad = logdt_quadrature(L, k1, k2, alpha)
    assert quad == pytest.approx(closed, rel=1e-9)


def test_logdt_closed_form_vs_mpmath_quad():
    L = mpmath.mpf(math.log(geometry(N0, 8, 4).X))
    with mpmath.workdps(30):
        top = (mpmath.mpf(1) / 2 - mpmath.mpf("0.07")) * L
        val = mpmath.quad(lambda u: 1 / (u * (top - u)), [L / 8, L / 6, L / 4])
    assert logdt_closed_form(float(L), 8, 4, 0.07) == pytest.approx(float(val), rel=1e-12)


def test_ledger_entry_direction():
    assert LedgerEntry("a", 1.0, 2.0, "upper").ok
    assert not LedgerEntry("a", 3.0, 2.0, "upper").ok
    assert LedgerEntry("b", 3.0, 2.0, "lower").ok
    assert LedgerEntry("b", 3.0, 2.0, "lower").as_dict()["ok"] is True
