import math

import mpmath
import numpy as np
import pytest

from sievekit import bounds
from sievekit.bounds import (
    C_of,
    F_of,
    V_band,
    f_of,
    h_of,
    mert1_holds,
    mertens_band,
    pi_upper,
    reciprocal_sum_upper,
    squarefree_upper,
)
from sievekit.errors import DomainError, RegimeError
from sievekit.primes import mertens_product, primes_up_to, squarefree_count


def test_gamma_matches_mpmath():
    with mpmath.workdps(40):
        assert mpmath.mpf(bounds.EULER_GAMMA_30) - mpmath.euler < mpmath.mpf("1e-29")
    assert bounds.EXP_GAMMA == pytest.approx(1.7810724179901979, rel=1e-15)


@pytest.mark.parametrize(
    "s, expected",
    [(1.0, math.exp(-2)), (2.0, math.exp(-2)), (2.5, math.exp(-2.5)), (3.0, math.exp(-3)), (3.3, 3 * math.exp(-3.3) / 3.3)],
)
def test_h_pieces(s, expected):
    assert h_of(s) == pytest.approx(expected, rel=1e-15)


def test_h_is_continuous_at_breakpoints():
    assert h_of(2.0) == pytest.approx(h_of(2.0 + 1e-12), rel=1e-9)
    # 3 e^-3 / 3 = e^-3
    assert h_of(3.0) == pytest.approx(h_of(3.0 + 1e-12), rel=1e-9)


def test_F_and_f_closed_forms():
    eg = float(mpmath.exp(mpmath.euler))
    assert F_of(2.0) == pytest.approx(eg, rel=1e-15)
    assert f_of(3.0) == pytest.approx(2 * eg * math.log(2) / 3, rel=1e-15)
    assert f_of(2.0) == 0.0


@pytest.mark.parametrize("fn, s", [(F_of, 0.5), (F_of, 3.5), (f_of, 1.9), (f_of, 4.5), (h_of, 0.9), (C_of, 2.9), (C_of, 4.1)])
def test_outside_closed_form_domains(fn, s):
    with pytest.raises(DomainError):
        fn(s)


def test_C_of_against_mpmath():
    with mpmath.workdps(30):
        s = mpmath.mpf("3.3")
        ref = (2 * mpmath.exp(mpmath.euler) * mpmath.log(s - 1) - mpmath.mpf("0.73") * mpmath.exp(2 - s)) / s
    assert C_of(3.3) == pytest.approx(float(ref), rel=1e-14)
    assert 0.8387 <= C_of(3.3) <= 0.8389


@pytest.mark.parametrize("z", [285, 300, 1000, 3444.16, 10**4, 123457, 10**6])
def test_V_band_contains_product(z):
    t = primes_up_to(10**6)
    v = 1.0 / mertens_product(math.ceil(z) - 1, t)
    lo, hi = V_band(z)
    assert lo is not None and lo < v < hi


def test_V_band_lower_side_only_from_285():
    assert V_band(284.9)[0] is None
    assert V_band(285)[0] is not None


def test_mertens_band_regimes():
    assert mertens_band(2).regime == "computational"
    assert mertens_band(1e12).regime == "asymptotic"
    assert mertens_band(1e9).regime == "computational"
    assert mertens_band(3.8e9).regime == "both"
    with pytest.raises(RegimeError):
        mertens_band(1.5)
    # the regimes overlap on [e^22, 4e9], so every x >= 2 is covered
    assert mertens_band(1e10).regime == "asymptotic"


def test_mertens_band_smallest_prime():
    # e^γ log 2 < 2 < e^γ log 2 + 2 e^γ / sqrt 2
    b = mertens_band(2)
    assert b.contains(2.0)
    assert b.lower == pytest.approx(1.2345, abs=1e-4)


def test_mertens_band_fails_below_two():
    # at x = 1.9 the empty product 1 lies below e^γ log 1.9
    low_ok, high_ok = mert1_holds(1.9, 1.0)
    assert high_ok and not low_ok
    assert bounds.EXP_GAMMA * math.log(1.9) == pytest.approx(1.1432, abs=1e-4)


def test_mertens_band_grid():
    t = primes_up_to(10**6)
    for x in np.geomspace(2, 10**6, 20):
        assert mertens_band(x).contains(mertens_product(x, t))


def test_pi_upper():
    t = primes_up_to(2 * 10**7)
    for y in [10**7, 1.5e7, 2 * 10**7]:
        assert t.pi(y) < pi_upper(y)
    with pytest.raises(DomainError):
        pi_upper(10**6)


def test_squarefree_upper_grid():
    for x in np.unique(np.geomspace(10, 10**7, 200).astype(np.int64)):
        assert squarefree_count(int(x)) <= squarefree_upper(float(x))
    with pytest.raises(DomainError):
        squarefree_upper(9)


def test_reciprocal_sum_upper():
    t = primes_up_to(10**6)
    for a, b in [(1001, 5000), (3444.16, 10**6), (2000, 2100)]:
        exact = math.fsum(1.0 / t.between(a, b).astype(float))
        assert exact <= reciprocal_sum_upper(a, b)
    with pytest.raises(DomainError):
        reciprocal_sum_upper(10, 100)
