import math

import numpy as np
import numpy.testing as npt
import pytest

from goldpart.constants import C2_PUBLISHED
from goldpart.estimators import (
    EstimatorError,
    default_c2,
    estimate,
    estimate_one,
    g1,
    g2,
    g3,
    g4,
    lower_bound,
    odd_factor_product,
    twin_prime_constant,
)
from goldpart.primes import build_sieve, distinct_odd_prime_factors


SIEVE = build_sieve(10 ** 6)


def factors(n):
    return distinct_odd_prime_factors(n, SIEVE)


def test_twin_prime_constant():
    npt.assert_allclose(twin_prime_constant(3).value, 0.75)
    npt.assert_allclose(twin_prime_constant(5).value, 0.703125)
    npt.assert_allclose(twin_prime_constant(6).value, 0.703125)

    c2 = twin_prime_constant(10 ** 6)
    assert abs(c2.corrected - C2_PUBLISHED) < 1e-8
    assert abs(c2.value - C2_PUBLISHED) < 1e-7
    assert 0.66 <= c2.value < 0.6602
    assert c2.corrected < c2.value

    c2_small = twin_prime_constant(10 ** 5)
    assert c2.value <= c2_small.value
    # the raw product still moves by ~5e-7 between 10^5 and 10^6;
    # the tail estimate absorbs it
    assert abs(c2.value - c2_small.value) > 1e-7
    assert abs(c2.corrected - c2_small.corrected) < 1e-8

    values = [twin_prime_constant(lim).value for lim in (3, 10, 100, 1000)]
    assert all(a >= b for a, b in zip(values, values[1:]))

    with pytest.raises(EstimatorError):
        twin_prime_constant(2)

    assert default_c2() is default_c2()


def test_g1():
    c2 = default_c2()
    npt.assert_allclose(g1(100, factors(100)), 8.30, atol=0.01)
    npt.assert_allclose(
        g1(1024, factors(1024)),
        2 * c2.corrected * 1024 / math.log(1024) ** 2,
    )
    npt.assert_allclose(
        g1(14, factors(14)),
        2 * c2.corrected * 14 / math.log(14) ** 2 * 6 / 5,
    )
    with pytest.raises(EstimatorError):
        g1(100, factors(98))
    with pytest.raises(EstimatorError):
        g1(2, factors(2))


def test_ratios():
    for n in (4, 38, 100, 10 ** 6):
        f = factors(n)
        assert g2(n, f) == 0.6 * g1(n, f)
        npt.assert_allclose(lower_bound(n, f) / g1(n, f), 2 / 3)
        assert g1(n, f) >= 2 * default_c2().corrected * g3(n)
    npt.assert_allclose(g2(100, factors(100)), 4.98, atol=0.01)
    npt.assert_allclose(lower_bound(100, factors(100)), 5.53, atol=0.01)


def test_g3_g4():
    npt.assert_allclose(g3(100), 4.715, atol=1e-3)
    npt.assert_allclose(g3(4), 2.081, atol=1e-3)
    npt.assert_allclose(g4(100), 6.534, atol=1e-3)
    npt.assert_allclose(g4(4 * 10 ** 6), 4e6 / math.log(2e6) ** 2)

    ns = np.arange(8, 10_000, 2)
    assert np.all(np.diff(estimate("g3", ns)) > 0)
    ns = np.arange(16, 10_000, 2)
    assert np.all(np.diff(estimate("g4", ns)) > 0)

    with pytest.raises(EstimatorError):
        g3(3)
    with pytest.raises(EstimatorError):
        g4(4)


def test_estimate_matches_scalar():
    ns = np.arange(4, 2002, 2)
    for name in ("g1", "g2", "lb", "g3"):
        vec = estimate(name, ns, SIEVE)
        one = [estimate_one(name, int(n), SIEVE) for n in ns[::37]]
        npt.assert_allclose(vec[::37], one, rtol=1e-12)

    npt.assert_allclose(
        estimate("g4", ns[1:]), [g4(int(n)) for n in ns[1:]]
    )
    with pytest.raises(EstimatorError):
        estimate("g4", ns)
    loose = estimate("g4", ns, strict=False)
    npt.assert_allclose(loose[0], 4 / math.log(2) ** 2)

    assert estimate("g1", []).size == 0
    with pytest.raises(EstimatorError):
        estimate("g5", ns)
    with pytest.raises(EstimatorError):
        estimate("g3", [5])


def test_odd_factor_product():
    prod = odd_factor_product(100)
    npt.assert_allclose(prod[100], 4 / 3)
    npt.assert_allclose(prod[64], 1.0)
    npt.assert_allclose(prod[30], 2 / 1 * 4 / 3)
    # precomputed products are reused when large enough
    ns = np.array([30, 100])
    npt.assert_allclose(
        estimate("g1", ns, factor_product=prod),
        estimate("g1", ns, SIEVE),
    )


if __name__ == "__main__":
    test_twin_prime_constant()
    test_g1()
    test_ratios()
    test_g3_g4()
