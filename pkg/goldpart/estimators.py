"""
Analytic approximations of Goldbach's function.

Notation::

    C2 = prod_{p >= 3} (1 - 1/(p - 1)^2)              twin prime constant
    G1(n) = 2 C2 n / ln(n)^2 prod_{p | n, p odd} (p - 1)/(p - 2)
    G2(n) = 3/5 G1(n)
    G3(n) = n / ln(n)^2
    G4(n) = n / ln(n/2)^2
    lb(n) = 2/3 G1(n)

G1 and G2 (and lb) need the odd prime factors of n. G1 is often
called an upper bound; on real data it overshoots heavily and should
be reported as an estimate, not a bound.

"""
from functools import lru_cache
import math

import attr
import numpy as np

from .constants import BAKER_FACTOR, C2_TRUNCATION, LOWER_BOUND_FACTOR
from .primes import build_sieve, distinct_odd_prime_factors


class Error(Exception):
    pass


class EstimatorError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


ESTIMATORS = ("g1", "g2", "g3", "g4", "lb")
NEEDS_FACTORS = {"g1": True, "g2": True, "g3": False, "g4": False, "lb": True}
LABELS = {"g1": "G1", "g2": "G2", "g3": "G3", "g4": "G4", "lb": "LOWER_BOUND"}

_bad_truncation = "truncation_limit = {} < 3"
_bad_n = "n = {} must be even and >= {}"
_bad_factors = "factors {} do not belong to n = {}"
_bad_name = "unknown estimator {!r}, expected one of {}"


@attr.s(frozen=True)
class TwinPrimeConstant(object):
    """Truncated twin prime product.

    Attributes
    ----------
    value : float
        prod (1 - 1/(p - 1)^2) over odd primes p <= `truncation_limit`.
        Non-increasing in the truncation limit.
    truncation_limit : int
    corrected : float
        `value` times an estimate of the omitted factors p > limit,
        exp(-sum_{p > limit} 1/p^2) with the sum taken from the prime
        density 1/ln(t). This is the constant the estimators use.

    """

    value = attr.ib()
    truncation_limit = attr.ib()
    corrected = attr.ib()


def twin_prime_constant(truncation_limit=C2_TRUNCATION):
    truncation_limit = int(truncation_limit)
    if truncation_limit < 3:
        raise EstimatorError(_bad_truncation.format(truncation_limit))
    odd = build_sieve(truncation_limit).primes[1:].astype(np.float64)
    value = float(np.prod(1.0 - 1.0 / (odd - 1.0) ** 2))
    corrected = value * math.exp(-_prime_square_tail(truncation_limit))
    return TwinPrimeConstant(
        value=value, truncation_limit=truncation_limit, corrected=corrected
    )


def _prime_square_tail(limit):
    # sum_{p > limit} 1/p^2 ~ int_limit^inf dt / (t^2 ln t) = E1(ln limit),
    # asymptotic series cut at its smallest term
    x = math.log(limit)
    term, total, k = 1.0, 1.0, 0
    while True:
        k += 1
        nxt = -term * k / x
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
    return math.exp(-x) / x * total


@lru_cache(maxsize=None)
def default_c2():
    """C2 at the default truncation, computed once per process."""
    return twin_prime_constant(C2_TRUNCATION)


def _check_even(n, least):
    if n < least or n % 2:
        raise EstimatorError(_bad_n.format(n, least))


def _factor_product(n, factors):
    if factors.n != n:
        raise EstimatorError(_bad_factors.format(list(factors), n))
    prod = 1.0
    for p in factors:
        prod *= (p - 1) / (p - 2)
    return prod


def g1(n, factors, c2=None):
    """Hardy-Littlewood estimate.

    Parameters
    ----------
    n : int
        Even, `n` >= 4.
    factors : :class:`~goldpart.primes.OddFactorSet`
        Distinct odd prime factors of `n`.
    c2 : :class:`TwinPrimeConstant`, optional
        Default is :func:`default_c2`.

    """
    _check_even(n, 4)
    c2 = default_c2() if c2 is None else c2
    scale = 2 * c2.corrected * n / math.log(n) ** 2
    return scale * _factor_product(n, factors)


def g2(n, factors, c2=None):
    return BAKER_FACTOR * g1(n, factors, c2)


def g3(n):
    _check_even(n, 4)
    return n / math.log(n) ** 2


def g4(n):
    # ln(n/2) is too small below n = 6
    _check_even(n, 6)
    return n / math.log(n / 2) ** 2


def lower_bound(n, factors, c2=None):
    return LOWER_BOUND_FACTOR * g1(n, factors, c2)


def estimate_one(name, n, sieve, c2=None):
    """Evaluate estimator `name` at a single `n`, factoring as needed."""
    name = name.lower()
    if name not in ESTIMATORS:
        raise EstimatorError(_bad_name.format(name, ESTIMATORS))
    if name == "g3":
        return g3(n)
    if name == "g4":
        return g4(n)
    factors = distinct_odd_prime_factors(n, sieve)
    return {"g1": g1, "g2": g2, "lb": lower_bound}[name](n, factors, c2)


def odd_factor_product(hi, sieve=None):
    """prod_{p | m, p odd} (p - 1)/(p - 2) for every m in 0..`hi`.

    A multiplicative pass over the multiples of each odd prime, the
    array counterpart of factoring every m separately. Entry m holds
    the product for m (entries 0 and 1 are meaningless).
    """
    if sieve is None or hi > sieve.limit:
        sieve = build_sieve(max(hi, 2))
    prod = np.ones(hi + 1, dtype=np.float64)
    for p in sieve.primes_upto(hi)[1:].tolist():
        prod[p::p] *= (p - 1) / (p - 2)
    return prod


def estimate(
    name, ns, sieve=None, c2=None, factor_product=None, strict=True
):
    """Vectorized estimator over an array of even numbers.

    Parameters
    ----------
    name : {"g1", "g2", "g3", "g4", "lb"}
    ns : array_like of int
        Even numbers; >= 4 (>= 6 for "g4").
    sieve : :class:`~goldpart.primes.PrimeSieve`, optional
        Used for the factor product of g1/g2/lb; built if missing.
    c2 : :class:`TwinPrimeConstant`, optional
    factor_product : ndarray, optional
        Precomputed :func:`odd_factor_product` covering max(`ns`).
    strict : bool, optional
        If False, "g4" is also evaluated at n = 4, where ln(n/2) = ln 2
        is still finite. Comparisons over random test sets use this.
        Default is True.

    Returns
    -------
    ndarray of float64

    """
    name = name.lower()
    if name not in ESTIMATORS:
        raise EstimatorError(_bad_name.format(name, ESTIMATORS))
    ns = np.asarray(ns, dtype=np.int64)
    least = 6 if name == "g4" and strict else 4
    if ns.size and (ns.min() < least or np.any(ns % 2)):
        raise EstimatorError(_bad_n.format(int(ns.min()), least))
    if ns.size == 0:
        return np.zeros(0, dtype=np.float64)
    x = ns.astype(np.float64)
    if name == "g3":
        return x / np.log(x) ** 2
    if name == "g4":
        return x / np.log(x / 2) ** 2

    c2 = default_c2() if c2 is None else c2
    if factor_product is None or factor_product.size <= ns.max():
        factor_product = odd_factor_product(int(ns.max()), sieve)
    base = 2 * c2.corrected * x / np.log(x) ** 2 * factor_product[ns]
    scale = {"g1": 1.0, "g2": BAKER_FACTOR, "lb": LOWER_BOUND_FACTOR}[name]
    return scale * base
