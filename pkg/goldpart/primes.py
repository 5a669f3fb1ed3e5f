"""
Prime sieve and odd prime factor sets.

A :class:`PrimeSieve` is a dense boolean primality table over
0..limit together with the ascending list of primes it contains. It is
built once and shared read-only by partition counting, estimator
products, and factoring.

"""
import os

import attr
import numpy as np

from .util import warn, ArtifactReadWarning


class Error(Exception):
    pass


class SieveError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class SieveRangeError(SieveError):
    pass


class InsufficientSieveError(SieveError):
    pass


class SieveCacheError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


_bad_limit = "limit = {} < 2"
_out_of_range = "n = {} outside sieve range [0, {}]"
_bad_factor_arg = "n = {} < 2"
_small_sieve = "sieve limit {} too small to factor n = {} (need limit^2 >= n)"
_bad_cache = "sieve cache {} is unreadable: {}"

_CACHE_HEADER_BYTES = 8


@attr.s(frozen=True, eq=False)
class PrimeSieve(object):
    """Primality table for 0..`limit`.

    Attributes
    ----------
    limit : int
        Inclusive upper bound of the table.
    is_prime : ndarray of bool, shape (limit + 1,)
        ``is_prime[i]`` is True iff i is prime. Read-only.
    primes : ndarray of int64
        All primes <= `limit`, ascending. Read-only.

    """

    limit = attr.ib()
    is_prime = attr.ib(repr=False)
    primes = attr.ib(repr=False)

    def __contains__(self, n):
        return is_prime(self, n)

    def __len__(self):
        return len(self.primes)

    def primes_upto(self, bound):
        """Primes p <= `bound` (a view, no copy)."""
        stop = np.searchsorted(self.primes, bound, side="right")
        return self.primes[:stop]


@attr.s(frozen=True)
class OddFactorSet(object):
    """Distinct odd primes dividing `n`, ascending."""

    n = attr.ib()
    factors = attr.ib(converter=tuple)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


def build_sieve(limit):
    """Sieve of Eratosthenes over a dense boolean table.

    Parameters
    ----------
    limit : int
        Inclusive upper bound, `limit` >= 2.

    Returns
    -------
    :class:`PrimeSieve`

    """
    limit = int(limit)
    if limit < 2:
        raise SieveError(_bad_limit.format(limit))
    table = np.ones(limit + 1, dtype=bool)
    table[:2] = False
    table[4::2] = False
    for p in range(3, int(limit ** 0.5) + 1, 2):
        if table[p]:
            table[p * p :: 2 * p] = False
    return _frozen_sieve(limit, table)


def _frozen_sieve(limit, table):
    primes = np.flatnonzero(table).astype(np.int64)
    table.setflags(write=False)
    primes.setflags(write=False)
    return PrimeSieve(limit=limit, is_prime=table, primes=primes)


def is_prime(sieve, n):
    """Constant time primality lookup, ``0 <= n <= sieve.limit``."""
    if n < 0 or n > sieve.limit:
        raise SieveRangeError(_out_of_range.format(n, sieve.limit))
    return bool(sieve.is_prime[n])


def distinct_odd_prime_factors(n, sieve):
    """Distinct odd prime factors of `n` by trial division.

    The power of two and all multiplicities are discarded. Trial
    division uses the sieve primes up to sqrt(n); whatever cofactor is
    left above 1 is itself an odd prime.

    Parameters
    ----------
    n : int
        `n` >= 2.
    sieve : :class:`PrimeSieve`
        Must satisfy ``sieve.limit ** 2 >= n``.

    Returns
    -------
    :class:`OddFactorSet`

    """
    n = int(n)
    if n < 2:
        raise SieveError(_bad_factor_arg.format(n))
    if sieve.limit * sieve.limit < n:
        raise InsufficientSieveError(_small_sieve.format(sieve.limit, n))

    m = n
    while m % 2 == 0:
        m //= 2
    factors = []
    for p in sieve.primes[1:]:
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            factors.append(p)
            while m % p == 0:
                m //= p
    if m > 1:
        factors.append(m)
    return OddFactorSet(n=n, factors=factors)


def save_sieve(sieve, path):
    """Write the sieve as an 8-byte little-endian limit + packed bits."""
    header = np.array([sieve.limit], dtype="<u8").tobytes()
    bits = np.packbits(sieve.is_prime, bitorder="little")
    with open(path, "wb") as f:
        f.write(header)
        f.write(bits.tobytes())


def load_sieve(path):
    """Read a sieve written by :func:`save_sieve`."""
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise SieveCacheError(_bad_cache.format(path, e))
    if len(raw) < _CACHE_HEADER_BYTES:
        raise SieveCacheError(_bad_cache.format(path, "truncated header"))
    limit = int(np.frombuffer(raw[:_CACHE_HEADER_BYTES], dtype="<u8")[0])
    nbytes = (limit + 1 + 7) // 8
    payload = np.frombuffer(raw[_CACHE_HEADER_BYTES:], dtype=np.uint8)
    if limit < 2 or payload.size != nbytes:
        raise SieveCacheError(_bad_cache.format(path, "size mismatch"))
    table = np.unpackbits(payload, count=limit + 1, bitorder="little")
    return _frozen_sieve(limit, table.astype(bool))


def cached_sieve(limit, path=None):
    """Build a sieve, reusing an on-disk cache at `path` if it matches.

    A missing or unreadable cache is (re)written. A valid cache for
    another limit is left alone and the sieve is built in memory.
    """
    if path is None:
        return build_sieve(limit)
    if os.path.exists(path):
        try:
            sieve = load_sieve(path)
            if sieve.limit == limit:
                return sieve
            return build_sieve(limit)
        except SieveCacheError as e:
            warn(e.message + "; rebuilding", ArtifactReadWarning)
    sieve = build_sieve(limit)
    save_sieve(sieve, path)
    return sieve
