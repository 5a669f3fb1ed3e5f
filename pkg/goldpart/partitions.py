"""
Goldbach's function and the comet dataset.

G(n) counts unordered prime pairs p <= q with p + q = n. The counting
scheme walks the primes p <= n/2 and tests n - p against the sieve
table. A full comet over a range is built either from that scheme,
fanned out over worker processes by n-range, or from the
self-convolution of the prime indicator, which gives the whole range
at once::

    G(n) = ( sum_k 1P(k) 1P(n - k) + 1P(n/2) ) / 2

"""
from concurrent.futures import ProcessPoolExecutor

import attr
import numpy as np
import pandas as pd

from .util import even_chunks, even_range, read_csv_columns, worker_count


class Error(Exception):
    pass


class PartitionError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class PartitionRangeError(PartitionError):
    pass


class CometFileError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


COMET_METHODS = ("fft", "direct")
ORACLE_MAX = 100_000

_bad_n = "n = {} must be even and >= 4"
_n_out_of_range = "n = {} exceeds sieve limit {}"
_bad_oracle_n = "n = {} outside oracle range [4, {}]"
_bad_bounds = "need even 4 <= lo <= hi <= {}, got lo = {}, hi = {}"
_bad_method = "unknown comet method {!r}, expected one of {}"
_bad_comet = "comet table is not a gap-free even range starting >= 4"
_bad_comet_file = "cannot read comet file {}: {}"
_not_in_table = "n = {} is not an even number in [{}, {}]"


@attr.s(frozen=True)
class PartitionRecord(object):
    """One comet point: even `n` and its partition count `g`."""

    n = attr.ib()
    g = attr.ib()


def _check_comet(instance, attribute, value):
    n = instance.n
    if n.shape != instance.g.shape or n.size == 0:
        raise PartitionError(_bad_comet)
    if n[0] < 4 or n[0] % 2 or np.any(np.diff(n) != 2):
        raise PartitionError(_bad_comet)


@attr.s(frozen=True, eq=False)
class CometTable(object):
    """G(n) for every even n in [lo, hi], ascending by n.

    Attributes
    ----------
    n : ndarray of int64
        Even numbers lo, lo + 2, ..., hi.
    g : ndarray of int64
        Partition counts aligned with `n`.

    """

    n = attr.ib(converter=lambda a: np.asarray(a, dtype=np.int64))
    g = attr.ib(
        converter=lambda a: np.asarray(a, dtype=np.int64),
        validator=_check_comet,
    )

    @property
    def lo(self):
        return int(self.n[0])

    @property
    def hi(self):
        return int(self.n[-1])

    def __len__(self):
        return self.n.size

    def __getitem__(self, i):
        return PartitionRecord(n=int(self.n[i]), g=int(self.g[i]))

    def records(self):
        for n, g in zip(self.n.tolist(), self.g.tolist()):
            yield PartitionRecord(n=n, g=g)

    def g_of(self, n):
        """Partition count for even `n` inside the table."""
        if n < self.lo or n > self.hi or n % 2:
            raise PartitionRangeError(
                _not_in_table.format(n, self.lo, self.hi)
            )
        return int(self.g[(n - self.lo) // 2])

    def to_dataframe(self):
        return pd.DataFrame({"n": self.n, "g": self.g})


def count_partitions(n, sieve):
    """Number of unordered prime pairs p <= q with p + q = n.

    Parameters
    ----------
    n : int
        Even, 4 <= `n` <= ``sieve.limit``.
    sieve : :class:`~goldpart.primes.PrimeSieve`

    Returns
    -------
    int

    """
    n = int(n)
    if n < 4 or n % 2:
        raise PartitionError(_bad_n.format(n))
    if n > sieve.limit:
        raise PartitionRangeError(_n_out_of_range.format(n, sieve.limit))
    small = sieve.primes_upto(n // 2)
    return int(np.count_nonzero(sieve.is_prime[n - small]))


def _trial_division_primes(limit):
    primes = []
    for m in range(2, limit + 1):
        if all(m % p for p in primes if p * p <= m):
            primes.append(m)
    return primes


def count_partitions_oracle(n):
    """Slow reference count of G(n) by a double loop over prime pairs.

    Shares nothing with the sieve: primes come from trial division.
    Intended for tests, `n` <= 10^5.
    """
    n = int(n)
    if n < 4 or n % 2:
        raise PartitionError(_bad_n.format(n))
    if n > ORACLE_MAX:
        raise PartitionRangeError(_bad_oracle_n.format(n, ORACLE_MAX))
    primes = _trial_division_primes(n)
    count = 0
    for i, p in enumerate(primes):
        if 2 * p > n:
            break
        for q in primes[i:]:
            if p + q == n:
                count += 1
            if p + q >= n:
                break
    return count


def oracle_table(hi):
    """Reference G(n) for all even 4 <= n <= `hi` by summing prime pairs.

    Same double loop as :func:`count_partitions_oracle`, accumulated over
    every pair once instead of once per n.

    Returns
    -------
    dict
        ``{n: G(n)}``

    """
    if hi < 4 or hi > ORACLE_MAX:
        raise PartitionRangeError(_bad_oracle_n.format(hi, ORACLE_MAX))
    primes = _trial_division_primes(hi)
    counts = {n: 0 for n in range(4, hi + 1, 2)}
    for i, p in enumerate(primes):
        for q in primes[i:]:
            s = p + q
            if s > hi:
                break
            if s in counts:
                counts[s] += 1
    return counts


def build_comet(lo, hi, sieve, method="fft", threads=None, stdout=False):
    """G(n) for every even n in [lo, hi].

    Parameters
    ----------
    lo, hi : int
        Even bounds, 4 <= `lo` <= `hi` <= ``sieve.limit``.
    sieve : :class:`~goldpart.primes.PrimeSieve`
    method : {"fft", "direct"}, optional
        "direct" counts each n with :func:`count_partitions`, splitting
        the range into chunks handled by worker processes. "fft" (default)
        computes the whole range from one real FFT convolution of the
        prime indicator. Both give identical tables.
    threads : int, optional
        Cap on worker processes for "direct". Default is all cores.
    stdout : bool, optional
        Print progress lines. Default is False.

    Returns
    -------
    :class:`CometTable`

    """
    lo, hi = int(lo), int(hi)
    if lo < 4 or lo % 2 or hi % 2 or hi < lo or hi > sieve.limit:
        raise PartitionError(_bad_bounds.format(sieve.limit, lo, hi))
    if method not in COMET_METHODS:
        raise PartitionError(_bad_method.format(method, COMET_METHODS))

    if stdout:
        print("Counting partitions for {:,} even numbers ({}) ...".format(
            (hi - lo) // 2 + 1, method))
    if method == "fft":
        n, g = even_range(lo, hi), _fft_counts(lo, hi, sieve)
    else:
        n, g = _direct_counts(lo, hi, sieve, threads)
    if stdout:
        print("Comet done: mean G = {:.4f}".format(g.mean()))
    return CometTable(n=n, g=g)


def _fft_counts(lo, hi, sieve):
    indicator = sieve.is_prime[: hi + 1].astype(np.float64)
    size = 1 << (2 * hi + 1).bit_length()
    spectrum = np.fft.rfft(indicator, size)
    ordered = np.fft.irfft(spectrum * spectrum, size)[: hi + 1]
    ns = even_range(lo, hi)
    ordered_pairs = np.rint(ordered[ns]).astype(np.int64)
    return (ordered_pairs + sieve.is_prime[ns // 2]) // 2


_worker_sieve = None


def _init_worker(sieve):
    global _worker_sieve
    _worker_sieve = sieve


def _count_chunk(bounds, sieve=None):
    sieve = sieve if sieve is not None else _worker_sieve
    ns = even_range(*bounds)
    g = np.fromiter(
        (count_partitions(n, sieve) for n in ns.tolist()),
        dtype=np.int64,
        count=ns.size,
    )
    return ns, g


def _direct_counts(lo, hi, sieve, threads):
    nworkers = worker_count(threads)
    chunks = even_chunks(lo, hi, 4 * nworkers)
    if nworkers == 1:
        parts = [_count_chunk(c, sieve) for c in chunks]
    else:
        with ProcessPoolExecutor(
            max_workers=nworkers, initializer=_init_worker, initargs=(sieve,)
        ) as pool:
            parts = list(pool.map(_count_chunk, chunks))
    n = np.concatenate([p[0] for p in parts])
    g = np.concatenate([p[1] for p in parts])
    order = np.argsort(n, kind="stable")
    return n[order], g[order]


def save_comet(table, path):
    """Write the comet as CSV with header ``n,g``, ascending by n."""
    table.to_dataframe().to_csv(path, index=False)


def load_comet(path):
    """Read a comet CSV written by :func:`save_comet`."""
    try:
        df = read_csv_columns(path, ["n", "g"], dtype=np.int64)
    except (OSError, ValueError) as e:
        raise CometFileError(_bad_comet_file.format(path, e))
    try:
        return CometTable(n=df["n"].values, g=df["g"].values)
    except PartitionError as e:
        raise CometFileError(_bad_comet_file.format(path, e.message))
