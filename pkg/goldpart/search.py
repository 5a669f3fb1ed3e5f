"""
Adversarial search for numbers a trained model scores as violators.

The hill climb treats the 40 digit features as free coordinates and
drives the model output down one digit at a time. Positions are swept
base-major (2, 3, 5, 7) and least significant digit first; a digit is
moved to the value with the lowest prediction only if that is strictly
lower than the current one, so ties keep the current digit. Features
40 and 41 stay at the starting number's values throughout.

The resulting digits describe residues modulo 2^10, 3^10, 5^10 and
7^10. Those moduli are pairwise coprime, so the Chinese remainder
theorem gives the unique smallest integer carrying all four digit
patterns. The older way of finding such a number, walking numbers with
the base-7 pattern and testing the other three, is kept as
:func:`enumerate_pattern`.

"""
from concurrent.futures import ProcessPoolExecutor
import math

import attr
import numpy as np

from .constants import (
    BASES,
    DIGIT_MODULI,
    MAX_SWEEPS,
    N_MAX,
    NUM_DIGITS,
    NUM_FEATURES,
    SEARCH_START,
)
from .containers import CrtResult, HillClimbReport, ScanReport
from .features import LOG_COL, NUMBER_COL, BaseDigits, base_digits
from .neuralnet import IncompatibleModelError, TrainedModel, forward
from .partitions import count_partitions
from .primes import build_sieve
from .util import even_chunks, warn, worker_count


class Error(Exception):
    pass


class SearchError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class HillClimbLimitError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


# Published hypothetical violator, digits as printed (most significant
# first). Read that way it is 0 mod 2, 2 mod 3, 4 mod 5 and 0 mod 7.
REFERENCE_CANDIDATE_DIGITS = {
    2: (0, 0, 1, 0, 1, 0, 0, 0, 0, 0),
    3: (2, 0, 2, 0, 2, 1, 2, 0, 0, 2),
    5: (0, 0, 0, 0, 0, 0, 0, 0, 1, 4),
    7: (6, 1, 0, 0, 0, 0, 0, 6, 4, 0),
}
REFERENCE_BOUND = 10 ** 19
DIGIT_ORDERS = ("msd_first", "lsd_first")
ENUMERATE_LIMIT = 10 ** 12
ENUMERATE_CHUNK = 1 << 20

_bad_width = "hill climb needs the full {}-feature layout, model takes {}"
_bad_mask = "hill climb needs a model trained without a feature mask"
_no_convergence = "hill climb did not settle within {} sweeps"
_bad_order = "unknown digit order {!r}, expected one of {}"
_not_coprime = "moduli {} and {} are not coprime"
_bad_residues = "residues for bases {} have no moduli"
_bad_limit = "enumeration limit {} outside [1, 2^62]"
_bad_scan = "need even 4 <= lo <= hi <= {}, got lo = {}, hi = {}"
_bad_k = "k = {} < 1"
_violation = "G(n) = 0 for n = {}"


@attr.s(frozen=True)
class DigitCandidate(object):
    """Digits for each base plus the fixed scalar features.

    Attributes
    ----------
    digit_sets : tuple of :class:`~goldpart.features.BaseDigits`
        One per base, in BASES order, LSD first.
    anchor_n : int
        Source of feature 40 (anchor_n / n_max).
    anchor_log : float
        Feature 41; ln(anchor_n) unless given.
    prediction : float
        Model output for :meth:`features`; nan if not scored.

    """

    digit_sets = attr.ib(converter=tuple)
    anchor_n = attr.ib(default=SEARCH_START)
    anchor_log = attr.ib(
        default=attr.Factory(lambda self: math.log(self.anchor_n),
                             takes_self=True)
    )
    prediction = attr.ib(default=np.nan)

    @digit_sets.validator
    def _check_bases(self, attribute, value):
        if tuple(d.base for d in value) != BASES:
            raise SearchError(
                "digit sets must be for bases {}".format(BASES)
            )

    @property
    def bases(self):
        return BASES

    def digits_of(self, base):
        return self.digit_sets[BASES.index(base)]

    def features(self, n_max=N_MAX):
        """The 42-value feature vector the model scores."""
        values = np.empty(NUM_FEATURES, dtype=np.float64)
        for k, d in enumerate(self.digit_sets):
            values[k * NUM_DIGITS : (k + 1) * NUM_DIGITS] = d.digits
        values[NUMBER_COL] = self.anchor_n / n_max
        values[LOG_COL] = self.anchor_log
        return values


def _unwrap(model):
    if isinstance(model, TrainedModel):
        if not model.mask.is_full:
            raise IncompatibleModelError(_bad_mask)
        mlp, n_max = model.mlp, model.n_max
    else:
        mlp, n_max = model, N_MAX
    if mlp.input_width != NUM_FEATURES:
        raise IncompatibleModelError(
            _bad_width.format(NUM_FEATURES, mlp.input_width)
        )
    return mlp, n_max


def hill_climb(
    model,
    start_n=SEARCH_START,
    even_constraint=True,
    max_sweeps=MAX_SWEEPS,
    stdout=False,
):
    """Minimize the model output over the digit features.

    Parameters
    ----------
    model : :class:`~goldpart.neuralnet.TrainedModel` or MLP
        Must take the full 42-feature layout.
    start_n : int, optional
        Starting digits and fixed scalar features. Default is 10^6.
    even_constraint : bool, optional
        Hold base-2 digit 0 at 0 so the realized number is even.
        Default is True.
    max_sweeps : int, optional
        Give up after this many sweeps.
    stdout : bool, optional
        Print one line per sweep.

    Returns
    -------
    :class:`~goldpart.containers.HillClimbReport`

    """
    mlp, n_max = _unwrap(model)
    start = DigitCandidate(
        digit_sets=[base_digits(start_n, b) for b in BASES],
        anchor_n=start_n,
    )
    x = start.features(n_max)
    if even_constraint:
        x[0] = 0
    pred = forward(mlp, x)
    trajectory = [(0, 0, pred)]

    for sweep in range(1, max_sweeps + 1):
        changed = 0
        for k, base in enumerate(BASES):
            for pos in range(NUM_DIGITS):
                if even_constraint and base == 2 and pos == 0:
                    continue
                col = k * NUM_DIGITS + pos
                current = int(x[col])
                best_v, best_pred = current, pred
                for v in range(base):
                    if v == current:
                        continue
                    x[col] = v
                    p = forward(mlp, x)
                    if p < best_pred:
                        best_v, best_pred = v, p
                x[col] = best_v
                if best_v != current:
                    changed += 1
                    pred = best_pred
        trajectory.append((sweep, changed, pred))
        if stdout:
            print(
                "sweep {:>4}  changed = {:>2}  prediction = {:.6g}".format(
                    sweep, changed, pred
                )
            )
        if changed == 0:
            break
    else:
        raise HillClimbLimitError(_no_convergence.format(max_sweeps))

    final = DigitCandidate(
        digit_sets=[
            BaseDigits(b, x[k * NUM_DIGITS : (k + 1) * NUM_DIGITS])
            for k, b in enumerate(BASES)
        ],
        anchor_n=start.anchor_n,
        anchor_log=start.anchor_log,
        prediction=pred,
    )
    return HillClimbReport(trajectory=trajectory, final=final)


def residue_of(d):
    """sum_i digits[i] * base^i, the residue mod base^10 (exact int)."""
    return sum(int(v) * d.base ** i for i, v in enumerate(d.digits))


def crt_residues(residues, moduli=None):
    """Smallest nonnegative x with x = residues[b] mod moduli[b].

    Parameters
    ----------
    residues : dict
        ``{base: residue}``.
    moduli : dict, optional
        ``{base: modulus}``; default is base^10 for bases 2, 3, 5 and 7.

    Returns
    -------
    :class:`~goldpart.containers.CrtResult`

    """
    residues = {int(b): int(r) for b, r in residues.items()}
    if moduli is None:
        moduli = dict(zip(BASES, DIGIT_MODULI))
    moduli = {int(b): int(m) for b, m in moduli.items()}
    if set(residues) - set(moduli):
        raise SearchError(
            _bad_residues.format(sorted(set(residues) - set(moduli)))
        )
    bases = sorted(residues)
    for i, a in enumerate(bases):
        for b in bases[i + 1 :]:
            if math.gcd(moduli[a], moduli[b]) != 1:
                raise SearchError(_not_coprime.format(moduli[a], moduli[b]))

    x, modulus = 0, 1
    for b in bases:
        m = moduli[b]
        r = residues[b] % m
        t = ((r - x) * pow(modulus, -1, m)) % m
        x += modulus * t
        modulus *= m
    result = CrtResult(
        residues={b: residues[b] % moduli[b] for b in bases},
        moduli={b: moduli[b] for b in bases},
        modulus=modulus,
        smallest_solution=x,
    )
    assert result.verify()
    return result


def crt_combine(candidate):
    """Realize a :class:`DigitCandidate` as the smallest matching integer."""
    return crt_residues({d.base: residue_of(d) for d in candidate.digit_sets})


def reference_candidate(order="msd_first"):
    """The published candidate under digit order `order`."""
    if order not in DIGIT_ORDERS:
        raise SearchError(_bad_order.format(order, DIGIT_ORDERS))
    digit_sets = []
    for b in BASES:
        digits = REFERENCE_CANDIDATE_DIGITS[b]
        if order == "msd_first":
            digits = digits[::-1]
        digit_sets.append(BaseDigits(b, digits))
    return DigitCandidate(digit_sets=digit_sets)


def reference_realizations():
    """CRT solution of the published candidate for both digit orders.

    Returns
    -------
    dict
        ``{order: (CrtResult, bool)}``, the flag telling whether the
        solution lies below 10^19.

    """
    out = {}
    for order in DIGIT_ORDERS:
        result = crt_combine(reference_candidate(order))
        out[order] = (result, result.smallest_solution < REFERENCE_BOUND)
    return out


def enumerate_pattern(residues, moduli=None, limit=ENUMERATE_LIMIT,
                      pattern_base=7):
    """Smallest x < `limit` carrying every residue, by enumeration.

    Walks x = r + m * M over the numbers with the `pattern_base` residue
    r (modulus M) and tests the remaining residues. Agrees with
    :func:`crt_residues`: a hit exists iff the CRT solution is below
    `limit`.

    Returns
    -------
    int or None

    """
    if moduli is None:
        moduli = dict(zip(BASES, DIGIT_MODULI))
    if limit < 1 or limit > 2 ** 62:
        raise SearchError(_bad_limit.format(limit))
    step = moduli[pattern_base]
    first = residues[pattern_base] % step
    if first >= limit:
        return None
    count = (limit - first + step - 1) // step
    others = [b for b in residues if b != pattern_base]
    for start in range(0, count, ENUMERATE_CHUNK):
        m = np.arange(start, min(count, start + ENUMERATE_CHUNK),
                      dtype=np.int64)
        xs = first + step * m
        ok = np.ones(xs.size, dtype=bool)
        for b in others:
            ok &= xs % moduli[b] == residues[b] % moduli[b]
        if ok.any():
            return int(xs[ok][0])
    return None


_worker_model = None


def _init_worker(model):
    global _worker_model
    _worker_model = model


def _scan_chunk(bounds, k, model=None):
    model = model if model is not None else _worker_model
    ns = np.arange(bounds[0], bounds[1] + 1, 2, dtype=np.int64)
    preds = model.predict_numbers(ns)
    order = np.lexsort((ns, preds))[:k]
    return ns[order], preds[order]


def scan_suspicious(
    model,
    lo,
    hi,
    k,
    sieve=None,
    verify=True,
    threads=None,
    stdout=False,
):
    """The `k` even numbers in [lo, hi] with the lowest predictions.

    Chunks of the range are scored independently (in worker processes
    when more than one is available) and merged; ties are broken by the
    smaller n, so the result does not depend on chunking.

    Parameters
    ----------
    model : :class:`~goldpart.neuralnet.TrainedModel`
    lo, hi : int
        Even bounds within the model's feature range.
    k : int
    sieve : :class:`~goldpart.primes.PrimeSieve`, optional
        Used to verify the selected numbers; built up to `hi` if needed.
    verify : bool, optional
        Count the partitions of every selected n. Default is True.

    Returns
    -------
    :class:`~goldpart.containers.ScanReport`

    """
    lo, hi = int(lo), int(hi)
    if lo < 4 or lo % 2 or hi % 2 or hi < lo or hi > model.n_max:
        raise SearchError(_bad_scan.format(model.n_max, lo, hi))
    if k < 1:
        raise SearchError(_bad_k.format(k))
    k = min(k, (hi - lo) // 2 + 1)

    nworkers = worker_count(threads)
    chunks = even_chunks(lo, hi, 4 * nworkers)
    if stdout:
        print("Scanning {:,} numbers in {} chunk(s) ...".format(
            (hi - lo) // 2 + 1, len(chunks)))
    if nworkers == 1 or len(chunks) == 1:
        parts = [_scan_chunk(c, k, model) for c in chunks]
    else:
        with ProcessPoolExecutor(
            max_workers=nworkers, initializer=_init_worker, initargs=(model,)
        ) as pool:
            parts = list(pool.map(_scan_chunk, chunks, [k] * len(chunks)))
    ns = np.concatenate([p[0] for p in parts])
    preds = np.concatenate([p[1] for p in parts])
    order = np.lexsort((ns, preds))[:k]
    ns, preds = ns[order], preds[order]

    counts = [None] * k
    if verify:
        if sieve is None or sieve.limit < hi:
            sieve = build_sieve(hi)
        counts = [count_partitions(n, sieve) for n in ns.tolist()]
        for n, g in zip(ns.tolist(), counts):
            if g == 0:
                warn(_violation.format(n))
    rows = list(zip(ns.tolist(), preds.tolist(), counts))
    return ScanReport(rows=rows, lo=lo, hi=hi)
