"""
Multi-base digit features.

Every even n is encoded as 42 values::

    0-9    base-2 digits of n, least significant first
    10-19  base-3 digits
    20-29  base-5 digits
    30-39  base-7 digits
    40     n / N_max
    41     ln(n)

Only the 10 least significant digits of each base are kept, so base
b digits describe n mod b^10 (for base 2 that is n mod 1024). Digits
are raw values 0..b-1; nothing is scaled except position 40.

"""
import attr
import numpy as np
import pandas as pd

from .constants import BASES, N_MAX, NUM_DIGITS, NUM_FEATURES


class Error(Exception):
    pass


class FeatureError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


NUMBER_COL = len(BASES) * NUM_DIGITS  # 40
LOG_COL = NUMBER_COL + 1  # 41

FEATURE_NAMES = tuple(
    "b{}_d{}".format(b, i) for b in BASES for i in range(NUM_DIGITS)
) + ("n_norm", "log_n")

_bad_base = "unsupported base {}, expected one of {}"
_bad_digits = "base {} digits must be {} values in [0, {}], got {}"
_bad_n = "n = {} outside [4, n_max = {}] or odd"
_no_groups = "feature mask enables no feature group"
_bad_mask_name = "unknown feature mask {!r}, expected one of {}"
_bad_width = "feature vector has {} values, expected {}"


def _check_base(base):
    if base not in BASES:
        raise FeatureError(_bad_base.format(base, BASES))


def _check_digits(instance, attribute, value):
    base = instance.base
    if len(value) != NUM_DIGITS or any(d < 0 or d >= base for d in value):
        raise FeatureError(
            _bad_digits.format(base, NUM_DIGITS, base - 1, list(value))
        )


@attr.s(frozen=True)
class BaseDigits(object):
    """Ten least significant base-`base` digits, least significant first."""

    base = attr.ib(validator=lambda i, a, v: _check_base(v))
    digits = attr.ib(
        converter=lambda d: tuple(int(x) for x in d), validator=_check_digits
    )

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def replace(self, position, value):
        """Copy with one digit changed."""
        digits = list(self.digits)
        digits[position] = value
        return BaseDigits(base=self.base, digits=digits)


def base_digits(n, base):
    """Ten least significant digits of `n` in `base`, LSD first."""
    _check_base(base)
    n = int(n)
    if n < 0:
        raise FeatureError("n = {} < 0".format(n))
    digits = []
    for _ in range(NUM_DIGITS):
        n, d = divmod(n, base)
        digits.append(d)
    return BaseDigits(base=base, digits=digits)


def increment_digits_by_two(d):
    """Digits of (value + 2) mod base^10 by carry propagation."""
    digits = list(d.digits)
    carry, i = 2, 0
    while carry and i < NUM_DIGITS:
        carry, digits[i] = divmod(digits[i] + carry, d.base)
        i += 1
    return BaseDigits(base=d.base, digits=digits)


@attr.s(frozen=True, eq=False)
class FeatureVector(object):
    """The 42-value encoding of one even number."""

    values = attr.ib(converter=lambda v: np.asarray(v, dtype=np.float64))

    @values.validator
    def _check_width(self, attribute, value):
        if value.shape != (NUM_FEATURES,):
            raise FeatureError(_bad_width.format(value.size, NUM_FEATURES))

    def __len__(self):
        return NUM_FEATURES

    def __getitem__(self, i):
        return self.values[i]


def _assemble(digit_sets, n, n_max):
    values = np.empty(NUM_FEATURES, dtype=np.float64)
    for k, d in enumerate(digit_sets):
        values[k * NUM_DIGITS : (k + 1) * NUM_DIGITS] = d.digits
    values[NUMBER_COL] = n / n_max
    values[LOG_COL] = np.log(n)
    return FeatureVector(values)


def make_features(n, n_max=N_MAX):
    """Feature vector of even `n`, 4 <= `n` <= `n_max`.

    Returns
    -------
    :class:`FeatureVector`

    """
    n = int(n)
    if n < 4 or n > n_max or n % 2:
        raise FeatureError(_bad_n.format(n, n_max))
    return _assemble([base_digits(n, b) for b in BASES], n, n_max)


def feature_matrix(ns, n_max=N_MAX):
    """Vectorized :func:`make_features` for an array of even numbers.

    Returns
    -------
    ndarray, shape (len(ns), 42)

    """
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size and (ns.min() < 4 or ns.max() > n_max or np.any(ns % 2)):
        bad = ns[(ns < 4) | (ns > n_max) | (ns % 2 == 1)][0]
        raise FeatureError(_bad_n.format(int(bad), n_max))
    out = np.empty((ns.size, NUM_FEATURES), dtype=np.float64)
    powers = np.arange(NUM_DIGITS)
    for k, b in enumerate(BASES):
        place = np.int64(b) ** powers
        out[:, k * NUM_DIGITS : (k + 1) * NUM_DIGITS] = (
            ns[:, None] // place
        ) % b
    out[:, NUMBER_COL] = ns / n_max
    out[:, LOG_COL] = np.log(ns)
    return out


def iter_features(lo, hi, n_max=N_MAX):
    """Yield (n, FeatureVector) for even n in [lo, hi].

    Digits are carried forward from n to n + 2 instead of being
    recomputed, which is how features are produced while a comet range
    is walked in order.
    """
    digit_sets = [base_digits(lo, b) for b in BASES]
    for n in range(lo, hi + 1, 2):
        yield n, _assemble(digit_sets, n, n_max)
        digit_sets = [increment_digits_by_two(d) for d in digit_sets]


@attr.s(frozen=True)
class FeatureMask(object):
    """Feature groups kept for training (ablation).

    With `lsd_only`, each enabled base contributes only its digit 0.
    """

    include_base2 = attr.ib(default=True)
    include_base3 = attr.ib(default=True)
    include_base5 = attr.ib(default=True)
    include_base7 = attr.ib(default=True)
    include_number = attr.ib(default=True)
    include_log = attr.ib(default=True)
    lsd_only = attr.ib(default=False)

    def __attrs_post_init__(self):
        if not (any(self.bases_enabled()) or self.include_number
                or self.include_log):
            raise FeatureError(_no_groups)

    def bases_enabled(self):
        return (
            self.include_base2,
            self.include_base3,
            self.include_base5,
            self.include_base7,
        )

    def columns(self):
        """Indices into the 42-value layout kept by this mask."""
        keep = NUM_DIGITS if not self.lsd_only else 1
        cols = []
        for k, enabled in enumerate(self.bases_enabled()):
            if enabled:
                cols.extend(range(k * NUM_DIGITS, k * NUM_DIGITS + keep))
        if self.include_number:
            cols.append(NUMBER_COL)
        if self.include_log:
            cols.append(LOG_COL)
        return np.array(cols, dtype=np.int64)

    @property
    def width(self):
        return len(self.columns())

    @property
    def is_full(self):
        return self == FeatureMask()

    @property
    def name(self):
        for name, mask in MASKS.items():
            if mask == self:
                return name
        return "custom"

    @classmethod
    def from_name(cls, name):
        try:
            return MASKS[name.lower().replace("_", "-")]
        except KeyError:
            raise FeatureError(_bad_mask_name.format(name, tuple(MASKS)))

    def as_dict(self):
        return attr.asdict(self)


MASKS = {
    "full": FeatureMask(),
    "without-base2": FeatureMask(include_base2=False),
    "without-base3": FeatureMask(include_base3=False),
    "without-base5": FeatureMask(include_base5=False),
    "without-base7": FeatureMask(include_base7=False),
    "without-log": FeatureMask(include_log=False),
    "without-number": FeatureMask(include_number=False),
    "lsd-only": FeatureMask(lsd_only=True),
}


def apply_mask(features, mask):
    """Project a feature vector (or a feature matrix) onto `mask`.

    Parameters
    ----------
    features : :class:`FeatureVector` or ndarray
        One vector or an (N, 42) matrix.
    mask : :class:`FeatureMask`

    Returns
    -------
    ndarray
        Shape (mask.width,) or (N, mask.width).

    """
    values = features.values if isinstance(features, FeatureVector) else (
        np.asarray(features, dtype=np.float64)
    )
    if values.shape[-1] != NUM_FEATURES:
        raise FeatureError(_bad_width.format(values.shape[-1], NUM_FEATURES))
    return values[..., mask.columns()]


def export_features(table, path, n_max=N_MAX):
    """Write ``n, <42 features>, g`` rows for a comet table as CSV."""
    df = pd.DataFrame(feature_matrix(table.n, n_max), columns=FEATURE_NAMES)
    df.insert(0, "n", table.n)
    df["g"] = table.g
    df.to_csv(path, index=False)
    return df
