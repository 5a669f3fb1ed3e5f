"""Numeric constants"""

from collections import namedtuple


class AdamDefaults(namedtuple("AdamDefaults", "learning_rate beta1 beta2 epsilon")):
    """
    Attributes
    ----------
    learning_rate, beta1, beta2, epsilon : float
        Step size, first/second moment decay rates, and denominator
        fuzz of the Adam update.
    """


class DatasetRange(namedtuple("DatasetRange", "lo hi")):
    """
    Attributes
    ----------
    lo, hi : int
        Inclusive even bounds of the comet dataset.
    """


BASES = (2, 3, 5, 7)
NUM_DIGITS = 10  # digits kept per base, least significant first
NUM_FEATURES = len(BASES) * NUM_DIGITS + 2  # digits + n/N_max + ln(n)

N_MAX = 4_000_000  # normalization constant for feature 40
DATASET_RANGE = DatasetRange(lo=4, hi=N_MAX)

C2_TRUNCATION = 1_000_000  # largest prime in the twin prime product
C2_PUBLISHED = 0.6601618158

BAKER_FACTOR = 3 / 5  # G2 = 3/5 G1
LOWER_BOUND_FACTOR = 2 / 3  # lb = 2/3 G1

ADAM = AdamDefaults(learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8)

HIDDEN_WIDTH = 200
DEPTHS = (0, 3, 5, 7)
BATCH_SIZE = 1024
MAX_EPOCHS = 200

SEARCH_START = 1_000_000
MAX_SWEEPS = 10_000

# CRT moduli, one per base: 2^10, 3^10, 5^10, 7^10
DIGIT_MODULI = tuple(b ** NUM_DIGITS for b in BASES)
