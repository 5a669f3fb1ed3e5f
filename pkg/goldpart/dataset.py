"""
Shuffled train/validation/test splits of a comet table.

The permutation comes from numpy's PCG64 bit generator seeded with
``SplitSpec.seed``; the generator name and seed are written to the
split file so a split can be reproduced anywhere. Train and validation
sizes are floored, the test set takes the remainder.

"""
import math

import attr
import numpy as np


class Error(Exception):
    pass


class SplitError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class SplitFileError(Error):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = "line {}: {}".format(lineno, message)
        super().__init__(message)
        self.message = message
        self.lineno = lineno


SPLIT_FILE_VERSION = 1
RNG_NAME = "PCG64"
BLOCKS = ("train", "validation", "test")

_bad_fraction = "fractions must be positive and sum to 1, got {}"
_empty_table = "cannot split an empty table"
_empty_indices = "no indices selected"
_bad_union = "split blocks do not partition {} records"


def _check_fractions(instance, attribute, value):
    fr = (
        instance.train_fraction,
        instance.validation_fraction,
        instance.test_fraction,
    )
    if min(fr) <= 0 or abs(sum(fr) - 1) > 1e-9:
        raise SplitError(_bad_fraction.format(fr))


@attr.s(frozen=True)
class SplitSpec(object):
    """Split fractions and the permutation seed."""

    train_fraction = attr.ib(default=0.8, converter=float)
    validation_fraction = attr.ib(default=0.1, converter=float)
    test_fraction = attr.ib(
        default=0.1, converter=float, validator=_check_fractions
    )
    seed = attr.ib(default=0, converter=int)

    @property
    def fractions(self):
        return (
            self.train_fraction,
            self.validation_fraction,
            self.test_fraction,
        )


@attr.s(frozen=True, eq=False)
class DataSplit(object):
    """Disjoint index blocks into a comet table.

    Attributes
    ----------
    train, validation, test : ndarray of int64
        Record indices, in permutation order.
    spec : :class:`SplitSpec`
    n_records : int
        Size of the table the split was drawn for.

    """

    train = attr.ib()
    validation = attr.ib()
    test = attr.ib()
    spec = attr.ib()
    n_records = attr.ib()

    def __attrs_post_init__(self):
        every = np.concatenate([self.train, self.validation, self.test])
        if every.size != self.n_records or not np.array_equal(
            np.sort(every), np.arange(self.n_records)
        ):
            raise SplitError(_bad_union.format(self.n_records))

    def blocks(self):
        return dict(zip(BLOCKS, (self.train, self.validation, self.test)))

    def sizes(self):
        return tuple(len(b) for b in (self.train, self.validation, self.test))

    def __eq__(self, other):
        return (
            isinstance(other, DataSplit)
            and self.spec == other.spec
            and self.n_records == other.n_records
            and all(
                np.array_equal(a, b)
                for a, b in zip(self.blocks().values(), other.blocks().values())
            )
        )


def shuffle_split(table, spec=None):
    """Seeded permutation of `table` cut into train/validation/test.

    Parameters
    ----------
    table : :class:`~goldpart.partitions.CometTable` or sized sequence
    spec : :class:`SplitSpec`, optional
        Default is 0.8/0.1/0.1 with seed 0.

    Returns
    -------
    :class:`DataSplit`

    """
    spec = SplitSpec() if spec is None else spec
    size = len(table)
    if size == 0:
        raise SplitError(_empty_table)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    perm = rng.permutation(size).astype(np.int64)
    n_train = math.floor(size * spec.train_fraction + 1e-9)
    n_val = math.floor(size * spec.validation_fraction + 1e-9)
    return DataSplit(
        train=perm[:n_train],
        validation=perm[n_train : n_train + n_val],
        test=perm[n_train + n_val :],
        spec=spec,
        n_records=size,
    )


def target_stats(table, indices):
    """Mean and population variance of g over `indices`."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise SplitError(_empty_indices)
    g = table.g[indices].astype(np.float64)
    return float(g.mean()), float(g.var())


def save_split(split, path):
    """Write `split` as a versioned text file."""
    spec = split.spec
    lines = [
        "# goldpart split",
        "version={}".format(SPLIT_FILE_VERSION),
        "rng={}".format(RNG_NAME),
        "seed={}".format(spec.seed),
        "fractions={!r},{!r},{!r}".format(*spec.fractions),
        "records={}".format(split.n_records),
    ]
    for name, block in split.blocks().items():
        lines.append("[{}] {}".format(name, len(block)))
        lines.extend(map(str, block.tolist()))
    with open(path, "wt") as f:
        f.write("\n".join(lines) + "\n")


def _header_value(lines, lineno, key):
    if lineno > len(lines):
        raise SplitFileError("unexpected end of file", lineno)
    line = lines[lineno - 1]
    prefix = key + "="
    if not line.startswith(prefix):
        raise SplitFileError("expected '{}...'".format(prefix), lineno)
    return line[len(prefix) :]


def load_split(path):
    """Read a split file written by :func:`save_split`.

    Raises
    ------
    SplitFileError
        Unreadable file, wrong version tag, or malformed contents; the
        message carries the offending line number.

    """
    try:
        with open(path, "rt") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise SplitFileError("cannot read {}: {}".format(path, e))

    if not lines or not lines[0].startswith("# goldpart split"):
        raise SplitFileError("not a goldpart split file", 1)
    version = _header_value(lines, 2, "version")
    if version != str(SPLIT_FILE_VERSION):
        raise SplitFileError("unsupported version {!r}".format(version), 2)
    rng = _header_value(lines, 3, "rng")
    if rng != RNG_NAME:
        raise SplitFileError("unsupported rng {!r}".format(rng), 3)
    try:
        seed = int(_header_value(lines, 4, "seed"))
    except ValueError:
        raise SplitFileError("bad seed", 4)
    try:
        fractions = _header_value(lines, 5, "fractions").split(",")
        fractions = [float(x) for x in fractions]
        spec = SplitSpec(*fractions, seed=seed)
    except (TypeError, ValueError) as e:
        raise SplitFileError("bad fractions: {}".format(e), 5)
    try:
        n_records = int(_header_value(lines, 6, "records"))
    except ValueError:
        raise SplitFileError("bad record count", 6)

    blocks = {}
    lineno = 7
    for name in BLOCKS:
        if lineno > len(lines):
            raise SplitFileError("missing [{}] block".format(name), lineno)
        head = lines[lineno - 1].split()
        if len(head) != 2 or head[0] != "[{}]".format(name):
            raise SplitFileError("expected [{}] block".format(name), lineno)
        try:
            count = int(head[1])
        except ValueError:
            raise SplitFileError("bad block size", lineno)
        values = []
        for i in range(count):
            at = lineno + 1 + i
            if at > len(lines):
                raise SplitFileError("truncated [{}] block".format(name), at)
            try:
                values.append(int(lines[at - 1]))
            except ValueError:
                raise SplitFileError("bad index {!r}".format(lines[at - 1]), at)
        blocks[name] = np.array(values, dtype=np.int64)
        lineno += 1 + count
    if lineno <= len(lines):
        raise SplitFileError("trailing content", lineno)

    try:
        return DataSplit(spec=spec, n_records=n_records, **blocks)
    except SplitError as e:
        raise SplitFileError(e.message)
