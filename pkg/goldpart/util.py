import hashlib
import os
import warnings

import numpy as np
import pandas as pd


class GoldpartWarning(UserWarning):
    pass


class ArtifactReadWarning(GoldpartWarning):
    pass


def worker_count(threads=None):
    """Number of worker processes, capped by `threads` if given."""
    available = os.cpu_count() or 1
    if threads is None or threads <= 0:
        return available
    return min(threads, available)


def even_chunks(lo, hi, nchunks):
    """Split the even numbers of [lo, hi] into contiguous sub-ranges.

    Parameters
    ----------
    lo, hi : int
        Even, inclusive bounds, `lo` <= `hi`.
    nchunks : int
        Desired number of chunks. Fewer are returned if the range is
        too short.

    Returns
    -------
    list of (int, int)
        Inclusive even (lo, hi) bounds, ascending and gap free.

    """
    count = (hi - lo) // 2 + 1
    nchunks = max(1, min(nchunks, count))
    edges = np.linspace(0, count, nchunks + 1).astype(np.int64)
    chunks = []
    for start, stop in zip(edges[:-1], edges[1:]):
        if stop > start:
            chunks.append((lo + 2 * int(start), lo + 2 * (int(stop) - 1)))
    return chunks


def even_range(lo, hi):
    """Array of the even numbers in [lo, hi]."""
    return np.arange(lo, hi + 1, 2, dtype=np.int64)


def sha256(data):
    return hashlib.sha256(data).digest()


def index_digest(indices):
    """Order-independent hash of an index set, as a hex string."""
    arr = np.sort(np.asarray(indices, dtype=np.int64))
    return hashlib.sha256(arr.tobytes()).hexdigest()


def read_csv_columns(path, columns, **kwargs):
    """pd.read_csv that insists on the expected header columns.

    Raises
    ------
    ValueError
        If the file lacks any of `columns`.
    """
    df = pd.read_csv(path, **kwargs)
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ValueError(
            "{} is missing column(s) {}".format(path, ", ".join(missing))
        )
    return df


def warn(mssg, category=GoldpartWarning):
    warnings.warn(mssg, category, stacklevel=2)


def read_flat_config(path):
    """Read a flat ``key=value`` text file into a dict of strings.

    Blank lines and lines starting with ``#`` are ignored. Keys are
    normalized so that ``hidden-layers`` and ``hidden_layers`` agree.
    """
    options = {}
    with open(path, "rt") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(
                    "{}:{}: expected key=value, got {!r}".format(
                        path, lineno, line
                    )
                )
            key, val = line.split("=", 1)
            options[key.strip().replace("-", "_")] = val.strip()
    return options
