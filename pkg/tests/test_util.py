import numpy as np
import numpy.testing as npt
import pytest

from goldpart.util import (
    even_chunks,
    even_range,
    index_digest,
    read_csv_columns,
    read_flat_config,
    worker_count,
)


def test_even_chunks():
    chunks = even_chunks(4, 100, 5)
    assert chunks[0][0] == 4 and chunks[-1][1] == 100
    for (_, hi), (lo, _) in zip(chunks, chunks[1:]):
        assert lo == hi + 2
    covered = np.concatenate([even_range(lo, hi) for lo, hi in chunks])
    npt.assert_array_equal(covered, even_range(4, 100))

    assert even_chunks(4, 8, 10) == [(4, 4), (6, 6), (8, 8)]
    assert even_chunks(4, 4, 3) == [(4, 4)]


def test_worker_count():
    assert worker_count(1) == 1
    assert worker_count() >= 1
    assert worker_count(0) == worker_count()


def test_index_digest():
    assert index_digest([3, 1, 2]) == index_digest([1, 2, 3])
    assert index_digest([1, 2]) != index_digest([1, 2, 3])


def test_read_csv_columns(tmp_path):
    path = str(tmp_path / "x.csv")
    with open(path, "w") as f:
        f.write("n,g\n4,1\n")
    assert list(read_csv_columns(path, ["n", "g"]).g) == [1]
    with pytest.raises(ValueError):
        read_csv_columns(path, ["n", "prediction"])


def test_read_flat_config(tmp_path):
    path = str(tmp_path / "run.cfg")
    with open(path, "w") as f:
        f.write("# comment\n\nhidden-layers = 3\nseed=7\nname = a=b\n")
    assert read_flat_config(path) == {
        "hidden_layers": "3", "seed": "7", "name": "a=b"
    }
    with open(path, "w") as f:
        f.write("seed 7\n")
    with pytest.raises(ValueError):
        read_flat_config(path)


if __name__ == "__main__":
    test_even_chunks()
    test_read_flat_config()
