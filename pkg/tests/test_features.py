import math

import numpy as np
import numpy.testing as npt
import pandas as pd
import pytest

from goldpart.features import (
    FEATURE_NAMES,
    MASKS,
    BaseDigits,
    FeatureError,
    FeatureMask,
    apply_mask,
    base_digits,
    export_features,
    feature_matrix,
    increment_digits_by_two,
    iter_features,
    make_features,
)
from goldpart.partitions import build_comet
from goldpart.primes import build_sieve


# frozen layout for n = 100, n_max = 4e6
GOLDEN_100 = (
    [0, 0, 1, 0, 0, 1, 1, 0, 0, 0]
    + [1, 0, 2, 0, 1, 0, 0, 0, 0, 0]
    + [0, 0, 4, 0, 0, 0, 0, 0, 0, 0]
    + [2, 0, 2, 0, 0, 0, 0, 0, 0, 0]
    + [100 / 4e6, math.log(100)]
)


def test_base_digits():
    assert base_digits(100, 2).digits == (0, 0, 1, 0, 0, 1, 1, 0, 0, 0)
    assert base_digits(0, 7).digits == (0,) * 10
    assert base_digits(100, 3).digits == (1, 0, 2, 0, 1, 0, 0, 0, 0, 0)
    assert base_digits(100, 5).digits == (0, 0, 4, 0, 0, 0, 0, 0, 0, 0)
    # only n mod 2^10 survives
    assert base_digits(1024 + 6, 2) == base_digits(6, 2)

    with pytest.raises(FeatureError):
        base_digits(100, 10)
    with pytest.raises(FeatureError):
        base_digits(-2, 3)
    with pytest.raises(FeatureError):
        BaseDigits(base=3, digits=[3] + [0] * 9)
    with pytest.raises(FeatureError):
        BaseDigits(base=3, digits=[0] * 9)


def test_increment_digits_by_two():
    d = BaseDigits(base=3, digits=[2] + [0] * 9)
    assert increment_digits_by_two(d).digits == (1, 1) + (0,) * 8
    d = BaseDigits(base=2, digits=[0] * 10)
    assert increment_digits_by_two(d).digits == (0, 1) + (0,) * 8
    # wraps modulo base^10
    top = BaseDigits(base=5, digits=[4] * 10)
    assert increment_digits_by_two(top).digits == (1,) + (0,) * 9

    for b in (2, 3, 5, 7):
        d = base_digits(0, b)
        for n in range(0, 10_001, 2):
            assert d == base_digits(n, b)
            d = increment_digits_by_two(d)


def test_make_features():
    """Layout is frozen; if this fails every saved model is invalid."""
    npt.assert_array_equal(make_features(100).values, GOLDEN_100)
    fv = make_features(4)
    npt.assert_allclose(fv[40], 1e-6)
    npt.assert_allclose(fv[41], 1.3863, atol=1e-4)
    assert len(fv) == 42
    assert make_features(4 * 10 ** 6)[40] == 1.0
    npt.assert_array_equal(make_features(100).values,
                           make_features(100).values)

    with pytest.raises(FeatureError):
        make_features(2)
    with pytest.raises(FeatureError):
        make_features(101)
    with pytest.raises(FeatureError):
        make_features(4 * 10 ** 6 + 2)


def test_feature_matrix():
    ns = np.arange(4, 5000, 2)
    mat = feature_matrix(ns)
    assert mat.shape == (ns.size, 42)
    for i in (0, 48, 1000, ns.size - 1):
        npt.assert_array_equal(mat[i], make_features(ns[i]).values)
    # even numbers have base-2 digit 0 == 0
    assert np.all(mat[:, 0] == 0)

    walked = np.array([fv.values for _, fv in iter_features(4, 4998)])
    npt.assert_array_equal(walked, mat)

    with pytest.raises(FeatureError):
        feature_matrix([4, 7])


def test_crt_round_trip():
    # every base digit set is n mod b^10; together they pin n below 3^10
    for n in (4, 100, 12_346, 58_000):
        fv = make_features(n)
        for k, b in enumerate((2, 3, 5, 7)):
            digits = fv.values[10 * k : 10 * k + 10].astype(int)
            value = sum(int(d) * b ** i for i, d in enumerate(digits))
            assert value == n % b ** 10


def test_masks():
    fv = make_features(100)
    npt.assert_array_equal(apply_mask(fv, MASKS["full"]), fv.values)

    without3 = apply_mask(fv, MASKS["without-base3"])
    assert without3.size == 32
    npt.assert_array_equal(
        without3, np.delete(fv.values, np.arange(10, 20))
    )

    lsd = FeatureMask(lsd_only=True, include_number=False, include_log=False)
    npt.assert_array_equal(apply_mask(fv, lsd), fv.values[[0, 10, 20, 30]])
    assert MASKS["lsd-only"].width == 6
    assert MASKS["without-log"].width == 41

    mat = feature_matrix(np.arange(4, 104, 2))
    assert apply_mask(mat, MASKS["without-base7"]).shape == (50, 32)

    with pytest.raises(FeatureError):
        FeatureMask(
            include_base2=False,
            include_base3=False,
            include_base5=False,
            include_base7=False,
            include_number=False,
            include_log=False,
        )
    with pytest.raises(FeatureError):
        apply_mask(np.zeros(41), MASKS["full"])


def test_mask_names():
    for name, mask in MASKS.items():
        assert FeatureMask.from_name(name) == mask
        assert mask.name == name
    assert FeatureMask.from_name("without_base5") == MASKS["without-base5"]
    assert MASKS["full"].is_full
    assert not MASKS["lsd-only"].is_full
    assert FeatureMask(include_base2=False, include_log=False).name \
        == "custom"
    with pytest.raises(FeatureError):
        FeatureMask.from_name("without-base11")


def test_export_features(tmp_path):
    table = build_comet(4, 100, build_sieve(100))
    path = str(tmp_path / "features.csv")
    export_features(table, path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["n"] + list(FEATURE_NAMES) + ["g"]
    assert len(df) == 49
    row = df[df.n == 100].iloc[0]
    npt.assert_allclose(row[list(FEATURE_NAMES)].values, GOLDEN_100)
    assert row.g == 6


if __name__ == "__main__":
    test_base_digits()
    test_increment_digits_by_two()
    test_make_features()
    test_masks()
