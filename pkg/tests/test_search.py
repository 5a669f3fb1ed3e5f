import os

import numpy as np
import numpy.testing as npt
import pytest

from goldpart.api import fit_goldbach_model, goldbach_comet
from goldpart.features import MASKS, base_digits, make_features
from goldpart.neuralnet import (
    MLP,
    IncompatibleModelError,
    MLPConfig,
    TrainedModel,
    init_mlp,
)
from goldpart.primes import build_sieve
from goldpart.search import (
    REFERENCE_BOUND,
    DigitCandidate,
    HillClimbLimitError,
    SearchError,
    crt_combine,
    crt_residues,
    enumerate_pattern,
    hill_climb,
    reference_candidate,
    reference_realizations,
    residue_of,
    scan_suspicious,
)

FULL = os.environ.get("GOLDPART_FULL") == "1"


def linear_net(weights, bias=0.0):
    """42-input linear model with the given coefficients."""
    config = MLPConfig(input_width=42, hidden_layers=0)
    w = np.asarray(weights, dtype=np.float64).reshape(1, 42)
    return MLP(config, [w], [np.array([bias])])


def digit_sum_net(sign=1.0):
    w = np.zeros(42)
    w[:40] = sign
    return linear_net(w)


def test_hill_climb_digit_sum():
    """Digit-sum model: climbing must drive every free digit to 0."""
    report = hill_climb(digit_sum_net(), start_n=1_000_000)
    preds = [p for _, _, p in report.trajectory]
    assert all(a >= b for a, b in zip(preds, preds[1:]))
    assert report.final.prediction == 0.0
    assert all(v == 0 for d in report.final.digit_sets for v in d)
    assert report.trajectory[-1][1] == 0
    assert report.sweeps == 2
    assert crt_combine(report.final).smallest_solution == 0
    assert report.final.anchor_n == 1_000_000
    npt.assert_allclose(report.final.anchor_log, np.log(1e6))
    assert list(report.to_dataframe().columns) == [
        "sweep", "digits_changed", "prediction"
    ]


def test_hill_climb_even_constraint():
    report = hill_climb(digit_sum_net(-1.0), start_n=1000)
    final = report.final
    assert final.digits_of(2)[0] == 0
    assert all(v == 6 for v in final.digits_of(7))
    assert crt_combine(final).smallest_solution % 2 == 0
    assert final.prediction == -(9 * 1 + 10 * 2 + 10 * 4 + 10 * 6)

    free = hill_climb(digit_sum_net(-1.0), start_n=1000,
                      even_constraint=False)
    assert free.final.digits_of(2)[0] == 1
    assert free.final.prediction < final.prediction


def test_hill_climb_constant_model():
    report = hill_climb(linear_net(np.zeros(42), bias=5.0), start_n=123_456)
    assert report.sweeps == 1
    assert report.final.prediction == 5.0
    for d in report.final.digit_sets:
        assert d == base_digits(123_456, d.base)


def test_hill_climb_limits():
    with pytest.raises(HillClimbLimitError):
        hill_climb(digit_sum_net(), max_sweeps=1)

    masked = TrainedModel(
        mlp=init_mlp(MLPConfig(input_width=32, hidden_layers=1,
                               hidden_width=4)),
        mask=MASKS["without-base3"],
    )
    with pytest.raises(IncompatibleModelError):
        hill_climb(masked)
    with pytest.raises(IncompatibleModelError):
        hill_climb(init_mlp(MLPConfig(input_width=41, hidden_layers=0)))

    # a random deep net still settles with a monotone trajectory
    net = init_mlp(MLPConfig(hidden_layers=2, hidden_width=16, init_seed=5))
    report = hill_climb(TrainedModel(mlp=net))
    preds = [p for _, _, p in report.trajectory]
    assert all(a >= b for a, b in zip(preds, preds[1:]))


def test_crt():
    result = crt_residues({2: 0, 3: 2, 5: 4}, {2: 2, 3: 3, 5: 5})
    assert result.smallest_solution == 14
    assert result.modulus == 30
    assert result.verify()
    assert "ok" in str(result)

    with pytest.raises(SearchError):
        crt_residues({2: 0, 3: 1}, {2: 4, 3: 6})
    with pytest.raises(SearchError):
        crt_residues({2: 0, 3: 1}, {2: 4})

    x = 987_654_321_012_345_678
    residues = {b: x % b ** 10 for b in (2, 3, 5, 7)}
    full = crt_residues(residues)
    assert full.modulus == 210 ** 10
    assert full.smallest_solution == x

    partial = crt_residues({2: 14, 7: 14})
    assert partial.moduli == {2: 2 ** 10, 7: 7 ** 10}
    assert partial.smallest_solution == 14
    with pytest.raises(SearchError):
        crt_residues({11: 3})


def test_residue_of():
    assert residue_of(base_digits(100, 3)) == 100
    assert residue_of(base_digits(3 ** 10 + 7, 3)) == 7
    candidate = DigitCandidate(
        digit_sets=[base_digits(123_456_789, b) for b in (2, 3, 5, 7)]
    )
    assert crt_combine(candidate).smallest_solution == 123_456_789
    with pytest.raises(SearchError):
        DigitCandidate(digit_sets=[base_digits(5, 3)] * 4)


def test_candidate_features():
    n = 123_456
    candidate = DigitCandidate(
        digit_sets=[base_digits(n, b) for b in (2, 3, 5, 7)], anchor_n=n
    )
    npt.assert_allclose(
        candidate.features(n_max=10 ** 6),
        make_features(n, n_max=10 ** 6).values,
    )


def test_reference_realizations():
    """Published candidate realized under both digit orders."""
    results = reference_realizations()
    assert sorted(results) == ["lsd_first", "msd_first"]
    for result, below in results.values():
        assert result.verify()
        assert below == (result.smallest_solution < REFERENCE_BOUND)
        assert 0 <= result.smallest_solution < result.modulus
    msd, _ = results["msd_first"]
    assert msd.residues[2] == 2 ** 5 + 2 ** 7
    assert msd.residues[2] % 2 == 0
    assert msd.residues[3] % 3 == 2
    assert msd.residues[5] % 5 == 4
    assert msd.residues[7] % 7 == 0
    lsd, _ = results["lsd_first"]
    assert lsd.residues[2] == 2 ** 2 + 2 ** 4

    assert reference_candidate("lsd_first").digits_of(5)[9] == 4
    with pytest.raises(SearchError):
        reference_candidate("middle_out")


def test_enumerate_pattern():
    x = 987_654_321_000
    residues = {b: x % b ** 10 for b in (2, 3, 5, 7)}
    assert enumerate_pattern(residues, limit=10 ** 12) == x
    assert enumerate_pattern(residues, limit=x) is None
    assert enumerate_pattern(residues, limit=x + 1) == x
    assert crt_residues(residues).smallest_solution == x

    small = {2: 0, 3: 2, 5: 4}
    moduli = {2: 2, 3: 3, 5: 5}
    assert enumerate_pattern(small, moduli, limit=100, pattern_base=5) == 14
    assert enumerate_pattern(small, moduli, limit=14, pattern_base=5) is None

    with pytest.raises(SearchError):
        enumerate_pattern(residues, limit=0)
    with pytest.raises(SearchError):
        enumerate_pattern(residues, limit=2 ** 63)


def number_model(sign=-1.0, n_max=2000):
    w = np.zeros(42)
    w[40] = sign
    return TrainedModel(mlp=linear_net(w), n_max=n_max)


def test_scan_suspicious():
    sieve = build_sieve(2000)
    report = scan_suspicious(number_model(), 4, 2000, 5, sieve, threads=1)
    assert [r[0] for r in report.rows] == [2000, 1998, 1996, 1994, 1992]
    assert all(g >= 1 for _, _, g in report.rows)
    assert report.violations == []

    pooled = scan_suspicious(number_model(), 4, 2000, 5, sieve, threads=2)
    assert pooled.rows == report.rows

    # ties go to the smaller n
    flat = TrainedModel(mlp=linear_net(np.zeros(42)), n_max=2000)
    ties = scan_suspicious(flat, 4, 2000, 3, verify=False, threads=1)
    assert [r[0] for r in ties.rows] == [4, 6, 8]
    assert [r[2] for r in ties.rows] == [None, None, None]

    assert len(scan_suspicious(flat, 4, 8, 10, verify=False).rows) == 3
    with pytest.raises(SearchError):
        scan_suspicious(flat, 4, 2002, 3)
    with pytest.raises(SearchError):
        scan_suspicious(flat, 4, 100, 0)


@pytest.mark.skipif(not FULL, reason="set GOLDPART_FULL=1")
def test_hill_climb_trained_model():
    """On the fully trained network the climb ends at a negative
    predicted count; the exact value depends on the weights.
    """
    model, _, _ = fit_goldbach_model(goldbach_comet(4, 4_000_000))
    report = hill_climb(model)
    preds = [p for _, _, p in report.trajectory]
    assert all(a >= b for a, b in zip(preds, preds[1:]))
    assert report.final.prediction == preds[-1]
    assert preds[-1] < 0


if __name__ == "__main__":
    test_hill_climb_digit_sum()
    test_crt()
    test_reference_realizations()
