import os

import numpy as np
import numpy.testing as npt
import pytest

import goldpart
from goldpart import fit_goldbach_model, goldbach_comet, gpread
from goldpart.evaluation import compare_all
from goldpart.neuralnet import save_model
from goldpart.search import hill_climb

SLOW = os.environ.get("GOLDPART_SLOW") == "1"


def test_goldbach_comet():
    table = goldbach_comet(4, 12)
    npt.assert_array_equal(table.g, [1, 1, 1, 2, 1])
    direct = goldbach_comet(4, 1000, method="direct", threads=1)
    npt.assert_array_equal(direct.g, goldbach_comet(4, 1000).g)
    assert isinstance(goldpart.__version__, str)


def test_fit_goldbach_model(tmp_path):
    table = goldbach_comet(4, 4000)
    model, report, split = fit_goldbach_model(
        table,
        split_options={"seed": 2},
        mask="without-base2",
        model_options={"hidden_layers": 1, "hidden_width": 8},
        train_options={"max_epochs": 4, "batch_size": 128},
        n_max=4000,
    )
    assert model.mask.name == "without-base2"
    assert model.mlp.input_width == 32
    assert len(report.per_epoch) == 4
    assert split.spec.seed == 2
    assert split.sizes() == (1599, 199, 201)

    path = str(tmp_path / "m.gpm")
    save_model(model, path)
    loaded = gpread(path)
    ns = np.arange(4, 4002, 2)
    npt.assert_array_equal(loaded.predict_numbers(ns),
                           model.predict_numbers(ns))

    again, _, _ = fit_goldbach_model(
        table,
        split=split,
        mask="without-base2",
        model_options={"hidden_layers": 1, "hidden_width": 8},
        train_options={"max_epochs": 4, "batch_size": 128},
        n_max=4000,
    )
    for a, b in zip(again.mlp.parameters(), model.mlp.parameters()):
        npt.assert_array_equal(a, b)


@pytest.mark.skipif(not SLOW, reason="set GOLDPART_SLOW=1")
def test_reduced_training_profile():
    table = goldbach_comet(4, 400_000)
    model, report, split = fit_goldbach_model(
        table, train_options={"max_epochs": 30}, n_max=400_000
    )
    comparison = compare_all(model, table, split)
    assert comparison["model"].error_rate <= 0.08
    climb = hill_climb(model, start_n=200_000)
    preds = [p for _, _, p in climb.trajectory]
    assert all(a >= b for a, b in zip(preds, preds[1:]))


if __name__ == "__main__":
    test_goldbach_comet()
    test_fit_goldbach_model()
