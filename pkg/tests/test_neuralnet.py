import numpy as np
import numpy.testing as npt
import pytest

from goldpart.features import MASKS, apply_mask, feature_matrix
from goldpart.neuralnet import (
    MLP,
    AdamState,
    IncompatibleModelError,
    MLPConfig,
    ModelChecksumError,
    ModelFileError,
    NeuralNetError,
    TrainConfig,
    TrainedModel,
    TrainingData,
    TrainingDivergedError,
    adam_step,
    backward,
    forward,
    init_mlp,
    load_model,
    loss_and_gradients,
    model_config,
    mse,
    predict,
    save_model,
    train,
    train_config,
)
from goldpart.util import sha256


def linear_data(seed=0, ntrain=100, nval=20):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, (ntrain + nval, 1))
    y = 2 * x[:, 0]
    return TrainingData(x[:ntrain], y[:ntrain], x[ntrain:], y[ntrain:])


def numerical_gradients(mlp, x, y, eps=1e-6):
    grads = []
    for p in mlp.parameters():
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = mse(predict(mlp, x), y)
            flat[i] = keep - eps
            down = mse(predict(mlp, x), y)
            flat[i] = keep
            gflat[i] = (up - down) / (2 * eps)
        grads.append(g)
    return grads


def test_gradients_match_finite_differences():
    """Backprop against central differences on a few small nets."""
    rng = np.random.default_rng(42)
    for trial in range(5):
        config = MLPConfig(
            input_width=int(rng.integers(2, 6)),
            hidden_layers=int(rng.integers(0, 4)),
            hidden_width=int(rng.integers(3, 8)),
            init_seed=trial,
        )
        mlp = init_mlp(config)
        x = rng.normal(size=(7, config.input_width))
        y = rng.normal(size=7)
        analytic = backward(mlp, x, y)
        numeric = numerical_gradients(mlp, x, y)
        a = np.concatenate([g.ravel() for g in analytic])
        n = np.concatenate([g.ravel() for g in numeric])
        rel = np.linalg.norm(a - n) / max(
            np.linalg.norm(a) + np.linalg.norm(n), 1e-12
        )
        assert rel < 1e-4, (trial, rel)


def test_loss_matches_mse():
    mlp = init_mlp(MLPConfig(input_width=4, hidden_layers=2, hidden_width=5))
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(9, 4)), rng.normal(size=9)
    loss, grads = loss_and_gradients(mlp, x, y)
    npt.assert_allclose(loss, mse(predict(mlp, x), y))
    assert [g.shape for g in grads] == [p.shape for p in mlp.parameters()]
    with pytest.raises(NeuralNetError):
        loss_and_gradients(mlp, x, y[:-1])


def test_init_mlp():
    config = MLPConfig()
    mlp = init_mlp(config)
    assert [w.shape for w in mlp.weights] == (
        [(200, 42)] + [(200, 200)] * 4 + [(1, 200)]
    )
    assert all(np.all(b == 0) for b in mlp.biases)
    npt.assert_allclose(mlp.weights[0].std(), np.sqrt(2 / 42), rtol=0.05)
    npt.assert_allclose(mlp.weights[1].std(), np.sqrt(2 / 200), rtol=0.05)
    again = init_mlp(config)
    for a, b in zip(mlp.parameters(), again.parameters()):
        npt.assert_array_equal(a, b)
    assert mlp.n_params == 42 * 200 + 200 + 4 * (200 * 200 + 200) + 201

    linear = init_mlp(MLPConfig(input_width=3, hidden_layers=0))
    assert [w.shape for w in linear.weights] == [(1, 3)]


def test_config_validation():
    with pytest.raises(NeuralNetError):
        MLPConfig(hidden_layers=-1)
    with pytest.raises(NeuralNetError):
        MLPConfig(activation="tanh")
    with pytest.raises(NeuralNetError):
        MLPConfig(hidden_width=0)
    with pytest.raises(NeuralNetError):
        TrainConfig(batch_size=0)
    with pytest.raises(NeuralNetError):
        model_config(42, {"hidden_depth": 3})
    with pytest.raises(NeuralNetError):
        train_config({"epochs": 3})
    assert model_config(32, {"hidden_layers": 3}).widths() == (
        [32, 200, 200, 200, 1]
    )
    assert train_config().batch_size == 1024

    config = MLPConfig(input_width=2, hidden_layers=1, hidden_width=3)
    with pytest.raises(NeuralNetError):
        MLP(config, [np.zeros((3, 2)), np.zeros((1, 4))],
            [np.zeros(3), np.zeros(1)])


def test_forward_and_predict():
    mlp = init_mlp(MLPConfig(input_width=5, hidden_layers=2, hidden_width=4))
    x = np.random.default_rng(3).normal(size=(11, 5))
    out = predict(mlp, x)
    assert out.shape == (11,)
    npt.assert_allclose([forward(mlp, row) for row in x], out)
    with pytest.raises(NeuralNetError):
        forward(mlp, x)
    with pytest.raises(NeuralNetError):
        forward(mlp, x[0, :4])

    # a hand-built net: relu(x0 - x1) + 1
    config = MLPConfig(input_width=2, hidden_layers=1, hidden_width=1)
    net = MLP(config, [np.array([[1.0, -1.0]]), np.array([[1.0]])],
              [np.zeros(1), np.ones(1)])
    assert forward(net, [3.0, 1.0]) == 3.0
    assert forward(net, [1.0, 3.0]) == 1.0


def test_mse():
    assert mse([1, 2, 3], [1, 2, 5]) == 4 / 3
    with pytest.raises(NeuralNetError):
        mse([1, 2], [1])
    with pytest.raises(NeuralNetError):
        mse([], [])


def test_adam_step():
    mlp = init_mlp(MLPConfig(input_width=2, hidden_layers=0))
    state = AdamState.for_model(mlp, learning_rate=0.1)
    before = mlp.weights[0].copy()
    grads = [np.array([[1.0, -1.0]]), np.array([0.0])]
    adam_step(mlp, grads, state)
    # first bias-corrected step moves each weight by lr against the sign
    npt.assert_allclose(mlp.weights[0] - before, [[-0.1, 0.1]], atol=1e-6)
    npt.assert_allclose(mlp.biases[0], 0.0)
    assert state.step_count == 1

    kept = [p.copy() for p in mlp.parameters()]
    with pytest.raises(TrainingDivergedError):
        adam_step(mlp, [np.array([[np.nan, 0.0]]), np.zeros(1)], state)
    for a, b in zip(kept, mlp.parameters()):
        npt.assert_array_equal(a, b)
    assert state.step_count == 1
    with pytest.raises(NeuralNetError):
        adam_step(mlp, grads[:1], state)


def test_train_linear_task():
    """A linear net learns y = 2x; a regression here usually means the
    Adam update or the snapshot logic changed.
    """
    data = linear_data()
    config = MLPConfig(input_width=1, hidden_layers=0)
    tcfg = TrainConfig(batch_size=10, max_epochs=300, learning_rate=0.01)
    mlp, report = train(config, tcfg, data)
    assert report.best_validation_mse < 1e-3
    npt.assert_allclose(mlp.weights[0][0, 0], 2.0, atol=0.05)
    npt.assert_allclose(mlp.biases[0][0], 0.0, atol=0.05)
    npt.assert_allclose(
        mse(predict(mlp, data.x_validation), data.y_validation),
        report.best_validation_mse,
    )
    df = report.to_dataframe()
    assert list(df.columns) == ["epoch", "train_mse", "validation_mse"]
    assert len(df) == 300
    assert df.validation_mse.min() == report.best_validation_mse
    assert df.validation_mse.idxmin() + 1 == report.best_epoch


def test_train_deterministic():
    data = linear_data(seed=4)
    config = MLPConfig(input_width=1, hidden_layers=2, hidden_width=8)
    tcfg = TrainConfig(batch_size=16, max_epochs=20, learning_rate=0.01)
    a, ra = train(config, tcfg, data)
    b, rb = train(config, tcfg, data)
    for p, q in zip(a.parameters(), b.parameters()):
        npt.assert_array_equal(p, q)
    assert ra.per_epoch == rb.per_epoch


def test_eval_every():
    data = linear_data()
    config = MLPConfig(input_width=1, hidden_layers=0)
    tcfg = TrainConfig(batch_size=10, max_epochs=7, eval_every=3)
    _, report = train(config, tcfg, data)
    evaluated = [e for e, _, v in report.per_epoch if not np.isnan(v)]
    assert evaluated == [3, 6, 7]
    assert report.best_epoch in evaluated


def test_train_diverged():
    data = linear_data()
    data.y_train[5] = np.inf
    config = MLPConfig(input_width=1, hidden_layers=1, hidden_width=3)
    with pytest.raises(TrainingDivergedError) as err:
        train(config, TrainConfig(batch_size=10, max_epochs=3), data)
    assert err.value.epoch == 1
    assert err.value.message.startswith("epoch 1:")


def test_train_bad_data():
    data = linear_data()
    with pytest.raises(NeuralNetError):
        train(MLPConfig(input_width=2, hidden_layers=0), TrainConfig(), data)
    empty = TrainingData(np.zeros((0, 1)), [], data.x_validation,
                         data.y_validation)
    with pytest.raises(NeuralNetError):
        train(MLPConfig(input_width=1, hidden_layers=0), TrainConfig(),
              empty)


def small_model(mask_name="full"):
    mask = MASKS[mask_name]
    config = MLPConfig(input_width=mask.width, hidden_layers=2,
                       hidden_width=6, init_seed=3)
    return TrainedModel(mlp=init_mlp(config), mask=mask, n_max=10_000)


def test_predict_numbers():
    model = small_model("without-base5")
    ns = np.arange(4, 2000, 2)
    x = apply_mask(feature_matrix(ns, 10_000), model.mask)
    npt.assert_array_equal(model.predict_numbers(ns), predict(model.mlp, x))


def test_model_file(tmp_path):
    path = str(tmp_path / "model.gpm")
    model = small_model("without-base3")
    save_model(model, path)
    again = load_model(path)
    assert again.mask == model.mask
    assert again.n_max == 10_000
    assert again.mlp.config == model.mlp.config
    for a, b in zip(model.mlp.parameters(), again.mlp.parameters()):
        npt.assert_array_equal(a, b)
    assert load_model(path, MASKS["without-base3"]).mask == model.mask

    with pytest.raises(IncompatibleModelError):
        load_model(path, MASKS["full"])

    # same model, same bytes
    other = str(tmp_path / "again.gpm")
    save_model(again, other)
    with open(path, "rb") as f, open(other, "rb") as g:
        assert f.read() == g.read()


def test_model_file_errors(tmp_path):
    path = str(tmp_path / "model.gpm")
    save_model(small_model(), path)
    with open(path, "rb") as f:
        raw = f.read()

    def reload(data):
        with open(path, "wb") as f:
            f.write(data)
        return load_model(path)

    flipped = bytearray(raw)
    flipped[-100] ^= 0xFF
    with pytest.raises(ModelChecksumError):
        reload(bytes(flipped))
    with pytest.raises(ModelFileError):
        reload(b"NOTMODEL" + raw[8:])
    with pytest.raises(ModelFileError):
        reload(raw[:20])

    body = raw[:-32]
    bumped = body[:8] + np.array([2], dtype="<u4").tobytes() + body[12:]
    with pytest.raises(ModelFileError) as err:
        reload(bumped + sha256(bumped))
    assert "version" in err.value.message

    short = body[:-8]
    with pytest.raises(ModelFileError):
        reload(short + sha256(short))

    with pytest.raises(ModelFileError):
        load_model(str(tmp_path / "missing.gpm"))


if __name__ == "__main__":
    test_gradients_match_finite_differences()
    test_train_linear_task()
