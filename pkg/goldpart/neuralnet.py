"""
Fully connected regression network, written directly against numpy.

Layers are affine maps ``z = a W^T + b`` with weight matrices shaped
(out, in). Hidden layers apply the rectifier, the output layer is a
single linear unit, so predictions can be negative. The loss is the
mean (not summed) squared error over a minibatch, which keeps the
learning rate independent of the batch size.

Training follows the usual recipe: Adam with bias correction, a seeded
reshuffle each epoch, and a snapshot of the parameters at the epoch
with the lowest validation MSE. Training is never halted early; the
snapshot is what is returned.

"""
import json

import attr
import numpy as np

from .__version__ import __version__
from .constants import (
    ADAM,
    BATCH_SIZE,
    HIDDEN_WIDTH,
    MAX_EPOCHS,
    N_MAX,
    NUM_FEATURES,
)
from .containers import TrainReport
from .features import FeatureMask, apply_mask, feature_matrix
from .util import sha256


class Error(Exception):
    pass


class NeuralNetError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class TrainingDivergedError(Error):
    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = "epoch {}: {}".format(epoch, message)
        super().__init__(message)
        self.message = message
        self.epoch = epoch


class ModelFileError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ModelChecksumError(ModelFileError):
    pass


class IncompatibleModelError(Error):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


ACTIVATIONS = ("relu",)
MODEL_MAGIC = b"GOLDPART"
MODEL_FILE_VERSION = 1
FEATURE_SCALING = {"digits": "raw", "number": "n / n_max", "log": "raw"}
PREDICT_CHUNK = 65536

_bad_config = "invalid network configuration: {}"
_bad_width = "input has {} features, network expects {}"
_bad_lengths = "predictions and targets differ in length ({} != {})"
_empty = "mse of empty arrays"
_bad_grads = "gradients do not match the network parameters"
_nonfinite_grads = "non-finite gradient"
_nonfinite_loss = "non-finite loss {}"
_empty_data = "training and validation sets must be nonempty"
_bad_file = "{}: {}"
_mask_mismatch = "model was trained with mask {!r}, requested {!r}"
_bad_option = "bad {} options: {}"

MODEL_OPTIONS = {
    "hidden_layers": 5,
    "hidden_width": HIDDEN_WIDTH,
    "activation": "relu",
    "init_seed": 0,
}

TRAIN_OPTIONS = {
    "batch_size": BATCH_SIZE,
    "max_epochs": MAX_EPOCHS,
    "eval_every": 1,
    "shuffle_seed": 0,
    "learning_rate": ADAM.learning_rate,
}


def _positive(instance, attribute, value):
    if value < 1:
        raise NeuralNetError(
            _bad_config.format("{} = {} < 1".format(attribute.name, value))
        )


@attr.s(frozen=True)
class MLPConfig(object):
    """Architecture of a network.

    Attributes
    ----------
    input_width : int
        42, or the width of a feature mask.
    hidden_layers : int
        Number of hidden layers; 0 is a plain linear model.
    hidden_width : int
        Units per hidden layer.
    activation : {"relu"}
    init_seed : int
        Seed of the PCG64 generator used by :func:`init_mlp`.

    """

    input_width = attr.ib(default=NUM_FEATURES, converter=int,
                          validator=_positive)
    hidden_layers = attr.ib(default=5, converter=int)
    hidden_width = attr.ib(default=HIDDEN_WIDTH, converter=int,
                           validator=_positive)
    activation = attr.ib(default="relu")
    init_seed = attr.ib(default=0, converter=int)

    @hidden_layers.validator
    def _check_depth(self, attribute, value):
        if value < 0:
            raise NeuralNetError(
                _bad_config.format("hidden_layers = {} < 0".format(value))
            )

    @activation.validator
    def _check_activation(self, attribute, value):
        if value not in ACTIVATIONS:
            raise NeuralNetError(
                _bad_config.format("activation {!r}".format(value))
            )

    def widths(self):
        return (
            [self.input_width]
            + [self.hidden_width] * self.hidden_layers
            + [1]
        )


@attr.s(frozen=True)
class TrainConfig(object):
    batch_size = attr.ib(default=BATCH_SIZE, converter=int,
                         validator=_positive)
    max_epochs = attr.ib(default=MAX_EPOCHS, converter=int,
                         validator=_positive)
    eval_every = attr.ib(default=1, converter=int, validator=_positive)
    shuffle_seed = attr.ib(default=0, converter=int)
    learning_rate = attr.ib(default=ADAM.learning_rate, converter=float)


def model_config(input_width, model_options=None):
    """MLPConfig from `model_options` merged over MODEL_OPTIONS."""
    model_options = {**MODEL_OPTIONS, **(model_options or {})}
    try:
        return MLPConfig(input_width=input_width, **model_options)
    except TypeError as e:
        raise NeuralNetError(_bad_option.format("model", e))


def train_config(train_options=None):
    """TrainConfig from `train_options` merged over TRAIN_OPTIONS."""
    train_options = {**TRAIN_OPTIONS, **(train_options or {})}
    try:
        return TrainConfig(**train_options)
    except TypeError as e:
        raise NeuralNetError(_bad_option.format("train", e))


@attr.s(eq=False)
class MLP(object):
    """Network parameters.

    Attributes
    ----------
    config : :class:`MLPConfig`
    weights : list of ndarray
        One (out, in) matrix per layer; the last has out = 1.
    biases : list of ndarray
        One (out,) vector per layer.

    """

    config = attr.ib()
    weights = attr.ib()
    biases = attr.ib()

    def __attrs_post_init__(self):
        widths = self.config.widths()
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(
            self.weights
        ):
            raise NeuralNetError(_bad_config.format("layer count"))
        for w, b, fan_in, fan_out in zip(
            self.weights, self.biases, widths[:-1], widths[1:]
        ):
            if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise NeuralNetError(
                    _bad_config.format("layer dimensions do not chain")
                )

    @property
    def layers(self):
        return list(zip(self.weights, self.biases))

    @property
    def input_width(self):
        return self.config.input_width

    def parameters(self):
        """Weights and biases interleaved: W0, b0, W1, b1, ..."""
        params = []
        for w, b in self.layers:
            params.extend((w, b))
        return params

    @property
    def n_params(self):
        return sum(p.size for p in self.parameters())

    def copy(self):
        return MLP(
            config=self.config,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@attr.s(eq=False)
class AdamState(object):
    """Per-parameter Adam moments, in :meth:`MLP.parameters` order."""

    first_moment = attr.ib()
    second_moment = attr.ib()
    step_count = attr.ib(default=0)
    learning_rate = attr.ib(default=ADAM.learning_rate)
    beta1 = attr.ib(default=ADAM.beta1)
    beta2 = attr.ib(default=ADAM.beta2)
    epsilon = attr.ib(default=ADAM.epsilon)

    @classmethod
    def for_model(cls, mlp, learning_rate=ADAM.learning_rate):
        params = mlp.parameters()
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            learning_rate=learning_rate,
        )


@attr.s(eq=False)
class TrainingData(object):
    """Feature matrices and targets for the train and validation blocks."""

    x_train = attr.ib(converter=lambda a: np.asarray(a, dtype=np.float64))
    y_train = attr.ib(converter=lambda a: np.asarray(a, dtype=np.float64))
    x_validation = attr.ib(
        converter=lambda a: np.asarray(a, dtype=np.float64)
    )
    y_validation = attr.ib(
        converter=lambda a: np.asarray(a, dtype=np.float64)
    )

    @classmethod
    def from_split(cls, table, split, mask=None, n_max=N_MAX):
        mask = FeatureMask() if mask is None else mask

        def block(indices):
            x = apply_mask(feature_matrix(table.n[indices], n_max), mask)
            return x, table.g[indices].astype(np.float64)

        x_train, y_train = block(split.train)
        x_val, y_val = block(split.validation)
        return cls(x_train, y_train, x_val, y_val)


@attr.s(eq=False)
class TrainedModel(object):
    """A network together with the feature layout it was trained on."""

    mlp = attr.ib()
    mask = attr.ib(factory=FeatureMask)
    n_max = attr.ib(default=N_MAX)

    def predict_numbers(self, ns):
        """Predicted G(n) for an array of even numbers."""
        ns = np.asarray(ns, dtype=np.int64)
        out = np.empty(ns.size, dtype=np.float64)
        for start in range(0, ns.size, PREDICT_CHUNK):
            part = ns[start : start + PREDICT_CHUNK]
            x = apply_mask(feature_matrix(part, self.n_max), self.mask)
            out[start : start + PREDICT_CHUNK] = predict(self.mlp, x)
        return out


def init_mlp(config):
    """He-scaled normal weights and zero biases, seeded by `init_seed`."""
    rng = np.random.Generator(np.random.PCG64(config.init_seed))
    widths = config.widths()
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_out, fan_in)) * scale)
        biases.append(np.zeros(fan_out))
    return MLP(config=config, weights=weights, biases=biases)


def _as_batch(mlp, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != mlp.input_width:
        raise NeuralNetError(_bad_width.format(x.shape[-1], mlp.input_width))
    return x


def _layer_outputs(mlp, x):
    zs, acts = [], [x]
    last = len(mlp.weights) - 1
    a = x
    for i, (w, b) in enumerate(mlp.layers):
        z = a @ w.T + b
        a = z if i == last else np.maximum(z, 0.0)
        zs.append(z)
        acts.append(a)
    return zs, acts


def forward(mlp, x):
    """Network output for one feature list of length ``input_width``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise NeuralNetError(_bad_width.format(x.shape, mlp.input_width))
    return float(predict(mlp, x)[0])


def predict(mlp, x):
    """Network outputs for the rows of `x`, evaluated in fixed chunks.

    Returns
    -------
    ndarray, shape (len(x),)

    """
    x = _as_batch(mlp, x)
    out = np.empty(x.shape[0], dtype=np.float64)
    for start in range(0, x.shape[0], PREDICT_CHUNK):
        _, acts = _layer_outputs(mlp, x[start : start + PREDICT_CHUNK])
        out[start : start + PREDICT_CHUNK] = acts[-1][:, 0]
    return out


def mse(predictions, targets):
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if predictions.size != targets.size:
        raise NeuralNetError(
            _bad_lengths.format(predictions.size, targets.size)
        )
    if predictions.size == 0:
        raise NeuralNetError(_empty)
    return float(np.mean((predictions - targets) ** 2))


def loss_and_gradients(mlp, batch_x, batch_y):
    """Batch MSE and its gradient by backpropagation.

    Returns
    -------
    loss : float
    grads : list of ndarray
        Same order and shapes as :meth:`MLP.parameters`.

    """
    x = _as_batch(mlp, batch_x)
    y = np.asarray(batch_y, dtype=np.float64).ravel()
    if y.size != x.shape[0]:
        raise NeuralNetError(_bad_lengths.format(x.shape[0], y.size))
    zs, acts = _layer_outputs(mlp, x)
    resid = acts[-1][:, 0] - y
    loss = float(np.mean(resid ** 2))

    nlayers = len(mlp.weights)
    grads = [None] * (2 * nlayers)
    delta = (2.0 / y.size) * resid[:, None]
    for i in reversed(range(nlayers)):
        grads[2 * i] = delta.T @ acts[i]
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ mlp.weights[i]) * (zs[i - 1] > 0)
    return loss, grads


def backward(mlp, batch_x, batch_y):
    """Exact gradient of the batch MSE for every parameter."""
    return loss_and_gradients(mlp, batch_x, batch_y)[1]


def adam_step(mlp, grads, state):
    """One bias-corrected Adam update, applied in place.

    Returns
    -------
    mlp, state
        The same objects, updated.

    Raises
    ------
    TrainingDivergedError
        If any gradient entry is not finite. Nothing is modified.

    """
    params = mlp.parameters()
    if len(grads) != len(params) or any(
        g.shape != p.shape for g, p in zip(grads, params)
    ):
        raise NeuralNetError(_bad_grads)
    if not all(np.all(np.isfinite(g)) for g in grads):
        raise TrainingDivergedError(_nonfinite_grads)

    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    correct1 = 1.0 - b1 ** t
    correct2 = 1.0 - b2 ** t
    for p, g, m, v in zip(
        params, grads, state.first_moment, state.second_moment
    ):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / correct1) / (
            np.sqrt(v / correct2) + state.epsilon
        )
    return mlp, state


def train(config, tcfg, data, stdout=False, verbose=False):
    """Minibatch Adam training with best-validation snapshots.

    Parameters
    ----------
    config : :class:`MLPConfig`
    tcfg : :class:`TrainConfig`
    data : :class:`TrainingData`
    stdout : bool, optional
        Print a summary when done. Default is False.
    verbose : bool, optional
        With `stdout`, also print one line per epoch.

    Returns
    -------
    mlp : :class:`MLP`
        Parameters from the first epoch with the lowest validation MSE.
    report : :class:`~goldpart.containers.TrainReport`

    Raises
    ------
    TrainingDivergedError
        On a non-finite loss or gradient; the message names the epoch.

    """
    ntrain = data.y_train.size
    if ntrain == 0 or data.y_validation.size == 0:
        raise NeuralNetError(_empty_data)
    for x in (data.x_train, data.x_validation):
        if x.ndim != 2 or x.shape[1] != config.input_width:
            raise NeuralNetError(
                _bad_width.format(x.shape[-1], config.input_width)
            )

    mlp = init_mlp(config)
    state = AdamState.for_model(mlp, learning_rate=tcfg.learning_rate)
    rng = np.random.Generator(np.random.PCG64(tcfg.shuffle_seed))
    report = TrainReport()
    best, best_mse, best_epoch = None, np.inf, 0

    for epoch in range(1, tcfg.max_epochs + 1):
        order = rng.permutation(ntrain)
        total = 0.0
        for start in range(0, ntrain, tcfg.batch_size):
            idx = order[start : start + tcfg.batch_size]
            loss, grads = loss_and_gradients(
                mlp, data.x_train[idx], data.y_train[idx]
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(_nonfinite_loss.format(loss),
                                            epoch)
            try:
                adam_step(mlp, grads, state)
            except TrainingDivergedError as e:
                raise TrainingDivergedError(e.message, epoch)
            total += loss * idx.size
        train_mse = total / ntrain

        val_mse = np.nan
        if epoch % tcfg.eval_every == 0 or epoch == tcfg.max_epochs:
            val_mse = mse(predict(mlp, data.x_validation), data.y_validation)
            if not np.isfinite(val_mse):
                raise TrainingDivergedError(
                    _nonfinite_loss.format(val_mse), epoch
                )
            if val_mse < best_mse:
                best, best_mse, best_epoch = mlp.copy(), val_mse, epoch
        report.per_epoch.append((epoch, train_mse, val_mse))
        if stdout and verbose:
            print(
                "epoch {:>4}  train_mse = {:.6g}  validation_mse = {:.6g}"
                .format(epoch, train_mse, val_mse)
            )

    report.best_epoch = best_epoch
    report.best_validation_mse = best_mse
    if stdout:
        print(
            "Best validation MSE {:.6g} at epoch {}".format(
                best_mse, best_epoch
            )
        )
    return best, report


def _header(model):
    mlp = model.mlp
    return {
        "config": attr.asdict(mlp.config),
        "mask": model.mask.as_dict(),
        "n_max": int(model.n_max),
        "feature_scaling": FEATURE_SCALING,
        "shapes": [list(w.shape) for w in mlp.weights],
        "goldpart_version": __version__,
    }


def save_model(model, path):
    """Write a :class:`TrainedModel` as a versioned binary file.

    Layout: 8-byte magic, little-endian uint32 version and header
    length, a JSON header (config, mask, n_max, feature scaling, layer
    shapes), the layers as row-major little-endian float64 (W then b per
    layer), and a sha256 of everything before it.
    """
    header = json.dumps(_header(model), sort_keys=True).encode("utf-8")
    prefix = np.array(
        [MODEL_FILE_VERSION, len(header)], dtype="<u4"
    ).tobytes()
    payload = b"".join(
        np.ascontiguousarray(p, dtype="<f8").tobytes()
        for p in model.mlp.parameters()
    )
    body = MODEL_MAGIC + prefix + header + payload
    with open(path, "wb") as f:
        f.write(body + sha256(body))


def load_model(path, mask=None):
    """Read a model written by :func:`save_model`.

    Parameters
    ----------
    path : str
    mask : :class:`~goldpart.features.FeatureMask`, optional
        If given, the stored mask must equal it.

    Returns
    -------
    :class:`TrainedModel`

    Raises
    ------
    ModelFileError
        Unreadable file, bad magic, unsupported version, or dimensions
        that do not match the header.
    ModelChecksumError
        Corrupted contents.
    IncompatibleModelError
        Stored feature mask differs from `mask`.

    """
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise ModelFileError(_bad_file.format(path, e))
    nmagic = len(MODEL_MAGIC)
    if len(raw) < nmagic + 8 + 32 or raw[:nmagic] != MODEL_MAGIC:
        raise ModelFileError(_bad_file.format(path, "not a goldpart model"))
    body, checksum = raw[:-32], raw[-32:]
    if sha256(body) != checksum:
        raise ModelChecksumError(_bad_file.format(path, "checksum mismatch"))

    version, hlen = (
        int(v) for v in np.frombuffer(body[nmagic : nmagic + 8], dtype="<u4")
    )
    if version != MODEL_FILE_VERSION:
        raise ModelFileError(
            _bad_file.format(path, "unsupported version {}".format(version))
        )
    start = nmagic + 8
    try:
        header = json.loads(body[start : start + hlen].decode("utf-8"))
        config = MLPConfig(**header["config"])
        stored_mask = FeatureMask(**header["mask"])
        n_max = int(header["n_max"])
    except (ValueError, KeyError, TypeError) as e:
        raise ModelFileError(_bad_file.format(path, "bad header: {}".format(e)))

    if mask is not None and mask != stored_mask:
        raise IncompatibleModelError(
            _mask_mismatch.format(stored_mask.name, mask.name)
        )
    if config.input_width != stored_mask.width:
        raise ModelFileError(
            _bad_file.format(path, "input width does not match mask")
        )

    payload = body[start + hlen :]
    if len(payload) % 8:
        raise ModelFileError(
            _bad_file.format(path, "payload size does not match config")
        )
    values = np.frombuffer(payload, dtype="<f8")
    widths = config.widths()
    expected = sum(
        (fan_in + 1) * fan_out
        for fan_in, fan_out in zip(widths[:-1], widths[1:])
    )
    if values.size != expected:
        raise ModelFileError(
            _bad_file.format(path, "payload size does not match config")
        )
    weights, biases, at = [], [], 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        w = values[at : at + fan_in * fan_out].reshape(fan_out, fan_in)
        at += w.size
        b = values[at : at + fan_out]
        at += fan_out
        weights.append(w.astype(np.float64))
        biases.append(b.astype(np.float64))
    mlp = MLP(config=config, weights=weights, biases=biases)
    return TrainedModel(mlp=mlp, mask=stored_mask, n_max=n_max)
