"""
Scoring of predictors and the experiment tables built on it.

A predictor is any callable mapping an int64 array of even numbers to
an array of predicted partition counts. Estimators, trained models, and
cached prediction files are all turned into predictors and scored the
same way::

    mse = mean((prediction - G)^2)
    rmse = sqrt(mse)
    error_rate = rmse / mean(G)

G1 is scored as an estimate. It is sometimes called an upper bound but
overshoots real counts by far more than its own spread.

"""
import os

import matplotlib as mpl
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .constants import DEPTHS, NUM_FEATURES
from .containers import (
    AblationReport,
    ComparisonTable,
    DepthSweepReport,
    EvalReport,
)
from .estimators import (
    LABELS,
    NEEDS_FACTORS,
    default_c2,
    estimate,
    odd_factor_product,
)
from .features import FeatureMask
from .neuralnet import TrainingData, model_config, train, train_config
from .partitions import save_comet
from .util import index_digest, read_csv_columns


class Error(Exception):
    pass


class EvaluationError(Error, ValueError):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


COMPARED = ("g1", "g2", "g3", "g4")
MODEL_LABEL = "model"
ABLATION_MASKS = (
    "full",
    "without-base2",
    "without-base3",
    "without-base5",
    "without-base7",
    "without-log",
    "without-number",
    "lsd-only",
)

_empty_indices = "no indices to evaluate"
_bad_predictions = "predictor returned shape {}, expected {}"
_split_mismatch = "split covers {} records but the table has {}"
_digest_mismatch = "comparison rows were scored on different index sets"
_bad_sample = "sample_size = {} outside [1, {}] (test set size)"
_missing_predictions = "no cached prediction for n = {}"
_bad_width = "ablation needs the full {}-feature data, got width {}"


def evaluate(
    predict, table, indices, method_name="", requires_factorization=False
):
    """Score `predict` on the records of `table` selected by `indices`.

    Indices are sorted before scoring, so the result does not depend on
    their order.

    Parameters
    ----------
    predict : callable
        Maps an int64 array of n to an array of predictions.
    table : :class:`~goldpart.partitions.CometTable`
    indices : array_like of int
    method_name : str, optional
    requires_factorization : bool, optional

    Returns
    -------
    :class:`~goldpart.containers.EvalReport`

    """
    indices = np.sort(np.asarray(indices, dtype=np.int64))
    if indices.size == 0:
        raise EvaluationError(_empty_indices)
    target = table.g[indices].astype(np.float64)
    pred = np.asarray(predict(table.n[indices]), dtype=np.float64)
    if pred.shape != target.shape:
        raise EvaluationError(
            _bad_predictions.format(pred.shape, target.shape)
        )
    mse = float(np.mean((pred - target) ** 2))
    rmse = float(np.sqrt(mse))
    return EvalReport(
        method_name=method_name,
        mse=mse,
        rmse=rmse,
        error_rate=rmse / float(target.mean()),
        requires_factorization=requires_factorization,
        index_digest=index_digest(indices),
    )


def estimator_predictor(name, sieve=None, c2=None, factor_product=None):
    """Predictor evaluating estimator `name` ("g1", ..., "lb")."""
    c2 = default_c2() if c2 is None else c2

    def predict(ns):
        return estimate(
            name, ns, sieve, c2, factor_product=factor_product, strict=False
        )

    return predict


def cached_predictor(path):
    """Predictor looking n up in a CSV with columns ``n,prediction``."""
    try:
        df = read_csv_columns(path, ["n", "prediction"])
    except (OSError, ValueError) as e:
        raise EvaluationError("cannot read {}: {}".format(path, e))
    cache = pd.Series(df["prediction"].values, index=df["n"].values)

    def predict(ns):
        missing = ~np.isin(ns, cache.index.values)
        if missing.any():
            raise EvaluationError(
                _missing_predictions.format(int(ns[missing][0]))
            )
        return cache.loc[ns].values

    return predict


def compare_all(model, table, split, sieve=None, c2=None, stdout=False):
    """Score G1..G4 and a trained model on the test block of `split`.

    Parameters
    ----------
    model : :class:`~goldpart.neuralnet.TrainedModel` or None
        If None, only the estimators are compared.
    table : :class:`~goldpart.partitions.CometTable`
    split : :class:`~goldpart.dataset.DataSplit`
    sieve : :class:`~goldpart.primes.PrimeSieve`, optional
    c2 : :class:`~goldpart.estimators.TwinPrimeConstant`, optional

    Returns
    -------
    :class:`~goldpart.containers.ComparisonTable`

    """
    if split.n_records != len(table):
        raise EvaluationError(_split_mismatch.format(split.n_records,
                                                     len(table)))
    test = np.sort(split.test)
    factor_product = odd_factor_product(table.hi, sieve)
    rows = []
    for name in COMPARED:
        predict = estimator_predictor(name, sieve, c2, factor_product)
        rows.append(
            evaluate(predict, table, test, LABELS[name], NEEDS_FACTORS[name])
        )
        if stdout:
            print(rows[-1])
    if model is not None:
        rows.append(evaluate(model.predict_numbers, table, test, MODEL_LABEL))
        if stdout:
            print(rows[-1])

    digest = index_digest(test)
    if any(r.index_digest != digest for r in rows):
        raise EvaluationError(_digest_mismatch)
    return ComparisonTable(rows=rows, index_digest=digest, n_indices=test.size)


def depth_sweep(
    data,
    depths=DEPTHS,
    model_options=None,
    train_options=None,
    stdout=False,
    verbose=False,
):
    """Train one network per hidden-layer count with shared seeds.

    Returns
    -------
    report : :class:`~goldpart.containers.DepthSweepReport`
    models : dict
        ``{depth: MLP}``, each at its best validation epoch.

    """
    tcfg = train_config(train_options)
    report = DepthSweepReport()
    models = {}
    for depth in depths:
        config = model_config(
            data.x_train.shape[1],
            {**(model_options or {}), "hidden_layers": depth},
        )
        if stdout:
            print("Training {} hidden layer(s) ...".format(depth))
        mlp, treport = train(config, tcfg, data, stdout, verbose)
        report.rows.append(
            (
                depth,
                treport.best_train_mse,
                treport.best_validation_mse,
                treport.best_epoch,
            )
        )
        models[depth] = mlp
    if stdout:
        print("Selected depth: {}".format(report.selected_depth))
    return report, models


def ablation_suite(
    data,
    masks=ABLATION_MASKS,
    hidden_layers=5,
    model_options=None,
    train_options=None,
    stdout=False,
    verbose=False,
):
    """Train the same architecture on each feature mask.

    Parameters
    ----------
    data : :class:`~goldpart.neuralnet.TrainingData`
        Full 42-feature data; masks select columns from it.
    masks : sequence of str or FeatureMask, optional
        Default is every preset in :data:`ABLATION_MASKS`.

    Returns
    -------
    report : :class:`~goldpart.containers.AblationReport`
    models : dict
        ``{mask name: MLP}``

    """
    width = data.x_train.shape[1]
    if width != NUM_FEATURES:
        raise EvaluationError(_bad_width.format(NUM_FEATURES, width))
    tcfg = train_config(train_options)
    report = AblationReport()
    models = {}
    for mask in masks:
        if not isinstance(mask, FeatureMask):
            mask = FeatureMask.from_name(mask)
        cols = mask.columns()
        masked = TrainingData(
            data.x_train[:, cols],
            data.y_train,
            data.x_validation[:, cols],
            data.y_validation,
        )
        config = model_config(
            mask.width,
            {**(model_options or {}), "hidden_layers": hidden_layers},
        )
        if stdout:
            print("Training with features: {}".format(mask.name))
        mlp, treport = train(config, tcfg, masked, stdout, verbose)
        report.rows.append(
            (
                mask.name,
                mask.width,
                treport.best_train_mse,
                treport.best_validation_mse,
            )
        )
        models[mask.name] = mlp
    return report, models


def lower_bound_violations(table, sieve=None, c2=None):
    """Numbers whose count falls below the 2/3 G1 lower bound.

    The bound only holds asymptotically, so small n are expected here.

    Returns
    -------
    pandas.DataFrame
        Columns n, g, lower_bound, ratio (g / lower_bound), ascending
        by n.

    """
    lb = estimate("lb", table.n, sieve, c2)
    below = table.g < lb
    return pd.DataFrame(
        {
            "n": table.n[below],
            "g": table.g[below],
            "lower_bound": lb[below],
            "ratio": table.g[below] / lb[below],
        }
    )


def comparison_sample(
    table, split, model=None, sample_size=20, seed=0, sieve=None, c2=None
):
    """True counts and every prediction for a seeded sample of test n.

    Returns
    -------
    pandas.DataFrame
        Columns n, G, G1..G4 and, with a model, "model"; ascending by n.

    """
    if sample_size < 1 or sample_size > len(split.test):
        raise EvaluationError(
            _bad_sample.format(sample_size, len(split.test))
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = np.sort(rng.choice(split.test, size=sample_size, replace=False))
    ns = table.n[picked]
    df = pd.DataFrame({"n": ns, "G": table.g[picked]})
    for name in COMPARED:
        df[LABELS[name]] = estimator_predictor(name, sieve, c2)(ns)
    if model is not None:
        df[MODEL_LABEL] = model.predict_numbers(ns)
    return df.sort_values("n").reset_index(drop=True)


def plot_comet(table, ax=None, **kws):
    if ax is None:
        ax = plt.gca()
    ax.scatter(table.n, table.g, s=0.1, marker=".", rasterized=True, **kws)
    ax.set_xlabel("n")
    ax.set_ylabel("G(n)")
    return ax


def plot_small_range(table, hi=200, ax=None, **kws):
    if ax is None:
        ax = plt.gca()
    keep = table.n <= hi
    ax.bar(table.n[keep], table.g[keep], width=1.5, **kws)
    ax.set_xlabel("n")
    ax.set_ylabel("G(n)")
    return ax


def plot_comparison(sample, ax=None, **kws):
    if ax is None:
        ax = plt.gca()
    x = np.arange(len(sample))
    columns = [c for c in sample.columns if c != "n"]
    for col in columns:
        ax.plot(x, sample[col], marker="o", label=col, **kws)
    ax.set_xticks(x)
    ax.set_xticklabels(sample["n"].astype(str), rotation=90)
    ax.set_ylabel("Goldbach partitions")
    ax.legend()
    return ax


def _save_svg(plotter, path, *args, **kws):
    with mpl.rc_context({"svg.hashsalt": "goldpart"}):
        fig, ax = plt.subplots(figsize=(8, 5))
        plotter(*args, ax=ax, **kws)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def emit_plot_data(
    table,
    split,
    out_dir,
    model=None,
    sample_size=20,
    seed=0,
    sieve=None,
    c2=None,
    render=False,
    small_range_hi=200,
):
    """Write the data behind the comet and comparison charts.

    Files written to `out_dir`:

    * ``comet.csv``: the full table (n, g).
    * ``small_range.csv``: the table for n <= `small_range_hi`.
    * ``comparison_sample.csv``: `sample_size` seeded test numbers with
      the true count, G1..G4 and, with a model, its prediction.
    * with `render`, an SVG chart next to each CSV.

    Returns
    -------
    dict
        ``{name: path}`` of every file written.

    """
    sample = comparison_sample(
        table, split, model, sample_size, seed, sieve, c2
    )
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        name: os.path.join(out_dir, name + ".csv")
        for name in ("comet", "small_range", "comparison_sample")
    }
    save_comet(table, paths["comet"])
    small = table.to_dataframe()
    small[small["n"] <= small_range_hi].to_csv(
        paths["small_range"], index=False
    )
    sample.to_csv(paths["comparison_sample"], index=False)
    if render:
        for name in ("comet", "small_range", "comparison_sample"):
            paths[name + "_svg"] = os.path.join(out_dir, name + ".svg")
        _save_svg(plot_comet, paths["comet_svg"], table)
        _save_svg(
            plot_small_range, paths["small_range_svg"], table, small_range_hi
        )
        _save_svg(plot_comparison, paths["comparison_sample_svg"], sample)
    return paths


def write_report(report, stem):
    """Write `report` as ``<stem>.csv`` and aligned text ``<stem>.txt``."""
    csv_path, txt_path = stem + ".csv", stem + ".txt"
    report.to_dataframe().to_csv(csv_path, index=False)
    with open(txt_path, "wt") as f:
        f.write(str(report) + "\n")
    return csv_path, txt_path
