"""
Pipeline stages working on files in a data directory.

Every stage reads its inputs from and writes its outputs to the data
directory of a :class:`RunConfig`; no state is carried between stages
in memory. File names::

    comet.csv           comet table (n, g)
    split.txt           train/validation/test indices
    model.gpm           trained network (default model path)
    features.csv        exported feature matrix
    reports/            text + CSV reports
    plots/              plot data and charts

"""
import os

import attr

from .constants import DATASET_RANGE, DEPTHS, N_MAX, SEARCH_START
from .dataset import (
    SplitFileError,
    SplitSpec,
    load_split,
    save_split,
    shuffle_split,
)
from .estimators import ESTIMATORS, LABELS, NEEDS_FACTORS
from .evaluation import (
    ABLATION_MASKS,
    MODEL_LABEL,
    ablation_suite,
    cached_predictor,
    compare_all,
    depth_sweep,
    emit_plot_data,
    estimator_predictor,
    evaluate,
    lower_bound_violations,
    write_report,
)
from .features import FeatureMask, export_features
from .neuralnet import (
    TrainedModel,
    TrainingData,
    load_model,
    model_config,
    save_model,
    train,
    train_config,
)
from .partitions import build_comet, load_comet, save_comet
from .primes import cached_sieve
from .search import (
    crt_combine,
    enumerate_pattern,
    hill_climb,
    reference_realizations,
    scan_suspicious,
)
from .util import GoldpartWarning, warn

DATA_DIR_ENV = "GOLDBACH_DATA_DIR"

SPLIT_OPTIONS = {
    "train_fraction": 0.8,
    "validation_fraction": 0.1,
    "test_fraction": 0.1,
    "seed": 0,
}

EVAL_METHODS = (MODEL_LABEL,) + ESTIMATORS

_bad_range = "need even 4 <= lo <= hi, got lo = {}, hi = {}"
_bad_method = "unknown method {!r}, expected one of {}"
_above_limit = "CRT solution {} exceeds the enumeration limit {}"
_stale_split = "{} was drawn for {} records, comet has {}"


def default_data_dir():
    return os.environ.get(DATA_DIR_ENV, os.path.join(os.getcwd(), "data"))


@attr.s(frozen=True)
class RunConfig(object):
    """Settings shared by the pipeline stages.

    Attributes
    ----------
    data_dir : str
    lo, hi : int
        Even bounds of the comet range.
    split : :class:`~goldpart.dataset.SplitSpec`
    mask : :class:`~goldpart.features.FeatureMask`
    model : :class:`~goldpart.neuralnet.MLPConfig`
        Its input width always equals ``mask.width``.
    train : :class:`~goldpart.neuralnet.TrainConfig`
    n_max : int
        Normalization constant of feature 40.
    threads : int or None
        Cap on worker processes.
    sieve_cache : str or None
        Sieve cache file; None builds every sieve in memory.

    """

    data_dir = attr.ib(converter=str)
    lo = attr.ib(default=DATASET_RANGE.lo, converter=int)
    hi = attr.ib(default=DATASET_RANGE.hi, converter=int)
    split = attr.ib(factory=SplitSpec)
    mask = attr.ib(factory=FeatureMask)
    model = attr.ib(default=None)
    train = attr.ib(default=None)
    n_max = attr.ib(default=N_MAX, converter=int)
    threads = attr.ib(default=None)
    sieve_cache = attr.ib(default=None)

    def __attrs_post_init__(self):
        if self.lo < 4 or self.lo % 2 or self.hi % 2 or self.hi < self.lo:
            raise ValueError(_bad_range.format(self.lo, self.hi))
        if self.model is None:
            object.__setattr__(self, "model", model_config(self.mask.width))
        if self.train is None:
            object.__setattr__(self, "train", train_config())
        if self.model.input_width != self.mask.width:
            raise ValueError(
                "model input width {} does not match mask width {}".format(
                    self.model.input_width, self.mask.width
                )
            )

    @classmethod
    def from_options(
        cls,
        data_dir=None,
        lo=DATASET_RANGE.lo,
        hi=DATASET_RANGE.hi,
        split_options=None,
        mask="full",
        model_options=None,
        train_options=None,
        n_max=N_MAX,
        threads=None,
        sieve_cache=None,
    ):
        """Build a RunConfig from option dicts merged over the defaults."""
        split_options = {**SPLIT_OPTIONS, **(split_options or {})}
        if not isinstance(mask, FeatureMask):
            mask = FeatureMask.from_name(mask)
        return cls(
            data_dir=default_data_dir() if data_dir is None else data_dir,
            lo=lo,
            hi=hi,
            split=SplitSpec(**split_options),
            mask=mask,
            model=model_config(mask.width, model_options),
            train=train_config(train_options),
            n_max=n_max,
            threads=threads,
            sieve_cache=sieve_cache,
        )

    def path(self, name):
        return os.path.join(self.data_dir, name)

    @property
    def comet_path(self):
        return self.path("comet.csv")

    @property
    def split_path(self):
        return self.path("split.txt")

    @property
    def model_path(self):
        return self.path("model.gpm")

    def report_stem(self, name):
        return os.path.join(self.data_dir, "reports", name)

    @property
    def model_options(self):
        opts = attr.asdict(self.model)
        opts.pop("input_width")
        return opts

    @property
    def train_options(self):
        return attr.asdict(self.train)


def _ensure_dir(path):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)


def _write_report(cfg, report, name):
    stem = cfg.report_stem(name)
    _ensure_dir(stem)
    return write_report(report, stem)


def run_comet(cfg, method="fft", stdout=True):
    """Count partitions over [lo, hi] and write ``comet.csv``."""
    os.makedirs(cfg.data_dir, exist_ok=True)
    sieve = cached_sieve(cfg.hi, cfg.sieve_cache)
    table = build_comet(cfg.lo, cfg.hi, sieve, method, cfg.threads, stdout)
    save_comet(table, cfg.comet_path)
    if stdout:
        print(
            "Wrote {:,} records to {} (mean G = {:.4f})".format(
                len(table), cfg.comet_path, table.g.mean()
            )
        )
    return table


def run_split(cfg, stdout=True):
    """Shuffle the comet table and write ``split.txt``."""
    table = load_comet(cfg.comet_path)
    split = shuffle_split(table, cfg.split)
    save_split(split, cfg.split_path)
    if stdout:
        print(
            "Split sizes {} (seed {}) written to {}".format(
                split.sizes(), cfg.split.seed, cfg.split_path
            )
        )
    return split


def _table_and_split(cfg):
    table, split = load_comet(cfg.comet_path), load_split(cfg.split_path)
    if split.n_records != len(table):
        raise SplitFileError(
            _stale_split.format(cfg.split_path, split.n_records, len(table))
        )
    return table, split


def run_train(cfg, model_path=None, stdout=True, verbose=False):
    """Train on the split's train block and save the best snapshot."""
    table, split = _table_and_split(cfg)
    data = TrainingData.from_split(table, split, cfg.mask, cfg.n_max)
    mlp, report = train(cfg.model, cfg.train, data, stdout, verbose)
    model = TrainedModel(mlp=mlp, mask=cfg.mask, n_max=cfg.n_max)
    model_path = cfg.model_path if model_path is None else model_path
    _ensure_dir(model_path)
    save_model(model, model_path)
    _write_report(cfg, report, "train")
    if stdout:
        print(report)
    return model, report


def run_eval(cfg, method="model", model_path=None, predictions=None,
             block="test", stdout=True):
    """Score one predictor on a split block.

    `predictions` (a CSV with columns n, prediction) takes precedence
    over `method`.
    """
    table, split = _table_and_split(cfg)
    indices = split.blocks()[block]
    if predictions is not None:
        predict, name, star = cached_predictor(predictions), "cached", False
    elif method == MODEL_LABEL:
        model = load_model(cfg.model_path if model_path is None
                           else model_path)
        predict, name, star = model.predict_numbers, MODEL_LABEL, False
    elif method in ESTIMATORS:
        predict = estimator_predictor(method)
        name, star = LABELS[method], NEEDS_FACTORS[method]
    else:
        raise ValueError(_bad_method.format(method, EVAL_METHODS))
    report = evaluate(predict, table, indices, name, star)
    _write_report(cfg, report, "eval_{}".format(name.lower()))
    if stdout:
        print(report)
    return report


def run_compare(cfg, model_path=None, use_model=True, stdout=True):
    """G1..G4 and the model on the test block; writes ``compare``."""
    table, split = _table_and_split(cfg)
    model = None
    if use_model:
        model = load_model(cfg.model_path if model_path is None
                           else model_path)
    sieve = cached_sieve(table.hi, cfg.sieve_cache)
    comparison = compare_all(model, table, split, sieve)
    _write_report(cfg, comparison, "compare")
    if stdout:
        print(comparison)
    return comparison


def run_depth_sweep(cfg, depths=DEPTHS, stdout=True, verbose=False):
    table, split = _table_and_split(cfg)
    data = TrainingData.from_split(table, split, cfg.mask, cfg.n_max)
    report, _ = depth_sweep(
        data, depths, cfg.model_options, cfg.train_options, stdout, verbose
    )
    _write_report(cfg, report, "depth_sweep")
    if stdout:
        print(report)
    return report


def run_ablate(cfg, masks=ABLATION_MASKS, stdout=True, verbose=False):
    table, split = _table_and_split(cfg)
    data = TrainingData.from_split(table, split, FeatureMask(), cfg.n_max)
    report, _ = ablation_suite(
        data,
        masks,
        cfg.model.hidden_layers,
        cfg.model_options,
        cfg.train_options,
        stdout,
        verbose,
    )
    _write_report(cfg, report, "ablation")
    if stdout:
        print(report)
    return report


def run_search(
    cfg,
    model_path=None,
    start_n=None,
    even_constraint=True,
    enumerate_limit=None,
    stdout=True,
):
    """Hill climb the model's digits and realize the result by CRT."""
    model = load_model(cfg.model_path if model_path is None else model_path)
    start_n = SEARCH_START if start_n is None else start_n
    report = hill_climb(model, start_n, even_constraint, stdout=stdout)
    crt = crt_combine(report.final)
    _write_report(cfg, report, "search")
    with open(cfg.report_stem("search_crt") + ".txt", "wt") as f:
        f.write(str(crt) + "\n")
    if enumerate_limit is not None:
        hit = enumerate_pattern(crt.residues, limit=enumerate_limit)
        if hit is None:
            warn(_above_limit.format(crt.smallest_solution, enumerate_limit),
                 GoldpartWarning)
    if stdout:
        print(report)
        print(crt)
    return report, crt


def run_reference(cfg, orders=None, enumerate_limit=None, stdout=True):
    """Realize the published candidate under each digit order."""
    results = reference_realizations()
    if orders is not None:
        results = {k: v for k, v in results.items() if k in orders}
    lines = []
    for order, (crt, below) in results.items():
        lines.append("digit order: {}".format(order))
        lines.append(str(crt))
        lines.append(
            "  below 10^19: {}".format("yes" if below else "no")
        )
        if enumerate_limit is not None:
            hit = enumerate_pattern(crt.residues, limit=enumerate_limit)
            lines.append(
                "  base-7 enumeration below {}: {}".format(
                    enumerate_limit, "none" if hit is None else hit
                )
            )
    text = "\n".join(lines)
    stem = cfg.report_stem("reference")
    _ensure_dir(stem)
    with open(stem + ".txt", "wt") as f:
        f.write(text + "\n")
    if stdout:
        print(text)
    return results


def run_scan(
    cfg,
    lo=None,
    hi=None,
    k=100,
    model_path=None,
    verify=True,
    lower_bound=False,
    stdout=True,
):
    """Lowest-prediction numbers of a range, optionally verified.

    With `lower_bound`, also lists comet numbers below 2/3 G1.
    """
    lo = cfg.lo if lo is None else lo
    hi = cfg.hi if hi is None else hi
    model = load_model(cfg.model_path if model_path is None else model_path)
    sieve = cached_sieve(max(hi, 2), cfg.sieve_cache) if verify else None
    report = scan_suspicious(
        model, lo, hi, k, sieve, verify, cfg.threads, stdout
    )
    _write_report(cfg, report, "scan")
    if stdout:
        print(report)
    violations = None
    if lower_bound:
        table = load_comet(cfg.comet_path)
        violations = lower_bound_violations(table, sieve)
        violations.to_csv(
            cfg.report_stem("lower_bound_violations") + ".csv", index=False
        )
        if stdout:
            print(
                "{} comet numbers fall below the 2/3 G1 lower bound".format(
                    len(violations)
                )
            )
    return report, violations


def run_plot(cfg, sample_size=20, seed=0, model_path=None, use_model=True,
             render=False, small_range_hi=200, stdout=True):
    table, split = _table_and_split(cfg)
    model = None
    if use_model:
        model = load_model(cfg.model_path if model_path is None
                           else model_path)
    paths = emit_plot_data(
        table,
        split,
        cfg.path("plots"),
        model,
        sample_size,
        seed,
        render=render,
        small_range_hi=small_range_hi,
    )
    if stdout:
        for path in paths.values():
            print("Wrote {}".format(path))
    return paths


def run_export_features(cfg, out=None, stdout=True):
    table = load_comet(cfg.comet_path)
    out = cfg.path("features.csv") if out is None else out
    _ensure_dir(out)
    df = export_features(table, out, cfg.n_max)
    if stdout:
        print("Wrote {} feature rows to {}".format(len(df), out))
    return out

