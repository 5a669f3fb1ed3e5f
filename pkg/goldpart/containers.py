"""Classes used to group results."""

import math

import attr
import numpy as np
import pandas as pd


REPORT_COLUMNS = [
    "method",
    "mse",
    "rmse",
    "error_rate",
    "requires_factorization",
]


@attr.s
class TrainReport(object):
    """Per-epoch training history.

    Attributes
    ----------
    per_epoch : list of (int, float, float)
        (epoch, train_mse, validation_mse). Epochs are 1-based.
        `train_mse` is the sample-weighted mean of the minibatch losses
        seen during the epoch; `validation_mse` is nan for epochs that
        were not evaluated.
    best_epoch : int
        First epoch attaining the minimum validation MSE.
    best_validation_mse : float

    """

    per_epoch = attr.ib(factory=list)
    best_epoch = attr.ib(default=0)
    best_validation_mse = attr.ib(default=np.nan)

    @property
    def best_train_mse(self):
        for epoch, train_mse, _ in self.per_epoch:
            if epoch == self.best_epoch:
                return train_mse
        return np.nan

    def __str__(self):
        return self.results_str().format(**self.common_units())

    def results_str(self):
        return (
            "------------\n"
            "Train Report\n"
            "------------\n"
            "  epochs = {epochs}\n"
            "  best_epoch = {best_epoch}\n"
            "  best_train_mse = {best_train_mse:.6g}\n"
            "  best_validation_mse = {best_validation_mse:.6g}"
        )

    def common_units(self):
        return dict(
            epochs=len(self.per_epoch),
            best_epoch=self.best_epoch,
            best_train_mse=self.best_train_mse,
            best_validation_mse=self.best_validation_mse,
        )

    def to_dataframe(self):
        return pd.DataFrame(
            self.per_epoch, columns=["epoch", "train_mse", "validation_mse"]
        )


@attr.s
class EvalReport(object):
    """Error of one predictor over an index set.

    Attributes
    ----------
    method_name : str
    mse, rmse : float
        Mean squared error and its root, in partition counts.
    error_rate : float
        rmse divided by the mean true count (a fraction, not percent).
    requires_factorization : bool
        True for estimators that need the prime factors of n.
    index_digest : str
        Hash of the scored index set.

    """

    method_name = attr.ib(default="")
    mse = attr.ib(default=np.nan)
    rmse = attr.ib(default=np.nan)
    error_rate = attr.ib(default=np.nan)
    requires_factorization = attr.ib(default=False)
    index_digest = attr.ib(default="", repr=False)

    def __str__(self):
        return self.results_str().format(**self.common_units())

    def results_str(self):
        return (
            "  {method:<22} mse = {mse:>16,.1f}  rmse = {rmse:>10,.2f}  "
            "error_rate = {error_rate_pct:>6.2f}%"
        )

    def common_units(self):
        star = "*" if self.requires_factorization else ""
        method = self.method_name + star
        return dict(
            method=method,
            mse=self.mse,
            rmse=self.rmse,
            error_rate_pct=100 * self.error_rate,
        )

    def row(self):
        return dict(
            method=self.method_name,
            mse=self.mse,
            rmse=self.rmse,
            error_rate=self.error_rate,
            requires_factorization=self.requires_factorization,
        )

    def to_dataframe(self):
        return pd.DataFrame([self.row()], columns=REPORT_COLUMNS)


@attr.s
class ComparisonTable(object):
    """EvalReports of several predictors on one shared index set.

    Attributes
    ----------
    rows : list of :class:`EvalReport`
    index_digest : str
        Hash of the index set every row was scored on.
    n_indices : int

    """

    rows = attr.ib(factory=list)
    index_digest = attr.ib(default="")
    n_indices = attr.ib(default=0)

    def __str__(self):
        head = (
            "----------------\n"
            "Comparison Table\n"
            "----------------\n"
            "  {} test numbers, index digest {}\n".format(
                self.n_indices, self.index_digest[:16]
            )
        )
        body = "\n".join(str(r) for r in self.rows)
        return head + body + "\n  (* requires prime factorization)"

    def __getitem__(self, method_name):
        for r in self.rows:
            if r.method_name == method_name:
                return r
        raise KeyError(method_name)

    def ranking(self):
        """Method names ordered by ascending error rate."""
        ordered = sorted(self.rows, key=lambda r: r.error_rate)
        return [r.method_name for r in ordered]

    def to_dataframe(self):
        return pd.DataFrame(
            [r.row() for r in self.rows], columns=REPORT_COLUMNS
        )


@attr.s
class HillClimbReport(object):
    """Trajectory of a digit hill climb.

    Attributes
    ----------
    trajectory : list of (int, int, float)
        (sweep, digits_changed, prediction after the sweep). Sweep 0 is
        the starting point with zero changes.
    final : :class:`~goldpart.search.DigitCandidate`

    """

    trajectory = attr.ib(factory=list)
    final = attr.ib(default=None)

    @property
    def sweeps(self):
        return len(self.trajectory) - 1

    def __str__(self):
        lines = [
            "-----------------",
            "Hill Climb Report",
            "-----------------",
            "  sweeps = {}".format(self.sweeps),
            "  start prediction = {:.6g}".format(self.trajectory[0][2]),
            "  final prediction = {:.6g}".format(self.final.prediction),
        ]
        for base, d in zip(self.final.bases, self.final.digit_sets):
            lines.append(
                "  base {} (LSD first): {}".format(
                    base, ", ".join(map(str, d.digits))
                )
            )
        return "\n".join(lines)

    def to_dataframe(self):
        return pd.DataFrame(
            self.trajectory, columns=["sweep", "digits_changed", "prediction"]
        )


@attr.s
class CrtResult(object):
    """Smallest integer matching per-base residues.

    Attributes
    ----------
    residues : dict
        ``{base: residue mod base^10}``.
    moduli : dict
        ``{base: base^10}``.
    modulus : int
        Product of the moduli, (2*3*5*7)^10 for all four bases.
    smallest_solution : int
        Unique solution in [0, modulus).

    """

    residues = attr.ib(factory=dict)
    moduli = attr.ib(factory=dict)
    modulus = attr.ib(default=1)
    smallest_solution = attr.ib(default=0)

    def verify(self):
        """True if the solution reduces to every residue."""
        return all(
            self.smallest_solution % self.moduli[b] == r
            for b, r in self.residues.items()
        )

    def verification_lines(self):
        lines = []
        for b, r in self.residues.items():
            got = self.smallest_solution % self.moduli[b]
            lines.append(
                "  x mod {}^10 = {} (want {}) {}".format(
                    b, got, r, "ok" if got == r else "MISMATCH"
                )
            )
        return lines

    def __str__(self):
        x = self.smallest_solution
        return "\n".join(
            [
                "----------",
                "CRT Result",
                "----------",
                "  modulus = {}".format(self.modulus),
                "  smallest_solution = {}".format(x),
                "  log10(solution) = {:.3f}".format(
                    math.log10(x) if x else 0.0
                ),
            ]
            + self.verification_lines()
        )


@attr.s
class ScanReport(object):
    """Lowest-prediction numbers of a range.

    Attributes
    ----------
    rows : list of (int, float, int or None)
        (n, prediction, true G(n) or None if beyond the sieve),
        ascending by prediction, ties by n.
    lo, hi : int

    """

    rows = attr.ib(factory=list)
    lo = attr.ib(default=0)
    hi = attr.ib(default=0)

    @property
    def violations(self):
        """Scanned numbers whose verified count is zero."""
        return [n for n, _, g in self.rows if g == 0]

    def __str__(self):
        lines = [
            "-----------",
            "Scan Report",
            "-----------",
            "  range = [{}, {}], k = {}".format(
                self.lo, self.hi, len(self.rows)
            ),
        ]
        for n, pred, g in self.rows:
            lines.append(
                "  n = {:>12}  prediction = {:>12.2f}  G(n) = {}".format(
                    n, pred, "?" if g is None else g
                )
            )
        lines.append("  violations = {}".format(self.violations or "none"))
        return "\n".join(lines)

    def to_dataframe(self):
        return pd.DataFrame(self.rows, columns=["n", "prediction", "g"])


@attr.s
class DepthSweepReport(object):
    """Train and validation MSE of one network per hidden-layer count.

    Attributes
    ----------
    rows : list of (int, float, float, int)
        (hidden_layers, train_mse, validation_mse, best_epoch), the MSEs
        taken at each run's best validation epoch.

    """

    rows = attr.ib(factory=list)

    @property
    def selected_depth(self):
        """Depth with the lowest validation MSE (first on ties)."""
        best = min(range(len(self.rows)), key=lambda i: self.rows[i][2])
        return self.rows[best][0]

    def __str__(self):
        lines = [
            "-----------",
            "Depth Sweep",
            "-----------",
            "  {:<16} {:>16} {:>16}".format(
                "hidden layers", "train MSE", "validation MSE"
            ),
        ]
        for depth, train_mse, val_mse, _ in self.rows:
            label = "linear" if depth == 0 else str(depth)
            lines.append(
                "  {:<16} {:>16,.0f} {:>16,.0f}".format(
                    label, train_mse, val_mse
                )
            )
        lines.append("  selected = {}".format(self.selected_depth))
        return "\n".join(lines)

    def to_dataframe(self):
        return pd.DataFrame(
            self.rows,
            columns=["hidden_layers", "train_mse", "validation_mse",
                     "best_epoch"],
        )


@attr.s
class AblationReport(object):
    """MSE of the same architecture trained on reduced feature sets.

    Attributes
    ----------
    rows : list of (str, int, float, float)
        (mask name, input width, train_mse, validation_mse).

    """

    rows = attr.ib(factory=list)

    def __getitem__(self, mask_name):
        for row in self.rows:
            if row[0] == mask_name:
                return row
        raise KeyError(mask_name)

    def __str__(self):
        lines = [
            "--------",
            "Ablation",
            "--------",
            "  {:<16} {:>6} {:>16} {:>16}".format(
                "features", "width", "train MSE", "validation MSE"
            ),
        ]
        for name, width, train_mse, val_mse in self.rows:
            lines.append(
                "  {:<16} {:>6} {:>16,.0f} {:>16,.0f}".format(
                    name, width, train_mse, val_mse
                )
            )
        return "\n".join(lines)

    def to_dataframe(self):
        return pd.DataFrame(
            self.rows,
            columns=["mask", "width", "train_mse", "validation_mse"],
        )
