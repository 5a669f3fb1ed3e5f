"""
Command line interface: ``goldpart <command> [options]``.

Commands::

    comet            count partitions over a range -> comet.csv
    split            shuffled train/validation/test -> split.txt
    train            train a network -> model.gpm + reports/train.*
    eval             score one predictor on a split block
    compare          G1..G4 and the model on the test block
    depth-sweep      one network per hidden-layer count
    ablate           one network per feature mask
    search           digit hill climb + CRT realization
    scan             lowest-prediction numbers of a range
    plot             comet and comparison plot data (+ SVG)
    export-features  feature matrix as CSV

Any option can also come from a flat ``key=value`` file given with
``--config`` (keys are option names, ``-`` or ``_``); options on the
command line win. ``GOLDBACH_DATA_DIR`` sets the default data directory.

Exit status: 0 success, 1 usage error, 2 missing or corrupt artifact,
3 training diverged, 4 incompatible model.

"""
import argparse
import sys

from .__version__ import __version__
from .constants import (
    ADAM,
    BATCH_SIZE,
    DATASET_RANGE,
    DEPTHS,
    HIDDEN_WIDTH,
    MAX_EPOCHS,
    N_MAX,
    SEARCH_START,
)
from .dataset import SplitFileError
from .evaluation import ABLATION_MASKS
from .features import MASKS
from .neuralnet import (
    IncompatibleModelError,
    ModelFileError,
    TrainingDivergedError,
)
from .partitions import COMET_METHODS, CometFileError
from .primes import SieveCacheError
from .search import DIGIT_ORDERS, ENUMERATE_LIMIT
from .util import read_flat_config
from . import workbench as wb

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ARTIFACT = 2
EXIT_DIVERGED = 3
EXIT_INCOMPATIBLE = 4

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common_parser():
    p = _Parser(add_help=False)
    p.add_argument(
        "--data-dir",
        default=None,
        help="artifact directory (default: $GOLDBACH_DATA_DIR or ./data)",
    )
    p.add_argument("--config", default=None, help="key=value options file")
    p.add_argument(
        "--threads", type=int, default=None, help="cap on worker processes"
    )
    p.add_argument(
        "--sieve-cache",
        default=None,
        help="sieve cache file (default: no cache)",
    )
    p.add_argument("--n-max", type=int, default=N_MAX)
    p.add_argument("-q", "--quiet", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _model_path_parser():
    p = _Parser(add_help=False)
    p.add_argument("--model", default=None, help="model file path")
    return p


def _training_parser():
    p = _Parser(add_help=False)
    p.add_argument("--hidden-layers", type=int, default=5)
    p.add_argument("--hidden-width", type=int, default=HIDDEN_WIDTH)
    p.add_argument("--activation", default="relu")
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=BATCH_SIZE)
    p.add_argument("--max-epochs", type=int, default=MAX_EPOCHS)
    p.add_argument("--eval-every", type=int, default=1)
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument(
        "--learning-rate", type=float, default=ADAM.learning_rate
    )
    return p


def build_parser():
    """The argument parser and its subparsers, keyed by command."""
    common = _common_parser()
    model_path = _model_path_parser()
    training = _training_parser()

    parser = _Parser(prog="goldpart", description="Goldbach workbench")
    parser.add_argument(
        "--version", action="version", version="%(prog)s " + __version__
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    subparsers = {}

    def add(name, parents, help):
        subparsers[name] = sub.add_parser(name, parents=parents, help=help)
        return subparsers[name]

    p = add("comet", [common], "count partitions over a range")
    p.add_argument("--lo", type=int, default=DATASET_RANGE.lo)
    p.add_argument("--hi", type=int, default=DATASET_RANGE.hi)
    p.add_argument("--method", choices=COMET_METHODS, default="fft")

    p = add("split", [common], "seeded train/validation/test split")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--validation-fraction", type=float, default=0.1)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    p = add("train", [common, model_path, training], "train a network")
    p.add_argument("--mask", choices=tuple(MASKS), default="full")

    p = add("eval", [common, model_path], "score one predictor")
    p.add_argument("--method", choices=wb.EVAL_METHODS, default="model")
    p.add_argument(
        "--predictions", default=None, help="CSV with columns n,prediction"
    )
    p.add_argument(
        "--block", choices=("train", "validation", "test"), default="test"
    )

    p = add("compare", [common, model_path], "compare G1..G4 and the model")
    p.add_argument("--no-model", dest="use_model", action="store_false")

    p = add("depth-sweep", [common, training], "train one net per depth")
    p.add_argument("--depths", type=int, nargs="+", default=list(DEPTHS))

    p = add("ablate", [common, training], "train one net per feature mask")
    p.add_argument(
        "--masks", nargs="+", choices=tuple(MASKS),
        default=list(ABLATION_MASKS),
    )

    p = add("search", [common, model_path], "digit hill climb + CRT")
    p.add_argument("--start", type=int, default=SEARCH_START)
    p.add_argument("--no-even", dest="even", action="store_false")
    p.add_argument(
        "--reference",
        action="store_true",
        help="realize the published candidate instead of climbing",
    )
    p.add_argument(
        "--order", choices=DIGIT_ORDERS + ("both",), default="both"
    )
    p.add_argument("--enumerate-limit", type=int, default=None)

    p = add("scan", [common, model_path], "lowest-prediction numbers")
    p.add_argument("--lo", type=int, default=DATASET_RANGE.lo)
    p.add_argument("--hi", type=int, default=DATASET_RANGE.hi)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--no-verify", dest="verify", action="store_false")
    p.add_argument("--lower-bound", action="store_true")

    p = add("plot", [common, model_path], "comet and comparison plot data")
    p.add_argument("--sample", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-model", dest="use_model", action="store_false")
    p.add_argument("--render", action="store_true", help="also write SVG")
    p.add_argument("--small-range-hi", type=int, default=200)

    p = add("export-features", [common], "feature matrix as CSV")
    p.add_argument("--out", default=None)

    return parser, subparsers


def _option_actions(subparser):
    actions = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--") and opt not in ("--help", "--config"):
                actions[opt[2:].replace("-", "_")] = action
    return actions


def _config_defaults(subparser, options, path):
    actions = _option_actions(subparser)
    defaults = {}
    for key, val in options.items():
        action = actions.get(key)
        if action is None:
            raise UsageError("{}: unknown option {!r}".format(path, key))
        if action.nargs == 0:
            if val.lower() in _TRUE:
                defaults[action.dest] = action.const
            elif val.lower() in _FALSE:
                defaults[action.dest] = not action.const
            else:
                raise UsageError(
                    "{}: {} expects true/false, got {!r}".format(
                        path, key, val
                    )
                )
        elif action.nargs == "+":
            convert = action.type or str
            try:
                values = [convert(v.strip()) for v in val.split(",")]
            except ValueError as e:
                raise UsageError("{}: {}: {}".format(path, key, e))
            if action.choices is not None:
                bad = [v for v in values if v not in action.choices]
                if bad:
                    raise UsageError(
                        "{}: {}: invalid choice(s) {}".format(path, key, bad)
                    )
            defaults[action.dest] = values
        else:
            # string defaults are converted by argparse itself
            defaults[action.dest] = val
    return defaults


def parse_args(argv=None):
    """Parse `argv`, filling unset options from ``--config`` if given."""
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            options = read_flat_config(args.config)
        except OSError as e:
            raise UsageError("cannot read config: {}".format(e))
        except ValueError as e:
            raise UsageError(str(e))
        subparser = subparsers[args.command]
        subparser.set_defaults(
            **_config_defaults(subparser, options, args.config)
        )
        args = parser.parse_args(argv)
    return args


def run_config(args):
    """Build the :class:`~goldpart.workbench.RunConfig` for `args`."""
    split_options = None
    if args.command == "split":
        split_options = dict(
            train_fraction=args.train_fraction,
            validation_fraction=args.validation_fraction,
            test_fraction=args.test_fraction,
            seed=args.seed,
        )
    model_options = train_options = None
    if hasattr(args, "hidden_layers"):
        model_options = dict(
            hidden_layers=args.hidden_layers,
            hidden_width=args.hidden_width,
            activation=args.activation,
            init_seed=args.init_seed,
        )
        train_options = dict(
            batch_size=args.batch_size,
            max_epochs=args.max_epochs,
            eval_every=args.eval_every,
            shuffle_seed=args.shuffle_seed,
            learning_rate=args.learning_rate,
        )
    lo, hi = DATASET_RANGE
    if args.command == "comet":
        lo, hi = args.lo, args.hi
    return wb.RunConfig.from_options(
        data_dir=args.data_dir,
        lo=lo,
        hi=hi,
        split_options=split_options,
        mask=getattr(args, "mask", "full"),
        model_options=model_options,
        train_options=train_options,
        n_max=args.n_max,
        threads=args.threads,
        sieve_cache=args.sieve_cache,
    )


def dispatch(args, cfg):
    stdout = not args.quiet
    cmd = args.command
    if cmd == "comet":
        wb.run_comet(cfg, args.method, stdout)
    elif cmd == "split":
        wb.run_split(cfg, stdout)
    elif cmd == "train":
        wb.run_train(cfg, args.model, stdout, args.verbose)
    elif cmd == "eval":
        wb.run_eval(
            cfg, args.method, args.model, args.predictions, args.block,
            stdout,
        )
    elif cmd == "compare":
        wb.run_compare(cfg, args.model, args.use_model, stdout)
    elif cmd == "depth-sweep":
        wb.run_depth_sweep(cfg, args.depths, stdout, args.verbose)
    elif cmd == "ablate":
        wb.run_ablate(cfg, args.masks, stdout, args.verbose)
    elif cmd == "search":
        if args.reference:
            orders = None if args.order == "both" else (args.order,)
            limit = args.enumerate_limit
            if limit is None:
                limit = ENUMERATE_LIMIT
            wb.run_reference(cfg, orders, limit, stdout)
        else:
            wb.run_search(
                cfg, args.model, args.start, args.even,
                args.enumerate_limit, stdout,
            )
    elif cmd == "scan":
        wb.run_scan(
            cfg, args.lo, args.hi, args.k, args.model, args.verify,
            args.lower_bound, stdout,
        )
    elif cmd == "plot":
        wb.run_plot(
            cfg, args.sample, args.seed, args.model, args.use_model,
            args.render, args.small_range_hi, stdout,
        )
    elif cmd == "export-features":
        wb.run_export_features(cfg, args.out, stdout)


def _fail(code, message):
    print("goldpart: error: {}".format(message), file=sys.stderr)
    return code


def main(argv=None):
    """Entry point; returns the exit status."""
    try:
        args = parse_args(argv)
        cfg = run_config(args)
        dispatch(args, cfg)
    except UsageError as e:
        return _fail(EXIT_USAGE, e)
    except TrainingDivergedError as e:
        return _fail(EXIT_DIVERGED, e.message)
    except IncompatibleModelError as e:
        return _fail(EXIT_INCOMPATIBLE, e.message)
    except (
        CometFileError,
        SplitFileError,
        ModelFileError,
        SieveCacheError,
        OSError,
    ) as e:
        return _fail(EXIT_ARTIFACT, e)
    except ValueError as e:
        return _fail(EXIT_USAGE, e)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
