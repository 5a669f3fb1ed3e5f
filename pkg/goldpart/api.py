from .constants import DATASET_RANGE, N_MAX
from .dataset import SplitSpec, shuffle_split
from .features import FeatureMask
from .neuralnet import (
    TrainedModel,
    TrainingData,
    load_model,
    model_config,
    train,
    train_config,
)
from .partitions import build_comet
from .primes import build_sieve
from .workbench import SPLIT_OPTIONS


def gpread(path, mask=None):
    """Load a model saved by :func:`~goldpart.neuralnet.save_model`."""
    return load_model(path, mask)


def goldbach_comet(
    lo=DATASET_RANGE.lo,
    hi=DATASET_RANGE.hi,
    method="fft",
    sieve=None,
    threads=None,
    stdout=False,
):
    """Goldbach's function G(n) for every even n in [lo, hi].

    G(n) is the number of unordered pairs of primes p <= q with
    p + q = n, so G(4) = 1 (2 + 2) and G(100) = 6.

    Parameters
    ----------
    lo, hi : int, optional
        Even bounds, 4 <= `lo` <= `hi`. Default is the full dataset
        range [4, 4 000 000].
    method : {"fft", "direct"}, optional
        "fft" (default) derives the whole range from one convolution of
        the prime indicator; "direct" walks the primes p <= n/2 for each
        n and tests n - p against the sieve, with the range split over
        worker processes. Both give identical tables.
    sieve : :class:`~goldpart.primes.PrimeSieve`, optional
        Primality table covering `hi`. Built if not given.
    threads : int, optional
        Cap on worker processes for "direct". Default is all cores.
    stdout : bool, optional
        If True, print progress information. Default is False.

    Returns
    -------
    :class:`~goldpart.partitions.CometTable`

    """
    if sieve is None or sieve.limit < hi:
        sieve = build_sieve(max(int(hi), 2))
    return build_comet(lo, hi, sieve, method, threads, stdout)


def fit_goldbach_model(
    table,
    split=None,
    split_options=None,
    mask="full",
    model_options=None,
    train_options=None,
    n_max=N_MAX,
    stdout=False,
    verbose=False,
):
    """Train a network to predict G(n) from multi-base digit features.

    Each even n is described by its 10 least significant digits in
    bases 2, 3, 5 and 7, n / `n_max`, and ln(n). A fully connected
    network with rectifier hidden layers is trained on the train block
    of a seeded split with Adam and mean squared error; the parameters
    from the epoch with the lowest validation MSE are returned.

    Parameters
    ----------
    table : :class:`~goldpart.partitions.CometTable`
        Training data, e.g. from :func:`goldbach_comet`.
    split : :class:`~goldpart.dataset.DataSplit`, optional
        Train/validation/test indices into `table`. If not given, a
        split is drawn with `split_options`.
    split_options : dict, optional
        Fractions and seed of the split. See ``Other parameters``.
    mask : str or :class:`~goldpart.features.FeatureMask`, optional
        Feature groups to train on. One of "full" (default),
        "without-base2", "without-base3", "without-base5",
        "without-base7", "without-log", "without-number", "lsd-only".
    model_options : dict, optional
        Network architecture. See ``Other parameters``.
    train_options : dict, optional
        Optimizer and schedule. See ``Other parameters``.
    n_max : int, optional
        Normalization constant for the n / n_max feature. Default is
        4 000 000.
    stdout : bool, optional
        If True, print a summary when training ends. Default is False.
    verbose : bool, optional
        With `stdout`, also print one line per epoch. Default is False.

    Returns
    -------
    model : :class:`~goldpart.neuralnet.TrainedModel`
    report : :class:`~goldpart.containers.TrainReport`
    split : :class:`~goldpart.dataset.DataSplit`

    Other Parameters
    ----------------
    split_options["train_fraction"] : float
        Default 0.8.
    split_options["validation_fraction"] : float
        Default 0.1.
    split_options["test_fraction"] : float
        Default 0.1. The three fractions must sum to 1.
    split_options["seed"] : int
        Seed of the PCG64 permutation. Default 0.
    model_options["hidden_layers"] : int
        Number of hidden layers; 0 gives linear regression. Default 5.
    model_options["hidden_width"] : int
        Units per hidden layer. Default 200.
    model_options["activation"] : {"relu"}
    model_options["init_seed"] : int
        Seed of the He-scaled weight initialization. Default 0.
    train_options["batch_size"] : int
        Default 1024.
    train_options["max_epochs"] : int
        Default 200. Training always runs all epochs.
    train_options["eval_every"] : int
        Validation interval in epochs. Default 1.
    train_options["shuffle_seed"] : int
        Seed of the per-epoch minibatch shuffle. Default 0.
    train_options["learning_rate"] : float
        Adam step size. Default 0.001.

    """
    if not isinstance(mask, FeatureMask):
        mask = FeatureMask.from_name(mask)
    if split is None:
        split_options = {**SPLIT_OPTIONS, **(split_options or {})}
        split = shuffle_split(table, SplitSpec(**split_options))
    config = model_config(mask.width, model_options)
    tcfg = train_config(train_options)
    data = TrainingData.from_split(table, split, mask, n_max)
    mlp, report = train(config, tcfg, data, stdout, verbose)
    return TrainedModel(mlp=mlp, mask=mask, n_max=n_max), report, split
