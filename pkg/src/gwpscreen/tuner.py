"""Dataset splitting, validation sampling, up-sampling, random search and ensembling.

A typical run::

    data = prepare_dataset(features, gwp100, seed=7)
    trials = autotune(data, SearchSpace(), budget=10, seed=7)
    ensemble = ensemble_top_k(trials, data, k=3)
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from gwpscreen import __version__
from gwpscreen.analysis import metrics
from gwpscreen.descriptors import DESCRIPTOR_NAMES, FeatureMatrix, featurize
from gwpscreen.errors import (
    ArtifactVersionError,
    DatasetTooSmall,
    GwpScreenError,
    InvalidHyperparameters,
    NonFiniteLoss,
    NotEnoughTrials,
    ShapeMismatch,
)
from gwpscreen.molgraph import parse_smiles
from gwpscreen.nnet import Hyperparameters, MlpModel, forward, mlp_init, train
from gwpscreen.preprocess import FeaturePipeline, QuantileTransformer, quantile_fit

log = logging.getLogger(__name__)

__all__ = [
    "DatasetSplit",
    "PreparedDataset",
    "SearchSpace",
    "TrialResult",
    "EnsembleModel",
    "PredictionRecord",
    "split_dataset",
    "balanced_valid_sample",
    "upsample_imbalanced",
    "prepare_dataset",
    "trial_seed",
    "autotune",
    "ensemble_top_k",
    "predict",
]

N_BINS = 10
ENSEMBLE_SCHEMA_VERSION = 1


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _bin_of(u: np.ndarray, n_bins: int = N_BINS) -> np.ndarray:
    """Equal-width bin index over [0, 1]; 1.0 falls in the last bin."""
    return np.minimum((np.clip(u, 0.0, 1.0) * n_bins).astype(int), n_bins - 1)


# --------------------------------------------------------------------------
# splitting and sampling


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[int, ...]
    valid: tuple[int, ...]
    test: tuple[int, ...]
    seed: int

    @property
    def pool(self) -> tuple[int, ...]:
        """Every non-test row, sorted."""
        return tuple(sorted(self.train + self.valid))


def split_dataset(n: int, seed: int) -> DatasetSplit:
    """80/10/10 split; test and valid each take ``round(0.1 n)`` rows (half up).

    The test rows come first off a seeded shuffle and depend only on
    ``(n, seed)``.

    Raises:
        DatasetTooSmall: ``n < 10``.
    """
    if n < 10:
        raise DatasetTooSmall(f"need at least 10 rows, got {n}")
    perm = np.random.default_rng(np.random.SeedSequence(seed)).permutation(n)
    k = _half_up(0.1 * n)
    test = tuple(sorted(int(i) for i in perm[:k]))
    valid = tuple(sorted(int(i) for i in perm[k:2 * k]))
    train = tuple(sorted(int(i) for i in perm[2 * k:]))
    return DatasetSplit(train, valid, test, seed)


def _largest_remainder(counts: np.ndarray, total: int) -> np.ndarray:
    quota = counts * total / counts.sum()
    base = np.floor(quota).astype(int)
    short = total - base.sum()
    # ties go to the lower bin index
    order = sorted(range(len(counts)), key=lambda b: (-(quota[b] - base[b]), b))
    for b in order[:short]:
        base[b] += 1
    return base


def balanced_valid_sample(
    train_pool: Sequence[int], targets: Sequence[float], valid_size: int, seed
) -> list[int]:
    """Stratified draw of ``valid_size`` pool indices over 10 QT-target bins.

    ``targets[i]`` is the QT value of ``train_pool[i]``.  Each bin contributes
    in proportion to its size (largest-remainder rounding); the result is
    sorted.

    Raises:
        DatasetTooSmall: ``valid_size`` is not smaller than the pool.
    """
    pool = np.asarray(train_pool, dtype=int)
    u = np.asarray(targets, dtype=float)
    if pool.shape != u.shape:
        raise ShapeMismatch("one target per pool index is required")
    if not 0 <= valid_size < pool.size:
        raise DatasetTooSmall(f"cannot draw {valid_size} validation rows from a pool of {pool.size}")
    rng = np.random.default_rng(seed)
    bins = _bin_of(u)
    counts = np.bincount(bins, minlength=N_BINS)
    quotas = _largest_remainder(counts, valid_size) if valid_size else np.zeros(N_BINS, int)
    chosen: list[int] = []
    for b in range(N_BINS):
        if quotas[b]:
            members = pool[bins == b]
            chosen.extend(int(i) for i in rng.choice(members, size=quotas[b], replace=False))
    return sorted(chosen)


def upsample_imbalanced(train: Sequence[int], targets: Sequence[float], seed) -> list[int]:
    """Duplicate rows of sparse target bins up to the median bin count.

    The median is taken over the non-empty bins of a 10-bin histogram of
    ``targets`` (aligned with ``train``) and rounded up.  Extra rows are
    drawn with replacement from their own bin; the output is shuffled.
    """
    idx = np.asarray(train, dtype=int)
    u = np.asarray(targets, dtype=float)
    if idx.shape != u.shape:
        raise ShapeMismatch("one target per training index is required")
    rng = np.random.default_rng(seed)
    bins = _bin_of(u)
    counts = np.bincount(bins, minlength=N_BINS)
    nonempty = counts[counts > 0]
    out = list(int(i) for i in idx)
    if nonempty.size >= 2:
        target = int(math.ceil(float(np.median(nonempty))))
        for b in range(N_BINS):
            if 0 < counts[b] < target:
                members = idx[bins == b]
                out.extend(int(i) for i in rng.choice(members, size=target - counts[b], replace=True))
    return [out[i] for i in rng.permutation(len(out))]


# --------------------------------------------------------------------------
# prepared data and search space


@dataclass(frozen=True, eq=False)
class PreparedDataset:
    """Featurized rows with preprocessing fitted on the non-test pool.

    ``scores`` are PC scores of every row and ``u`` the QT-scale targets.
    """

    ids: tuple[str, ...]
    features: FeatureMatrix
    targets: np.ndarray
    split: DatasetSplit
    pipeline: FeaturePipeline
    qt: QuantileTransformer
    scores: np.ndarray
    u: np.ndarray

    @property
    def n(self) -> int:
        return len(self.ids)


def prepare_dataset(
    features: FeatureMatrix, targets, seed: int, variance_threshold: float = 0.99
) -> PreparedDataset:
    """Split, then fit standardizer, PCA and quantile transform on train + valid."""
    y = np.asarray(targets, dtype=float).ravel()
    if y.shape[0] != features.values.shape[0]:
        raise ShapeMismatch(f"{features.values.shape[0]} feature rows but {y.shape[0]} targets")
    split = split_dataset(y.shape[0], seed)
    pool = np.array(split.pool)
    pipeline = FeaturePipeline.fit(features.values[pool], features.column_names, variance_threshold)
    qt = quantile_fit(y[pool])
    scores = pipeline.transform(features.values)
    return PreparedDataset(features.ids, features, y, split, pipeline, qt, scores, np.asarray(qt.transform(y)))


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive integer ranges and the activation set for random search."""

    layers: tuple[int, int] = (1, 10)
    neurons: tuple[int, int] = (2, 128)
    activations: tuple[str, ...] = ("tanh", "sigmoid")
    batch: tuple[int, int] = (16, 192)
    epochs: tuple[int, int] = (1000, 10000)
    learning_rate: float = 1e-3

    def __post_init__(self) -> None:
        for name in ("layers", "neurons", "batch", "epochs"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise InvalidHyperparameters(f"bad {name} range {(lo, hi)}")
        if not self.activations:
            raise InvalidHyperparameters("empty activation set")

    def sample(self, rng: np.random.Generator, seed: int) -> Hyperparameters:
        def draw(r: tuple[int, int]) -> int:
            return int(rng.integers(r[0], r[1] + 1))

        return Hyperparameters(
            n_layers=draw(self.layers),
            n_neurons=draw(self.neurons),
            activation=self.activations[int(rng.integers(len(self.activations)))],
            batch_size=draw(self.batch),
            epochs=draw(self.epochs),
            learning_rate=self.learning_rate,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> SearchSpace:
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


# --------------------------------------------------------------------------
# trials


@dataclass(eq=False)
class TrialResult:
    """One sampled configuration with its validation metrics.

    ``status`` is ``"ok"`` or ``"failed"``; failed trials carry NaN metrics,
    no model and the failure message.
    """

    trial: int
    seed: int
    hp: Hyperparameters
    rmse_qt: float
    r2_qt: float
    rmse_orig: float
    r2_orig: float
    train_idx: tuple[int, ...] = ()
    valid_idx: tuple[int, ...] = ()
    model: MlpModel | None = None
    status: str = "ok"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def summary(self) -> dict:
        """Flat row for the trials report."""
        return {
            "trial": self.trial,
            "epochs": self.hp.epochs,
            "layers": self.hp.n_layers,
            "neurons": self.hp.n_neurons,
            "batch": self.hp.batch_size,
            "activation": self.hp.activation,
            "rmse_qt": self.rmse_qt,
            "r2_qt": self.r2_qt,
            "rmse_orig": self.rmse_orig,
            "r2_orig": self.r2_orig,
            "status": self.status,
        }

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "hyperparameters": self.hp.to_dict(),
            "rmse_qt": self.rmse_qt,
            "r2_qt": self.r2_qt,
            "rmse_orig": self.rmse_orig,
            "r2_orig": self.r2_orig,
            "train_idx": list(self.train_idx),
            "valid_idx": list(self.valid_idx),
            "model": None if self.model is None else self.model.to_dict(),
            "status": self.status,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TrialResult:
        return cls(
            trial=int(d["trial"]),
            seed=int(d["seed"]),
            hp=Hyperparameters.from_dict(d["hyperparameters"]),
            rmse_qt=float(d["rmse_qt"]),
            r2_qt=float(d["r2_qt"]),
            rmse_orig=float(d["rmse_orig"]),
            r2_orig=float(d["r2_orig"]),
            train_idx=tuple(d.get("train_idx", ())),
            valid_idx=tuple(d.get("valid_idx", ())),
            model=None if d.get("model") is None else MlpModel.from_dict(d["model"]),
            status=d.get("status", "ok"),
            error=d.get("error", ""),
        )


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed for trial ``trial``, a pure function of ``(master_seed, trial)``."""
    hi, lo = np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def _run_trial(data: PreparedDataset, space: SearchSpace, master_seed: int, i: int) -> TrialResult:
    seed = trial_seed(master_seed, i)
    ss_hp, ss_valid, ss_up, ss_net = np.random.SeedSequence(seed).spawn(4)
    hp = space.sample(np.random.default_rng(ss_hp), int(ss_net.generate_state(1, np.uint64)[0]))
    pool = np.array(data.split.pool)
    valid = balanced_valid_sample(pool, data.u[pool], len(data.split.valid), ss_valid)
    vset = set(valid)
    train_rows = [int(r) for r in pool if int(r) not in vset]
    augmented = upsample_imbalanced(train_rows, data.u[train_rows], ss_up)
    try:
        model = train(mlp_init(data.scores.shape[1], hp), data.scores[augmented], data.u[augmented])
        pred_u = forward(model, data.scores[valid])
        if not np.all(np.isfinite(pred_u)):
            raise NonFiniteLoss(hp.epochs - 1, float("nan"))
    except NonFiniteLoss as exc:
        log.warning("trial %d diverged: %s", i, exc)
        nan = float("nan")
        return TrialResult(i, seed, hp, nan, nan, nan, nan, tuple(train_rows), tuple(valid),
                           status="failed", error=str(exc))
    mq = metrics(pred_u, data.u[valid], "qt")
    mo = metrics(data.qt.inverse(pred_u), data.targets[valid], "orig")
    log.info("trial %d: %s rmse_qt=%.4f", i, hp, mq.rmse)
    return TrialResult(i, seed, hp, mq.rmse, mq.r2, mo.rmse, mo.r2, tuple(train_rows), tuple(valid), model)


_WORKER_STATE: tuple | None = None


def _init_worker(data: PreparedDataset, space: SearchSpace, master_seed: int) -> None:
    global _WORKER_STATE
    _WORKER_STATE = (data, space, master_seed)


def _worker_trial(i: int) -> TrialResult:
    data, space, master_seed = _WORKER_STATE
    return _run_trial(data, space, master_seed, i)


def _rank_key(t: TrialResult) -> tuple:
    return (not t.ok, t.rmse_qt if t.ok else 0.0, t.trial)


def autotune(
    data: PreparedDataset,
    search_space: SearchSpace | None = None,
    budget: int = 10,
    seed: int = 0,
    workers: int = 1,
) -> list[TrialResult]:
    """Random search over ``search_space`` with ``budget`` trials.

    Each trial draws its hyperparameters, a balanced validation partition of
    the non-test pool, and an up-sampled training set from
    ``trial_seed(seed, i)``, so serial and parallel runs agree.  Successful
    trials come first, ascending by ``rmse_qt`` (ties by trial index);
    diverged trials follow, marked ``status="failed"``.
    """
    if budget < 1:
        raise InvalidHyperparameters(f"budget must be >= 1, got {budget}")
    space = SearchSpace() if search_space is None else search_space
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(data, space, seed)) as pool:
            results = list(pool.map(_worker_trial, range(budget)))
    else:
        results = [_run_trial(data, space, seed, i) for i in range(budget)]
    test = set(data.split.test)
    for r in results:
        if test.intersection(r.train_idx) or test.intersection(r.valid_idx):
            raise GwpScreenError(f"trial {r.trial} touched the test set")
    return sorted(results, key=_rank_key)


# --------------------------------------------------------------------------
# ensemble


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """Shared preprocessing plus the ``k`` best trained networks."""

    pipeline: FeaturePipeline
    qt: QuantileTransformer
    members: tuple[TrialResult, ...]
    average_scale: str = "qt"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.members:
            raise NotEnoughTrials("an ensemble needs at least one member")
        if self.average_scale not in ("qt", "original"):
            raise ValueError(f"average_scale must be 'qt' or 'original', not {self.average_scale!r}")

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def column_names(self) -> tuple[str, ...]:
        return self.pipeline.standardizer.column_names

    def member_predictions(self, scores) -> np.ndarray:
        """QT-scale predictions, one row per member."""
        return np.vstack([forward(m.model, scores) for m in self.members])

    def predict_scores(self, scores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(gwp100, qt_value, clamped)`` for PC-score rows."""
        per = self.member_predictions(scores)
        if self.average_scale == "qt":
            u = per.mean(axis=0)
            orig, clamped = self.qt.inverse_with_flags(u)
        else:
            clamped = ((per < 0.0) | (per > 1.0)).any(axis=0)
            orig = np.mean([self.qt.inverse(p) for p in per], axis=0)
            u = np.atleast_1d(self.qt.transform(orig))
        return orig, u, clamped

    def predict_features(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Same as :meth:`predict_scores` from raw descriptor rows."""
        return self.predict_scores(self.pipeline.transform(x))

    def to_dict(self) -> dict:
        return {
            "schema_version": ENSEMBLE_SCHEMA_VERSION,
            "package_version": __version__,
            "average_scale": self.average_scale,
            "pipeline": self.pipeline.to_dict(),
            "quantile_transformer": self.qt.to_dict(),
            "members": [m.to_dict() for m in self.members],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EnsembleModel:
        version = d.get("schema_version")
        if version != ENSEMBLE_SCHEMA_VERSION:
            raise ArtifactVersionError(f"unsupported ensemble schema {version!r}")
        try:
            members = tuple(TrialResult.from_dict(m) for m in d["members"])
            if any(m.model is None for m in members):
                raise ArtifactVersionError("ensemble member without weights")
            return cls(
                FeaturePipeline.from_dict(d["pipeline"]),
                QuantileTransformer.from_dict(d["quantile_transformer"]),
                members,
                d.get("average_scale", "qt"),
                dict(d.get("metadata", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ArtifactVersionError(f"malformed ensemble artifact: {exc}") from exc


def ensemble_top_k(
    trials: Sequence[TrialResult], data: PreparedDataset, k: int = 3, average_scale: str = "qt"
) -> EnsembleModel:
    """Ensemble of the ``k`` successful trials with the lowest ``rmse_qt``.

    Raises:
        NotEnoughTrials: fewer than ``k`` trials succeeded.
    """
    if k < 1:
        raise InvalidHyperparameters(f"k must be >= 1, got {k}")
    ok = sorted((t for t in trials if t.ok), key=_rank_key)
    if len(ok) < k:
        raise NotEnoughTrials(f"{len(ok)} successful trials, {k} needed")
    return EnsembleModel(data.pipeline, data.qt, tuple(ok[:k]), average_scale)


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    smiles: str
    gwp100_pred: float
    qt_value: float
    clamped: bool
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def predict(
    ensemble: EnsembleModel, molecules: Sequence[str], ids: Sequence[str] | None = None
) -> list[PredictionRecord]:
    """Predict GWP100 for SMILES strings; bad molecules get an error record.

    Raises:
        ArtifactVersionError: the ensemble was trained on a different
            descriptor set.
    """
    if tuple(ensemble.column_names) != DESCRIPTOR_NAMES:
        raise ArtifactVersionError("ensemble descriptor columns differ from this featurizer")
    ids = [str(i) for i in range(len(molecules))] if ids is None else [str(i) for i in ids]
    if len(ids) != len(molecules):
        raise ShapeMismatch("one id per molecule is required")
    rows: list[list[float]] = []
    where: list[int] = []
    errors: dict[int, str] = {}
    for j, smi in enumerate(molecules):
        try:
            rows.append(list(featurize(parse_smiles(smi)).values()))
            where.append(j)
        except GwpScreenError as exc:
            errors[j] = f"{type(exc).__name__}: {exc}"
    out: list[PredictionRecord | None] = [None] * len(molecules)
    if rows:
        orig, u, clamped = ensemble.predict_features(np.array(rows, dtype=float))
        for pos, j in enumerate(where):
            out[j] = PredictionRecord(ids[j], molecules[j], float(orig[pos]), float(u[pos]), bool(clamped[pos]))
    nan = float("nan")
    for j, msg in errors.items():
        out[j] = PredictionRecord(ids[j], molecules[j], nan, nan, False, msg)
    return out  # type: ignore[return-value]


def with_members(ensemble: EnsembleModel, members: Sequence[TrialResult]) -> EnsembleModel:
    """Copy of ``ensemble`` with a different member list."""
    return replace(ensemble, members=tuple(members))
