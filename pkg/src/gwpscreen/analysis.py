"""Evaluation metrics, PC sensitivity, PC-loading reports and histograms."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from gwpscreen.errors import DegenerateMatrix, IndexOutOfRange, LengthMismatch, ShapeMismatch

if TYPE_CHECKING:
    from gwpscreen.preprocess import PcaModel
    from gwpscreen.tuner import EnsembleModel

__all__ = [
    "ScaleMetrics",
    "Metrics",
    "SensitivityReport",
    "LoadingReport",
    "metrics",
    "evaluate",
    "permutation_sensitivity",
    "pc_loadings",
    "histogram",
    "parity_triples",
]


@dataclass(frozen=True)
class ScaleMetrics:
    """RMSE and R² on one scale.

    ``r2_defined`` is False when the truths are constant; ``r2`` is then NaN.
    """

    scale: str
    rmse: float
    r2: float
    n: int
    r2_defined: bool = True


@dataclass(frozen=True)
class Metrics:
    rmse_qt: float
    r2_qt: float
    rmse_orig: float
    r2_orig: float
    n: int

    def to_dict(self) -> dict:
        return {"rmse_qt": self.rmse_qt, "r2_qt": self.r2_qt, "rmse_orig": self.rmse_orig,
                "r2_orig": self.r2_orig, "n": self.n}


def metrics(predictions, truths, scale_tag: str = "orig", strict: bool = False) -> ScaleMetrics:
    """RMSE and coefficient of determination.

    >>> m = metrics([0, 0], [0, 1])
    >>> round(m.rmse, 4), m.r2
    (0.7071, -1.0)

    Raises:
        LengthMismatch: lengths differ or are zero.
        DegenerateMatrix: constant truths with ``strict=True``.
    """
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.shape != t.shape or p.size == 0:
        raise LengthMismatch(f"{p.size} predictions for {t.size} truths")
    resid = p - t
    ss_res = float(resid @ resid)
    rmse = float(np.sqrt(ss_res / p.size))
    dev = t - t.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0.0:
        if strict:
            raise DegenerateMatrix("R² is undefined for constant truths")
        return ScaleMetrics(scale_tag, rmse, float("nan"), int(p.size), False)
    return ScaleMetrics(scale_tag, rmse, 1.0 - ss_res / ss_tot, int(p.size))


def evaluate(ensemble: EnsembleModel, scores, truths) -> Metrics:
    """Ensemble metrics on the QT and original scales for PC-score rows."""
    t = np.asarray(truths, dtype=float)
    orig, u, _ = ensemble.predict_scores(scores)
    mq = metrics(u, ensemble.qt.transform(t), "qt")
    mo = metrics(orig, t, "orig")
    return Metrics(mq.rmse, mq.r2, mo.rmse, mo.r2, mo.n)


# --------------------------------------------------------------------------
# sensitivity


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    """Per-PC signed impact and permutation importance, original GWP scale.

    ``ranking`` lists PC indices (0-based) by descending ``|impact|``.
    """

    labels: tuple[str, ...]
    impact: np.ndarray
    importance: np.ndarray
    importance_se: np.ndarray
    ranking: tuple[int, ...]
    baseline_rmse: float
    n_repeats: int

    def top(self, k: int) -> list[int]:
        return list(self.ranking[:k])

    def bars(self) -> list[tuple[str, float]]:
        """Plot-ready (PC label, signed impact) pairs in ranking order."""
        return [(self.labels[j], float(self.impact[j])) for j in self.ranking]

    def rows(self) -> list[dict]:
        return [
            {
                "rank": r + 1,
                "pc": self.labels[j],
                "impact": float(self.impact[j]),
                "importance": float(self.importance[j]),
                "importance_se": float(self.importance_se[j]),
            }
            for r, j in enumerate(self.ranking)
        ]

    def to_dict(self) -> dict:
        return {"baseline_rmse": self.baseline_rmse, "n_repeats": self.n_repeats, "pcs": self.rows(),
                "bars": [list(b) for b in self.bars()]}


def rank_by_magnitude(values) -> tuple[int, ...]:
    """Indices by descending magnitude; ties keep index order."""
    v = np.abs(np.asarray(values, dtype=float))
    return tuple(int(i) for i in np.argsort(-v, kind="stable"))


def permutation_sensitivity(
    ensemble: EnsembleModel, scores, truths, seed: int = 0, n_repeats: int = 30
) -> SensitivityReport:
    """Permutation importance and p10-to-p90 signed impact of each PC.

    Importance of PC j is the mean RMSE increase (original scale) when
    column j is shuffled.  Impact is the mean prediction with column j held
    at its 90th percentile minus the same at its 10th percentile, other
    columns as observed.  Run this on the train + valid pool only.
    """
    x = np.asarray(scores, dtype=float)
    t = np.asarray(truths, dtype=float).ravel()
    if x.ndim != 2 or x.shape[0] != t.shape[0]:
        raise ShapeMismatch(f"scores {x.shape} do not match {t.shape[0]} truths")
    if x.shape[1] != ensemble.pipeline.n_components:
        raise ShapeMismatch(f"expected {ensemble.pipeline.n_components} PC columns, got {x.shape[1]}")
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")

    def predict(m: np.ndarray) -> np.ndarray:
        return ensemble.predict_scores(m)[0]

    def rmse(m: np.ndarray) -> float:
        r = predict(m) - t
        return float(np.sqrt(r @ r / r.size))

    p = x.shape[1]
    base = rmse(x)
    deltas = np.zeros((n_repeats, p))
    for r, ss in enumerate(np.random.SeedSequence(seed).spawn(n_repeats)):
        rng = np.random.default_rng(ss)
        for j in range(p):
            xp = x.copy()
            xp[:, j] = x[rng.permutation(x.shape[0]), j]
            deltas[r, j] = rmse(xp) - base
    impact = np.zeros(p)
    for j in range(p):
        lo, hi = np.percentile(x[:, j], [10, 90])
        xl, xh = x.copy(), x.copy()
        xl[:, j] = lo
        xh[:, j] = hi
        impact[j] = predict(xh).mean() - predict(xl).mean()
    se = deltas.std(axis=0, ddof=1) / np.sqrt(n_repeats) if n_repeats > 1 else np.zeros(p)
    return SensitivityReport(
        labels=tuple(f"PC{j + 1}" for j in range(p)),
        impact=impact,
        importance=deltas.mean(axis=0),
        importance_se=se,
        ranking=rank_by_magnitude(impact),
        baseline_rmse=base,
        n_repeats=n_repeats,
    )


# --------------------------------------------------------------------------
# loadings


@dataclass(frozen=True, eq=False)
class LoadingReport:
    """Top descriptors of one principal component, by descending |loading|."""

    pc: int
    pairs: tuple[tuple[str, float], ...]
    component: np.ndarray

    @property
    def label(self) -> str:
        return f"PC{self.pc + 1}"

    def rows(self) -> list[dict]:
        return [{"pc": self.label, "descriptor": name, "loading": value} for name, value in self.pairs]


def pc_loadings(pca: PcaModel, pc: int, top_k: int = 5) -> LoadingReport:
    """The ``top_k`` largest-magnitude loadings of component ``pc`` (0-based).

    Raises:
        IndexOutOfRange: ``pc`` is not a retained component.
    """
    if not 0 <= pc < pca.n_retained:
        raise IndexOutOfRange(f"PC index {pc} outside 0..{pca.n_retained - 1}")
    comp = pca.components[pc]
    names = pca.column_names or tuple(f"x{j}" for j in range(comp.size))
    order = rank_by_magnitude(comp)[:top_k]
    return LoadingReport(pc, tuple((names[j], float(comp[j])) for j in order), comp.copy())


# --------------------------------------------------------------------------
# histograms and parity data


def histogram(values, n_bins: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width bins over [min, max]; the last bin is closed on the right.

    >>> edges, counts = histogram([1, 1, 2], 2)
    >>> counts.tolist()
    [2, 1]
    """
    v = np.asarray(values, dtype=float).ravel()
    if n_bins < 1 or v.size == 0:
        raise ValueError("histogram needs n_bins >= 1 and at least one value")
    counts, edges = np.histogram(v, bins=n_bins)
    return edges, counts


def parity_triples(
    ensemble: EnsembleModel, scores, truths, ids: Sequence[str] | None = None
) -> list[tuple[float, float, str]]:
    """(truth, prediction, model-id) for the ensemble and every member."""
    t = np.asarray(truths, dtype=float).ravel()
    orig, _, _ = ensemble.predict_scores(scores)
    out = [(float(a), float(b), "ensemble") for a, b in zip(t, orig)]
    for m, pred in zip(ensemble.members, ensemble.member_predictions(scores)):
        for a, b in zip(t, ensemble.qt.inverse(pred)):
            out.append((float(a), float(b), f"trial{m.trial}"))
    return out
