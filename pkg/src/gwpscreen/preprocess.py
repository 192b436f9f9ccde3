"""Feature standardization, PCA and the quantile target transform.

Example:
    >>> qt = quantile_fit([10, 20, 30, 40, 50])
    >>> float(qt.transform(25)), float(qt.inverse(0.5))
    (0.375, 30.0)
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from gwpscreen.errors import ArtifactVersionError, DegenerateMatrix, ShapeMismatch

__all__ = [
    "Standardizer",
    "PcaModel",
    "QuantileTransformer",
    "FeaturePipeline",
    "standardize_fit",
    "pca_fit",
    "pca_transform",
    "quantile_fit",
    "quantile_transform",
    "quantile_inverse",
    "ks_distance_uniform",
]


def _as_2d(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


# --------------------------------------------------------------------------
# standardization


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Z-scores with population standard deviation.

    ``mean`` and ``std`` cover the retained columns only; ``drop_list``
    holds names of the zero-variance columns removed by :meth:`transform`.
    """

    column_names: tuple[str, ...]
    retained: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    drop_list: tuple[str, ...] = ()

    @property
    def _keep(self) -> np.ndarray:
        pos = {n: i for i, n in enumerate(self.column_names)}
        return np.array([pos[n] for n in self.retained], dtype=int)

    def transform(self, x) -> np.ndarray:
        x = _as_2d(x)
        if x.shape[1] != len(self.column_names):
            raise ShapeMismatch(f"expected {len(self.column_names)} columns, got {x.shape[1]}")
        return (x[:, self._keep] - self.mean) / self.std

    def inverse_transform(self, z) -> np.ndarray:
        """Back to the retained raw columns."""
        return _as_2d(z) * self.std + self.mean

    def to_dict(self) -> dict:
        return {
            "column_names": list(self.column_names),
            "retained": list(self.retained),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "drop_list": list(self.drop_list),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Standardizer:
        return cls(
            tuple(d["column_names"]),
            tuple(d["retained"]),
            np.array(d["mean"], dtype=float),
            np.array(d["std"], dtype=float),
            tuple(d["drop_list"]),
        )


def standardize_fit(x, column_names: Sequence[str] | None = None) -> Standardizer:
    """Fit per-column mean and population std, dropping constant columns.

    Raises:
        DegenerateMatrix: fewer than two rows, or every column constant.
    """
    x = _as_2d(x)
    if x.shape[0] < 2:
        raise DegenerateMatrix("standardization needs at least two rows")
    names = tuple(column_names) if column_names is not None else tuple(f"x{j}" for j in range(x.shape[1]))
    if len(names) != x.shape[1]:
        raise ShapeMismatch("one name per column is required")
    constant = np.all(x == x[0], axis=0)
    if constant.all():
        raise DegenerateMatrix("every column is constant")
    keep = ~constant
    kept = x[:, keep]
    return Standardizer(
        column_names=names,
        retained=tuple(n for n, k in zip(names, keep) if k),
        mean=kept.mean(axis=0),
        std=kept.std(axis=0),
        drop_list=tuple(n for n, k in zip(names, keep) if not k),
    )


# --------------------------------------------------------------------------
# PCA


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Principal axes of a (standardized) matrix.

    ``components`` holds every axis found by the SVD as rows; only the first
    ``n_retained`` are used by :meth:`transform`.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    n_retained: int
    threshold: float
    column_names: tuple[str, ...] = field(default=())

    @property
    def cumulative_variance(self) -> float:
        return float(np.cumsum(self.explained_variance_ratio)[self.n_retained - 1])

    @property
    def retained_components(self) -> np.ndarray:
        return self.components[: self.n_retained]

    def transform(self, x, all_components: bool = False) -> np.ndarray:
        x = _as_2d(x)
        if x.shape[1] != self.components.shape[1]:
            raise ShapeMismatch(f"expected {self.components.shape[1]} columns, got {x.shape[1]}")
        comps = self.components if all_components else self.retained_components
        return (x - self.mean) @ comps.T

    def inverse_transform(self, scores) -> np.ndarray:
        scores = _as_2d(scores)
        k = scores.shape[1]
        if k > self.components.shape[0]:
            raise ShapeMismatch("more scores than components")
        return scores @ self.components[:k] + self.mean

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components_shape": list(self.components.shape),
            "components": self.components.ravel().tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "n_retained": self.n_retained,
            "threshold": self.threshold,
            "column_names": list(self.column_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PcaModel:
        shape = tuple(d["components_shape"])
        comps = np.array(d["components"], dtype=float)
        if comps.size != shape[0] * shape[1]:
            raise ArtifactVersionError("PCA component array does not match its shape")
        return cls(
            np.array(d["mean"], dtype=float),
            comps.reshape(shape),
            np.array(d["explained_variance"], dtype=float),
            np.array(d["explained_variance_ratio"], dtype=float),
            int(d["n_retained"]),
            float(d["threshold"]),
            tuple(d["column_names"]),
        )


def pca_fit(x, threshold: float = 0.99, column_names: Sequence[str] = ()) -> PcaModel:
    """SVD of the centred matrix; keep the fewest axes reaching ``threshold``.

    Each axis is sign-fixed so its largest-magnitude loading is positive.

    Raises:
        DegenerateMatrix: fewer than two rows or zero total variance.
    """
    x = _as_2d(x)
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    n = x.shape[0]
    if n < 2:
        raise DegenerateMatrix("PCA needs at least two rows")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    var = s**2 / n
    total = var.sum()
    if total <= 0:
        raise DegenerateMatrix("matrix has zero variance")
    ratio = var / total
    rows = np.arange(vt.shape[0])
    pivots = np.argmax(np.abs(vt), axis=1)
    signs = np.where(vt[rows, pivots] < 0, -1.0, 1.0)
    vt = vt * signs[:, None]
    cum = np.cumsum(ratio)
    reached = np.nonzero(cum >= threshold)[0]
    n_retained = int(reached[0]) + 1 if reached.size else len(ratio)
    return PcaModel(mean, vt, var, ratio, n_retained, float(threshold), tuple(column_names))


def pca_transform(model: PcaModel, x) -> np.ndarray:
    return model.transform(x)


# --------------------------------------------------------------------------
# quantile transform


@dataclass(frozen=True, eq=False)
class QuantileTransformer:
    """Empirical-CDF map of a target onto [0, 1].

    ``references`` are the target quantiles at the equally spaced
    ``levels``.  Ties average the forward and backward interpolations.
    """

    references: np.ndarray
    levels: np.ndarray

    def transform(self, x):
        """Map to [0, 1]; values beyond the reference range clamp to 0 or 1."""
        arr = np.asarray(x, dtype=float)
        ref, lev = self.references, self.levels
        fwd = np.interp(arr, ref, lev)
        bwd = -np.interp(-arr, -ref[::-1], -lev[::-1])
        u = 0.5 * (fwd + bwd)
        u = np.where(arr <= ref[0], 0.0, np.where(arr >= ref[-1], 1.0, u))
        return float(u) if np.ndim(u) == 0 else u

    def inverse(self, u):
        arr = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        x = np.interp(arr, self.levels, self.references)
        return float(x) if np.ndim(x) == 0 else x

    def inverse_with_flags(self, u) -> tuple[np.ndarray, np.ndarray]:
        """Inverse map plus a flag per value that had to be clamped into [0, 1]."""
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        clamped = (arr < 0.0) | (arr > 1.0)
        return np.atleast_1d(self.inverse(arr)), clamped

    def to_dict(self) -> dict:
        return {"references": self.references.tolist(), "levels": self.levels.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> QuantileTransformer:
        ref = np.array(d["references"], dtype=float)
        lev = np.array(d["levels"], dtype=float)
        if ref.shape != lev.shape or ref.size < 2:
            raise ArtifactVersionError("malformed quantile transformer")
        return cls(ref, lev)


def quantile_fit(targets, n_quantiles: int | None = None) -> QuantileTransformer:
    """Fit on ``targets`` with ``min(len(targets), 1000)`` quantiles by default.

    Raises:
        DegenerateMatrix: fewer than two values or a constant target.
    """
    y = np.asarray(targets, dtype=float).ravel()
    if y.size < 2:
        raise DegenerateMatrix("quantile transform needs at least two targets")
    if np.all(y == y[0]):
        raise DegenerateMatrix("target is constant")
    nq = min(y.size, 1000) if n_quantiles is None else int(n_quantiles)
    if nq < 2:
        raise ValueError("n_quantiles must be at least 2")
    levels = np.linspace(0.0, 1.0, nq)
    references = np.quantile(y, levels)
    # quantile interpolation can leave the grid a hair non-monotone
    references = np.maximum.accumulate(references)
    return QuantileTransformer(references, levels)


def quantile_transform(t: QuantileTransformer, x):
    return t.transform(x)


def quantile_inverse(t: QuantileTransformer, u):
    return t.inverse(u)


def ks_distance_uniform(u) -> float:
    """Kolmogorov-Smirnov distance of a sample from U(0, 1)."""
    return float(stats.kstest(np.asarray(u, dtype=float), "uniform").statistic)


# --------------------------------------------------------------------------
# combined feature pipeline


@dataclass(frozen=True, eq=False)
class FeaturePipeline:
    """Standardizer followed by PCA: raw descriptors to retained PC scores."""

    standardizer: Standardizer
    pca: PcaModel

    @classmethod
    def fit(cls, x, column_names: Sequence[str], threshold: float = 0.99) -> FeaturePipeline:
        std = standardize_fit(x, column_names)
        pca = pca_fit(std.transform(x), threshold, std.retained)
        return cls(std, pca)

    def transform(self, x) -> np.ndarray:
        return self.pca.transform(self.standardizer.transform(x))

    @property
    def n_components(self) -> int:
        return self.pca.n_retained

    def to_dict(self) -> dict:
        return {"standardizer": self.standardizer.to_dict(), "pca": self.pca.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> FeaturePipeline:
        return cls(Standardizer.from_dict(d["standardizer"]), PcaModel.from_dict(d["pca"]))
