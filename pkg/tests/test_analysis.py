import math

import numpy as np
import pytest

from gwpscreen.analysis import (
    evaluate,
    histogram,
    metrics,
    parity_triples,
    pc_loadings,
    permutation_sensitivity,
    rank_by_magnitude,
)
from gwpscreen.errors import DegenerateMatrix, IndexOutOfRange, LengthMismatch, ShapeMismatch
from gwpscreen.preprocess import PcaModel, quantile_fit
from helpers import constant_member, linear_task, small_prepared


def test_metrics_examples():
    m = metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert m.rmse == 0.0 and m.r2 == 1.0
    m = metrics([0.0, 0.0], [0.0, 1.0], "qt")
    assert math.isclose(m.rmse, math.sqrt(0.5)) and m.r2 == -1.0 and m.scale == "qt"
    truths = [1.0, 4.0, 7.0]
    assert metrics([4.0] * 3, truths).r2 == 0.0


def test_metrics_constant_truths():
    m = metrics([1.0, 2.0], [3.0, 3.0])
    assert not m.r2_defined and math.isnan(m.r2) and math.isclose(m.rmse, math.sqrt(2.5))
    with pytest.raises(DegenerateMatrix):
        metrics([1.0, 2.0], [3.0, 3.0], strict=True)
    with pytest.raises(LengthMismatch):
        metrics([1.0], [1.0, 2.0])
    with pytest.raises(LengthMismatch):
        metrics([], [])


@pytest.mark.parametrize("trained", [False, True], ids=["hand-built", "trained"])
def test_sensitivity_linear_task(trained):
    ens, x, truth = linear_task(trained)
    rep = permutation_sensitivity(ens, x, truth, seed=0, n_repeats=10)
    assert rep.ranking[0] == 0 and rep.impact[0] > 0
    assert abs(rep.impact[2]) < 1e-9 and abs(rep.importance[2]) < 1e-9
    assert rep.importance[0] > 0
    if not trained:
        assert rep.baseline_rmse < 1e-6
        # p10 to p90 of PC1 times the slope
        lo, hi = np.percentile(x[:, 0], [10, 90])
        assert math.isclose(rep.impact[0], 3.0 * (hi - lo), rel_tol=1e-3)


def test_sensitivity_report_schema():
    ens, x, truth = linear_task(False)
    rep = permutation_sensitivity(ens, x, truth, seed=1, n_repeats=3)
    d = rep.to_dict()
    assert [row["pc"] for row in d["pcs"]] == [rep.labels[j] for j in rep.ranking]
    assert {"rank", "pc", "impact", "importance", "importance_se"} == set(d["pcs"][0])
    assert d["bars"][0][0] == "PC1" and len(d["bars"]) == 4
    assert rep.top(2)[0] == 0


def test_sensitivity_deterministic_and_checks():
    ens, x, truth = linear_task(False)
    a = permutation_sensitivity(ens, x, truth, seed=5, n_repeats=4)
    b = permutation_sensitivity(ens, x, truth, seed=5, n_repeats=4)
    assert np.array_equal(a.importance, b.importance)
    with pytest.raises(ShapeMismatch):
        permutation_sensitivity(ens, x[:, :3], truth)
    with pytest.raises(ShapeMismatch):
        permutation_sensitivity(ens, x, truth[:-1])


def test_rank_by_magnitude_stable():
    assert rank_by_magnitude([1.0, -3.0, 3.0, 0.5]) == (1, 2, 0, 3)


def _toy_pca(component):
    comp = np.array([component, [0.0] * len(component)])
    names = tuple(f"desc{j}" for j in range(len(component)))
    return PcaModel(np.zeros(len(component)), comp, np.array([1.0, 0.0]), np.array([1.0, 0.0]), 1, 0.99, names)


def test_loadings_top_one():
    rep = pc_loadings(_toy_pca([0.9, 0.1, -0.3, 0.2]), 0, top_k=1)
    assert rep.pairs == (("desc0", 0.9),) and rep.label == "PC1"
    full = pc_loadings(_toy_pca([0.1, -0.9, 0.3, 0.2]), 0, top_k=5)
    assert [n for n, _ in full.pairs] == ["desc1", "desc2", "desc3", "desc0"]
    assert full.pairs[0][1] == -0.9
    with pytest.raises(IndexOutOfRange):
        pc_loadings(_toy_pca([1.0, 0.0]), 1)


def test_histogram_examples():
    edges, counts = histogram([1, 1, 2], 2)
    assert counts.tolist() == [2, 1] and edges.tolist() == [1.0, 1.5, 2.0]
    with pytest.raises(ValueError):
        histogram([], 3)


def test_qt_histogram_near_flat():
    y = np.random.default_rng(0).lognormal(4, 2.5, 300)
    u = quantile_fit(y).transform(y)
    _, counts = histogram(u, 10)
    assert counts.max() / counts.min() < 2


def test_evaluate_and_parity():
    data = small_prepared(40, seed=2)
    dim = data.scores.shape[1]
    from gwpscreen.tuner import EnsembleModel

    ens = EnsembleModel(data.pipeline, data.qt, (constant_member(dim, 0.5, 0), constant_member(dim, 0.7, 1)))
    test = list(data.split.test)
    m = evaluate(ens, data.scores[test], data.targets[test])
    assert m.n == len(test)
    assert math.isclose(m.rmse_qt, float(np.sqrt(np.mean((0.6 - data.u[test]) ** 2))), rel_tol=1e-12)
    triples = parity_triples(ens, data.scores[test], data.targets[test])
    assert len(triples) == 3 * len(test)
    assert {t[2] for t in triples} == {"ensemble", "trial0", "trial1"}
