import math

import numpy as np
import pytest
from scipy import stats

from gwpscreen.errors import DatasetTooSmall, NotEnoughTrials
from gwpscreen.tuner import (
    EnsembleModel,
    SearchSpace,
    autotune,
    balanced_valid_sample,
    ensemble_top_k,
    predict,
    split_dataset,
    trial_seed,
    upsample_imbalanced,
    with_members,
)
from helpers import constant_member, small_prepared

TINY = SearchSpace(layers=(1, 2), neurons=(2, 8), batch=(8, 32), epochs=(5, 20))


@pytest.fixture(scope="module")
def prepared():
    return small_prepared(60, seed=0)


@pytest.mark.parametrize("n, sizes", [(10, (8, 1, 1)), (207, (165, 21, 21)), (86, (68, 9, 9)), (15, (11, 2, 2))])
def test_split_sizes(n, sizes):
    s = split_dataset(n, 0)
    assert (len(s.train), len(s.valid), len(s.test)) == sizes
    assert sorted(s.train + s.valid + s.test) == list(range(n))


def test_split_common_test_set():
    assert split_dataset(207, 5).test == split_dataset(207, 5).test
    assert split_dataset(207, 5).test != split_dataset(207, 6).test
    with pytest.raises(DatasetTooSmall):
        split_dataset(9, 0)


def test_balanced_sample_uniform_targets():
    pool = list(range(200))
    u = (np.arange(200) + 0.5) / 200
    chosen = balanced_valid_sample(pool, u, 20, seed=1)
    counts = np.bincount(np.minimum((u[chosen] * 10).astype(int), 9), minlength=10)
    assert counts.tolist() == [2] * 10
    assert chosen == sorted(set(chosen))


def test_balanced_sample_single_bin_is_random_subset():
    pool = list(range(50, 80))
    u = np.full(30, 0.42)
    draws = {tuple(balanced_valid_sample(pool, u, 5, seed=s)) for s in range(20)}
    assert all(len(d) == 5 and set(d) <= set(pool) for d in draws)
    assert len(draws) > 10


def test_balanced_sample_tracks_pool_better_than_random():
    rng = np.random.default_rng(0)
    u = rng.beta(0.6, 2.5, 150)
    pool = np.arange(150)
    bal, rnd = [], []
    for s in range(200):
        chosen = balanced_valid_sample(pool, u, 19, seed=s)
        bal.append(stats.ks_2samp(u[chosen], u).statistic)
        plain = np.random.default_rng(10_000 + s).choice(pool, 19, replace=False)
        rnd.append(stats.ks_2samp(u[plain], u).statistic)
    assert np.mean(bal) < np.mean(rnd)


def test_balanced_sample_rejects_oversized_draw():
    with pytest.raises(DatasetTooSmall):
        balanced_valid_sample([1, 2, 3], [0.1, 0.2, 0.3], 3, seed=0)


def test_upsample_fixpoint_and_hand_example():
    idx = list(range(20))
    balanced = [(i % 10) / 10 + 0.05 for i in idx]
    out = upsample_imbalanced(idx, balanced, seed=0)
    assert sorted(out) == idx
    idx = list(range(10))
    u = [0.05] * 9 + [0.95]
    out = upsample_imbalanced(idx, u, seed=0)
    assert len(out) == 14 and out.count(9) == 5
    assert sorted(set(out)) == idx


def test_upsample_never_drops_rows():
    rng = np.random.default_rng(3)
    for s in range(20):
        idx = list(range(40))
        u = rng.beta(0.5, 3.0, 40)
        out = upsample_imbalanced(idx, u, seed=s)
        assert set(out) == set(idx) and len(out) >= 40


def test_trial_seed_pure():
    assert trial_seed(7, 3) == trial_seed(7, 3)
    assert len({trial_seed(7, i) for i in range(50)}) == 50


def test_autotune_budget_one(prepared):
    trials = autotune(prepared, TINY, budget=1, seed=0)
    assert len(trials) == 1 and trials[0].ok


def test_autotune_deterministic_sorted_isolated(prepared):
    a = autotune(prepared, TINY, budget=4, seed=3)
    b = autotune(prepared, TINY, budget=4, seed=3)
    assert [t.summary() for t in a] == [t.summary() for t in b]
    assert all(x.model.theta.tobytes() == y.model.theta.tobytes() for x, y in zip(a, b))
    rm = [t.rmse_qt for t in a]
    assert rm == sorted(rm)
    test = set(prepared.split.test)
    for t in a:
        assert not test & set(t.train_idx) and not test & set(t.valid_idx)
        assert not set(t.train_idx) & set(t.valid_idx)
        assert t.rmse_qt >= 0 and math.isfinite(t.rmse_orig)


def test_autotune_parallel_matches_serial(prepared):
    serial = autotune(prepared, TINY, budget=3, seed=4)
    parallel = autotune(prepared, TINY, budget=3, seed=4, workers=2)
    assert [t.summary() for t in serial] == [t.summary() for t in parallel]


def test_diverged_trials_marked_and_sorted_last(prepared):
    from gwpscreen.tuner import _rank_key

    wild = SearchSpace(layers=(1, 1), neurons=(2, 2), batch=(8, 8), epochs=(5, 5), learning_rate=1e300)
    failed = autotune(prepared, wild, budget=2, seed=0)
    assert all(t.status == "failed" and math.isnan(t.rmse_qt) and t.model is None for t in failed)
    with pytest.raises(NotEnoughTrials):
        ensemble_top_k(failed, prepared, k=1)
    good = autotune(prepared, TINY, budget=2, seed=0)
    mixed = sorted(failed + good, key=_rank_key)
    assert [t.ok for t in mixed] == [True, True, False, False]
    assert ensemble_top_k(failed + good, prepared, k=2).members == tuple(good)


def test_ensemble_mean_and_bounds(prepared):
    dim = prepared.scores.shape[1]
    members = tuple(constant_member(dim, v, i) for i, v in enumerate((0.2, 0.4, 0.6)))
    ens = EnsembleModel(prepared.pipeline, prepared.qt, members)
    orig, u, clamped = ens.predict_scores(prepared.scores[:4])
    assert np.allclose(u, 0.4) and not clamped.any()
    assert np.allclose(orig, prepared.qt.inverse(0.4))
    per = ens.member_predictions(prepared.scores[:4])
    assert np.all(per.min(axis=0) <= u) and np.all(u <= per.max(axis=0))


def test_ensemble_identical_members_and_k1(prepared):
    trials = autotune(prepared, TINY, budget=3, seed=1)
    one = ensemble_top_k(trials, prepared, k=1)
    same = with_members(one, [one.members[0]] * 3)
    x = prepared.scores[:5]
    assert np.allclose(same.predict_scores(x)[1], one.predict_scores(x)[1], rtol=0, atol=1e-15)
    assert np.array_equal(one.predict_scores(x)[1], trials[0].model.predict(x))
    with pytest.raises(NotEnoughTrials):
        ensemble_top_k(trials, prepared, k=4)


def test_ensemble_clamps_above_one(prepared):
    dim = prepared.scores.shape[1]
    ens = EnsembleModel(prepared.pipeline, prepared.qt, (constant_member(dim, 1.3),))
    orig, u, clamped = ens.predict_scores(prepared.scores[:2])
    assert clamped.all() and np.allclose(orig, prepared.qt.references[-1])


def test_ensemble_serialization_and_version(prepared):
    from gwpscreen.errors import ArtifactVersionError

    trials = autotune(prepared, TINY, budget=2, seed=2)
    ens = ensemble_top_k(trials, prepared, k=2)
    blob = ens.to_dict()
    again = EnsembleModel.from_dict(blob)
    x = prepared.scores[:6]
    assert np.array_equal(again.predict_scores(x)[0], ens.predict_scores(x)[0])
    with pytest.raises(ArtifactVersionError):
        EnsembleModel.from_dict({**blob, "schema_version": 0})
    with pytest.raises(ArtifactVersionError):
        EnsembleModel.from_dict({**blob, "members": [{"trial": 0}]})


def test_predict_records(prepared):
    trials = autotune(prepared, TINY, budget=1, seed=0)
    ens = ensemble_top_k(trials, prepared, k=1)
    recs = predict(ens, ["FC(F)(F)C(F)F", "C(", "FC(F)Cl"], ids=["a", "b", "c"])
    assert [r.id for r in recs] == ["a", "b", "c"]
    assert recs[0].ok and recs[2].ok and not recs[1].ok
    assert "UnbalancedParenthesis" in recs[1].error and math.isnan(recs[1].gwp100_pred)
    lo, hi = prepared.qt.references[0], prepared.qt.references[-1]
    assert lo <= recs[0].gwp100_pred <= hi
