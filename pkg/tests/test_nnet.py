import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwpscreen import nnet
from gwpscreen.errors import InvalidHyperparameters, NonFiniteLoss, ShapeMismatch
from gwpscreen.nnet import Hyperparameters, MlpModel, _fallback, adam_step, forward, mlp_init, train
from helpers import gradient_check

compiled = pytest.mark.skipif(nnet.BACKEND != "compiled", reason="compiled kernel not built")


@pytest.mark.parametrize(
    "field, value",
    [("n_layers", 0), ("n_neurons", 0), ("batch_size", 0), ("epochs", 0), ("learning_rate", 0.0),
     ("activation", "relu")],
)
def test_hyperparameter_preconditions(field, value):
    kwargs = {"n_layers": 1, "n_neurons": 2, field: value}
    with pytest.raises(InvalidHyperparameters):
        Hyperparameters(**kwargs)


def test_layout_chains_to_scalar():
    layout = nnet.layer_layout(7, Hyperparameters(3, 5))
    assert layout.tolist() == [[7, 5], [5, 5], [5, 5], [5, 1]]
    assert nnet.n_parameters(layout) == 7 * 5 + 5 + 2 * (25 + 5) + 5 + 1


def test_init_deterministic_and_glorot():
    hp = Hyperparameters(2, 16, seed=9)
    a, b = mlp_init(10, hp), mlp_init(10, hp)
    assert a.theta.tobytes() == b.theta.tobytes()
    assert mlp_init(10, Hyperparameters(2, 16, seed=10)).theta.tobytes() != a.theta.tobytes()
    for w, bias in a.layers():
        fan_out, fan_in = w.shape
        assert np.abs(w).max() <= math.sqrt(6 / (fan_in + fan_out))
        assert not bias.any()


def test_zero_weights_output_bias():
    model = mlp_init(3, Hyperparameters(2, 4))
    model.theta[:] = 0.0
    model.theta[-1] = 0.37
    x = np.random.default_rng(0).normal(size=(5, 3))
    assert np.all(forward(model, x) == 0.37)


def test_forward_fixture_2_2_1():
    hp = Hyperparameters(1, 2, activation="tanh")
    w1 = [[0.5, -0.3], [0.2, 0.8]]
    b1 = [0.1, -0.2]
    w2 = [[1.5, -0.7]]
    b2 = [0.05]
    model = MlpModel(2, hp, np.array([*np.ravel(w1), *b1, *np.ravel(w2), *b2]))
    x = [0.4, -1.1]
    h1 = math.tanh(0.5 * 0.4 - 0.3 * -1.1 + 0.1)
    h2 = math.tanh(0.2 * 0.4 + 0.8 * -1.1 - 0.2)
    expected = 1.5 * h1 - 0.7 * h2 + 0.05
    assert abs(forward(model, x)[0] - expected) < 1e-12
    sig = MlpModel(2, Hyperparameters(1, 2, activation="sigmoid"), model.theta)
    s1 = 1 / (1 + math.exp(-(0.5 * 0.4 - 0.3 * -1.1 + 0.1)))
    s2 = 1 / (1 + math.exp(-(0.2 * 0.4 + 0.8 * -1.1 - 0.2)))
    assert abs(forward(sig, x)[0] - (1.5 * s1 - 0.7 * s2 + 0.05)) < 1e-12


def test_tiny_weights_near_linear():
    eps = 1e-3
    rng = np.random.default_rng(2)
    model = mlp_init(3, Hyperparameters(1, 4))
    model.theta[:] = eps * rng.normal(size=model.theta.size)
    x = rng.normal(size=(6, 3))
    (w1, b1), (w2, b2) = model.layers()
    linear = (x @ w1.T + b1) @ w2.T + b2
    assert np.abs(forward(model, x) - linear[:, 0]).max() < 10 * eps**3


def test_output_layer_superposition():
    rng = np.random.default_rng(3)
    model = mlp_init(4, Hyperparameters(2, 3, seed=1))
    (w1, b1), (w2, b2), (w3, b3) = model.layers()

    def head(h):
        return float((w3 @ h + b3)[0])

    x = rng.normal(size=(5, 4))
    hidden = np.tanh(np.tanh(x @ w1.T + b1) @ w2.T + b2)
    assert np.allclose(forward(model, x), [head(h) for h in hidden], rtol=0, atol=1e-13)
    h_a, h_b = hidden[0], hidden[1]
    alpha = 0.3
    mixed = head(alpha * h_a + (1 - alpha) * h_b)
    assert math.isclose(mixed, alpha * head(h_a) + (1 - alpha) * head(h_b), rel_tol=1e-12, abs_tol=1e-12)


@pytest.mark.parametrize("grad_fn", [_fallback.gradient, nnet.gradient], ids=["fallback", "selected"])
def test_gradient_check(grad_fn):
    errors = gradient_check(120, 0, grad_fn)
    assert max(errors) < 1e-4


@compiled
def test_compiled_matches_fallback():
    from gwpscreen.nnet import _mlp_kernel

    rng = np.random.default_rng(4)
    for act in (0, 1):
        hp = Hyperparameters(3, 6)
        layout = nnet.layer_layout(4, hp)
        theta = rng.normal(size=nnet.n_parameters(layout))
        x, y = rng.normal(size=(23, 4)), rng.normal(size=23)
        g1, g2 = np.zeros_like(theta), np.zeros_like(theta)
        l1 = _fallback.gradient(theta, layout, x, y, act, g1)
        l2 = _mlp_kernel.gradient(theta, layout, x, y, act, g2)
        assert math.isclose(l1, l2, rel_tol=1e-12) and np.allclose(g1, g2, rtol=1e-12, atol=1e-14)
        states = []
        for mod in (_fallback, _mlp_kernel):
            th, m, v = theta.copy(), np.zeros_like(theta), np.zeros_like(theta)
            order = rng.permutation(23).astype(np.int64) if not states else states[0][-1]
            loss, t = mod.run_epoch(th, m, v, 0, layout, x, y, order, 5, 1e-3, 0.9, 0.999, 1e-8, act)
            states.append((th, loss, t, order))
        assert states[0][2] == states[1][2] == 5
        assert np.allclose(states[0][0], states[1][0], rtol=0, atol=1e-12)
        assert math.isclose(states[0][1], states[1][1], rel_tol=1e-12)


def test_adam_single_step():
    theta, m, v = adam_step([1.0], [2.0], [0.0], [0.0], 1, lr=0.001)
    assert abs(theta[0] - (1 - 0.001 * 2 / (2 + 1e-8))) < 1e-15
    assert abs(theta[0] - 0.9990) < 1e-6
    assert math.isclose(m[0], 0.2) and math.isclose(v[0], 0.004)


def test_run_epoch_adam_matches_reference_update():
    # a single full batch: one Adam step on the batch gradient
    rng = np.random.default_rng(5)
    hp = Hyperparameters(1, 3)
    layout = nnet.layer_layout(2, hp)
    theta = rng.normal(size=nnet.n_parameters(layout))
    x, y = rng.normal(size=(8, 2)), rng.normal(size=8)
    grad = np.zeros_like(theta)
    _fallback.gradient(theta, layout, x, y, 0, grad)
    expected, _, _ = adam_step(theta, grad, np.zeros_like(theta), np.zeros_like(theta), 1)
    th, m, v = theta.copy(), np.zeros_like(theta), np.zeros_like(theta)
    nnet.run_epoch(th, m, v, 0, layout, x, y, np.arange(8, dtype=np.int64), 8, 1e-3, 0.9, 0.999, 1e-8, 0)
    assert np.allclose(th, expected, rtol=0, atol=1e-14)


def _line_data():
    x = np.linspace(-1, 1, 100)[:, None]
    return x, 2 * x[:, 0]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fit_y_equals_2x(seed):
    x, y = _line_data()
    hp = Hyperparameters(1, 32, batch_size=10, epochs=2000, seed=seed)
    model = train(mlp_init(1, hp), x, y)
    assert np.mean((forward(model, x) - y) ** 2) < 1e-4
    hist = model.loss_history
    tenth = len(hist) // 10
    assert np.mean(hist[-tenth:]) < np.mean(hist[:tenth])


def test_train_deterministic_and_pure():
    x, y = _line_data()
    hp = Hyperparameters(2, 6, batch_size=16, epochs=50, seed=3)
    start = mlp_init(1, hp)
    before = start.theta.copy()
    a, b = train(start, x, y), train(start, x, y)
    assert a.theta.tobytes() == b.theta.tobytes()
    assert a.loss_history == b.loss_history and len(a.loss_history) == 50
    assert np.array_equal(start.theta, before)


def test_train_bit_identical_across_processes():
    code = (
        "import numpy as np\n"
        "from gwpscreen.nnet import Hyperparameters, mlp_init, train\n"
        "x = np.linspace(-1, 1, 40)[:, None]\n"
        "hp = Hyperparameters(2, 5, batch_size=8, epochs=30, seed=4)\n"
        "print(train(mlp_init(1, hp), x, np.sin(3 * x[:, 0])).theta.tobytes().hex())\n"
    )
    outs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True,
                           env={**os.environ, "PYTHONHASHSEED": str(s)}).stdout for s in (1, 2)}
    assert len(outs) == 1


def test_train_architecture_and_shape_checks():
    model = mlp_init(2, Hyperparameters(1, 3))
    with pytest.raises(InvalidHyperparameters):
        train(model, np.zeros((4, 2)), np.zeros(4), Hyperparameters(2, 3))
    with pytest.raises(ShapeMismatch):
        train(model, np.zeros((4, 2)), np.zeros(3))
    with pytest.raises(ShapeMismatch):
        forward(model, np.zeros((4, 3)))


def test_non_finite_loss():
    hp = Hyperparameters(1, 4, epochs=5, learning_rate=1e3)
    x = np.random.default_rng(0).normal(size=(20, 2))
    with pytest.raises(NonFiniteLoss) as info:
        train(mlp_init(2, hp), x, np.full(20, 1e200))
    assert info.value.epoch == 0


def test_serialization_roundtrip():
    x, y = _line_data()
    model = train(mlp_init(1, Hyperparameters(2, 4, epochs=5, seed=8)), x, y)
    blob = json.loads(json.dumps(model.to_dict()))
    assert blob["layers"][0]["weight_shape"] == [4, 1]
    again = MlpModel.from_dict(blob)
    assert again.theta.tobytes() == model.theta.tobytes()
    assert again.loss_history == model.loss_history and again.hp == model.hp
    blob["layers"][1]["weight_shape"] = [3, 4]
    with pytest.raises(ShapeMismatch):
        MlpModel.from_dict(blob)


@settings(max_examples=60, deadline=None)
@given(
    layers=st.integers(1, 3), neurons=st.integers(1, 8), act=st.sampled_from(["tanh", "sigmoid"]),
    dim=st.integers(1, 5), seed=st.integers(0, 2**31),
)
def test_batched_forward_matches_rowwise(layers, neurons, act, dim, seed):
    model = mlp_init(dim, Hyperparameters(layers, neurons, act, seed=seed))
    x = np.random.default_rng(seed).normal(size=(7, dim))
    rows = np.array([forward(model, r)[0] for r in x])
    assert np.allclose(forward(model, x), rows, rtol=0, atol=1e-13)
