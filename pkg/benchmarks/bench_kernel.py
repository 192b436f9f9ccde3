"""Time one training epoch in the compiled kernel against the NumPy fallback.

Usage:
    python3 benchmarks/bench_kernel.py [--epochs N]

Each case is a network shape and batch size drawn from the tuner's search
space, trained on random data with the size of a desk-scale dataset.
Both backends start from the same weights and row order; the script also
reports the largest weight difference after the timed epochs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gwpscreen.nnet import Hyperparameters, _fallback, mlp_init

try:
    from gwpscreen.nnet import _mlp_kernel
except ImportError:
    _mlp_kernel = None

CASES = [
    # (input dim, layers, neurons, batch, rows)
    (14, 1, 8, 16, 240),
    (14, 3, 32, 32, 240),
    (14, 6, 64, 64, 240),
    (48, 10, 128, 192, 240),
    (48, 2, 16, 16, 1600),
]


def _time(mod, model, x, y, order, batch, epochs: int) -> tuple[float, np.ndarray]:
    theta = model.theta.copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    t = 0
    start = time.perf_counter()
    for _ in range(epochs):
        _, t = mod.run_epoch(theta, m, v, t, model.layout, x, y, order, batch, 1e-3, 0.9, 0.999, 1e-8, 0)
    return (time.perf_counter() - start) / epochs, theta


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=50, help="timed epochs per case")
    args = ap.parse_args()
    if _mlp_kernel is None:
        raise SystemExit("compiled kernel is not built; run `pip install -e . --no-build-isolation` first")
    rng = np.random.default_rng(0)
    print(f"{'dim':>4} {'layers':>6} {'neurons':>7} {'batch':>5} {'rows':>5}"
          f" {'fallback ms':>12} {'compiled ms':>12} {'speedup':>8} {'max |dtheta|':>13}")
    for dim, layers, neurons, batch, rows in CASES:
        model = mlp_init(dim, Hyperparameters(layers, neurons, batch_size=batch, seed=1))
        x = rng.normal(size=(rows, dim))
        y = rng.uniform(size=rows)
        order = rng.permutation(rows).astype(np.int64)
        slow, th_slow = _time(_fallback, model, x, y, order, batch, args.epochs)
        fast, th_fast = _time(_mlp_kernel, model, x, y, order, batch, args.epochs)
        diff = float(np.abs(th_slow - th_fast).max())
        print(f"{dim:>4} {layers:>6} {neurons:>7} {batch:>5} {rows:>5}"
              f" {slow * 1e3:>12.3f} {fast * 1e3:>12.3f} {slow / fast:>7.1f}x {diff:>13.1e}")


if __name__ == "__main__":
    main()
