"""Feed-forward regression networks.

The per-batch training loop runs in a compiled extension when it is
available and in NumPy otherwise.  ``GWP_SCREEN_BACKEND`` forces a choice
(``compiled`` or ``python``); ``BACKEND`` reports the one in use.
"""

from __future__ import annotations

import os

from gwpscreen.nnet import _fallback
from gwpscreen.nnet.mlp import (
    ACTIVATIONS,
    Hyperparameters,
    MlpModel,
    adam_step,
    forward,
    layer_layout,
    mlp_init,
    n_parameters,
    train,
)

__all__ = [
    "ACTIVATIONS",
    "BACKEND",
    "Hyperparameters",
    "MlpModel",
    "adam_step",
    "forward",
    "gradient",
    "layer_layout",
    "mlp_init",
    "n_parameters",
    "run_epoch",
    "train",
]

_choice = os.environ.get("GWP_SCREEN_BACKEND", "auto").lower()
if _choice not in ("auto", "compiled", "python"):
    raise ImportError(f"GWP_SCREEN_BACKEND must be auto, compiled or python, not {_choice!r}")

try:
    from gwpscreen.nnet import _mlp_kernel
except ImportError:
    if _choice == "compiled":
        raise
    _mlp_kernel = None

if _mlp_kernel is not None and _choice != "python":
    BACKEND = "compiled"
    run_epoch = _mlp_kernel.run_epoch
    gradient = _mlp_kernel.gradient
else:
    BACKEND = "python"
    run_epoch = _fallback.run_epoch
    gradient = _fallback.gradient
