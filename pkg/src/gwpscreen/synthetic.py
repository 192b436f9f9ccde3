"""Random halocarbon SMILES and a smooth synthetic GWP-like target.

Used for desk-scale end-to-end runs where the real dataset is too small or
unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gwpscreen.descriptors import featurize
from gwpscreen.molgraph import graph_hash, parse_smiles

__all__ = ["SyntheticRecord", "random_halocarbon", "synthetic_target", "halocarbon_dataset"]

_SUBSTITUENTS = ("H", "F", "Cl", "Br")
_SUB_WEIGHTS = (0.35, 0.35, 0.2, 0.1)


@dataclass(frozen=True)
class SyntheticRecord:
    id: str
    smiles: str
    gwp100: float


def _carbon(rng: np.random.Generator, free: int, extra: str = "") -> str:
    subs = rng.choice(_SUBSTITUENTS, size=free, p=_SUB_WEIGHTS)
    return "C" + extra + "".join(f"({s})" for s in subs if s != "H")


def random_halocarbon(rng: np.random.Generator) -> str:
    """A C1-C4 saturated or mono-olefinic halocarbon, optionally methyl-branched."""
    n = int(rng.integers(1, 5))
    double = n >= 2 and rng.random() < 0.25
    branch = n >= 3 and rng.random() < 0.2
    parts = []
    for i in range(n):
        neighbours = (i > 0) + (i < n - 1)
        order_bonus = double and i in (0, 1)
        free = 4 - neighbours - order_bonus
        extra = ""
        if branch and i == 1:
            extra = "(" + _carbon(rng, 3) + ")"
            free -= 1
        parts.append(_carbon(rng, free, extra))
        if i < n - 1:
            parts.append("=" if double and i == 0 else "")
    return "".join(parts)


def synthetic_target(descriptors: dict[str, float]) -> float:
    """Deterministic smooth function of MolWt, Chi1v and fr_halogen."""
    return 50.0 + 4.0 * descriptors["MolWt"] + 150.0 * descriptors["Chi1v"] + 80.0 * descriptors["fr_halogen"]


def halocarbon_dataset(n: int = 300, seed: int = 0, noise: float = 0.05) -> list[SyntheticRecord]:
    """``n`` structurally distinct halocarbons with targets carrying relative noise."""
    rng = np.random.default_rng(seed)
    seen: set[int] = set()
    out: list[SyntheticRecord] = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * n:
            raise RuntimeError(f"only {len(out)} distinct molecules after {attempts} draws")
        smi = random_halocarbon(rng)
        graph = parse_smiles(smi)
        h = graph_hash(graph)
        if h in seen:
            continue
        seen.add(h)
        y = synthetic_target(featurize(graph)) * (1.0 + noise * rng.standard_normal())
        out.append(SyntheticRecord(f"syn{len(out):04d}", smi, float(max(y, 1.0))))
    return out
