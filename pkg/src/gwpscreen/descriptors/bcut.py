"""Burden-matrix eigenvalue descriptors (BCUT2D)."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from gwpscreen.molgraph import BondOrder, MolecularGraph

__all__ = ["BOND_WEIGHTS", "burden_matrix", "bcut_extremes", "bcut2d"]

NONBONDED = 0.001

# Off-diagonal weight per bonded pair.  "toolkit" is 1/sqrt(bond order), the
# convention of the widely used reference implementation (and the one the
# golden fixtures pin); "burden" is 0.1 x bond order.
BOND_WEIGHTS: dict[str, dict[BondOrder, float]] = {
    "toolkit": {o: 1.0 / math.sqrt(o.valence) for o in BondOrder},
    "burden": {o: 0.1 * o.valence for o in BondOrder},
}


def burden_matrix(graph: MolecularGraph, diagonal: Sequence[float], scheme: str = "toolkit") -> np.ndarray:
    """Property on the diagonal, a bond-order weight for bonded pairs, 0.001 elsewhere."""
    weights = BOND_WEIGHTS[scheme]
    n = len(graph.atoms)
    if len(diagonal) != n:
        raise ValueError("one diagonal value per atom is required")
    b = np.full((n, n), NONBONDED)
    for bond in graph.bonds:
        i, j = bond.endpoints
        b[i, j] = b[j, i] = weights[bond.order]
    b[np.diag_indices(n)] = diagonal
    return b


def bcut_extremes(graph: MolecularGraph, diagonal: Sequence[float], scheme: str = "toolkit") -> tuple[float, float]:
    """(highest, lowest) eigenvalue of the Burden matrix."""
    w = np.linalg.eigvalsh(burden_matrix(graph, diagonal, scheme))
    return float(w[-1]), float(w[0])


def bcut2d(graph: MolecularGraph, logp: Sequence[float], mr: Sequence[float]) -> dict[str, float]:
    """Mass, formal-charge, Crippen logP and Crippen MR BCUT pairs."""
    props = {
        "MW": [a.atomic_mass for a in graph.atoms],
        "CHG": [float(a.charge) for a in graph.atoms],
        "LOGP": list(logp),
        "MR": list(mr),
    }
    low_names = {"MW": "MWLOW", "CHG": "CHGLO", "LOGP": "LOGPLOW", "MR": "MRLOW"}
    out = {}
    for key, diag in props.items():
        hi, lo = bcut_extremes(graph, diag)
        out[f"BCUT2D_{key}HI"] = hi
        out[f"BCUT2D_{low_names[key]}"] = lo
    return out
