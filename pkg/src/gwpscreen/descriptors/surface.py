"""Labute approximate surface areas, P_VSA binning and topological polar surface area."""

from __future__ import annotations

import math
from bisect import bisect_right
from collections.abc import Sequence

from gwpscreen.elements import ELEMENTS
from gwpscreen.errors import LengthMismatch
from gwpscreen.molgraph import BondOrder, MolecularGraph

__all__ = [
    "LOGP_BINS",
    "MR_BINS",
    "labute_contributions",
    "vsa_bin",
    "tpsa_contributions",
]

# published P_VSA bin schedules; len(edges) + 1 bins
LOGP_BINS = (-0.4, -0.2, 0.0, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6)
MR_BINS = (1.29, 1.82, 2.24, 2.45, 2.75, 3.05, 3.63, 3.8, 4.0)

_BOND_SHIFT = {BondOrder.SINGLE: 0.0, BondOrder.DOUBLE: 0.2, BondOrder.TRIPLE: 0.3, BondOrder.AROMATIC: 0.1}
_H_RADIUS = ELEMENTS["H"].bond_radius


def _overlap(ri: float, rj: float, bij: float) -> tuple[float, float]:
    """Sphere-overlap terms for atoms i and j at the ideal bond length."""
    dij = min(max(abs(ri - rj), bij), ri + rj)
    return rj * rj - (ri - dij) ** 2 / dij, ri * ri - (rj - dij) ** 2 / dij


def labute_contributions(graph: MolecularGraph) -> tuple[list[float], float]:
    """Per-heavy-atom Labute ASA and the pooled hydrogen contribution.

    Every heavy atom carries one hydrogen overlap term whatever its H count,
    the convention of the common reference implementation.
    """
    radii = [ELEMENTS[a.element].bond_radius for a in graph.atoms]
    v = [0.0] * len(radii)
    for b in graph.bonds:
        i, j = b.endpoints
        bij = radii[i] + radii[j] - _BOND_SHIFT[b.order]
        ti, tj = _overlap(radii[i], radii[j], bij)
        v[i] += ti
        v[j] += tj
    h_sum = 0.0
    for i, ri in enumerate(radii):
        ti, th = _overlap(ri, _H_RADIUS, ri + _H_RADIUS)
        v[i] += ti
        h_sum += th
    asa = [4 * math.pi * r * r - math.pi * r * vi for r, vi in zip(radii, v)]
    h_asa = 4 * math.pi * _H_RADIUS**2 - math.pi * _H_RADIUS * h_sum
    return asa, h_asa


def vsa_bin(props: Sequence[float], asa: Sequence[float], edges: Sequence[float]) -> list[float]:
    """Sum ``asa`` into ``len(edges) + 1`` bins by the matching property.

    Bin ``k`` holds atoms with ``edges[k-1] <= prop < edges[k]``; the first
    and last bins are open-ended.
    """
    if len(props) != len(asa):
        raise LengthMismatch(f"{len(props)} properties but {len(asa)} areas")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bin edges must be strictly ascending")
    out = [0.0] * (len(edges) + 1)
    for p, a in zip(props, asa):
        out[bisect_right(edges, p)] += a
    return out


def _in_three_ring(graph: MolecularGraph, i: int) -> bool:
    return 3 in graph.ring_sizes[i]


def _nitrogen_psa(nbrs: int, n_h: int, chg: int, s: int, d: int, t: int, ar: int, ring3: bool) -> float | None:
    key = (nbrs, n_h, chg, s, d, t, ar)
    if key == (3, 0, 0, 3, 0, 0, 0):
        return 3.01 if ring3 else 3.24
    if key == (2, 1, 0, 2, 0, 0, 0):
        return 21.94 if ring3 else 12.03
    return _N_TABLE.get(key)


# (heavy neighbours, H, charge, single, double, triple, aromatic) -> area
_N_TABLE = {
    (2, 0, 0, 1, 1, 0, 0): 12.36,
    (1, 0, 0, 0, 0, 1, 0): 23.79,
    (3, 0, 0, 1, 2, 0, 0): 11.68,
    (2, 0, 0, 0, 1, 1, 0): 13.60,
    (1, 1, 0, 0, 1, 0, 0): 23.85,
    (1, 2, 0, 1, 0, 0, 0): 26.02,
    (4, 0, 1, 4, 0, 0, 0): 0.00,
    (3, 0, 1, 2, 1, 0, 0): 3.01,
    (2, 0, 1, 1, 0, 1, 0): 4.36,
    (3, 1, 1, 3, 0, 0, 0): 4.44,
    (2, 1, 1, 1, 1, 0, 0): 13.97,
    (2, 2, 1, 2, 0, 0, 0): 16.61,
    (1, 2, 1, 0, 1, 0, 0): 25.59,
    (1, 3, 1, 1, 0, 0, 0): 27.64,
    (2, 0, 0, 0, 0, 0, 2): 12.89,
    (3, 0, 0, 0, 0, 0, 3): 4.41,
    (3, 0, 0, 1, 0, 0, 2): 4.93,
    (3, 0, 0, 0, 1, 0, 2): 8.39,
    (2, 1, 0, 0, 0, 0, 2): 15.79,
    (3, 0, 1, 0, 0, 0, 3): 4.10,
    (3, 0, 1, 1, 0, 0, 2): 3.88,
    (2, 1, 1, 0, 0, 0, 2): 14.14,
}

_O_TABLE = {
    (1, 0, 0, 0, 1, 0, 0): 17.07,
    (1, 1, 0, 1, 0, 0, 0): 20.23,
    (1, 0, -1, 1, 0, 0, 0): 23.06,
    (2, 0, 0, 0, 0, 0, 2): 13.14,
}


def tpsa_contributions(graph: MolecularGraph) -> list[float]:
    """Ertl fragment polar surface area per atom (N and O only).

    Environments missing from the fragment table fall back to the linear
    rules ``30.5 - 8.2*nbrs + 1.5*H`` (N) and ``28.5 - 8.6*nbrs + 1.5*H`` (O).
    """
    out = []
    for i, atom in enumerate(graph.atoms):
        if atom.element not in ("N", "O"):
            out.append(0.0)
            continue
        counts = {o: 0 for o in BondOrder}
        for _, k in graph.adjacency[i]:
            counts[graph.bonds[k].order] += 1
        key = (
            graph.degree(i),
            graph.total_h(i),
            atom.charge,
            counts[BondOrder.SINGLE],
            counts[BondOrder.DOUBLE],
            counts[BondOrder.TRIPLE],
            counts[BondOrder.AROMATIC],
        )
        ring3 = _in_three_ring(graph, i)
        if atom.element == "N":
            val = _nitrogen_psa(*key, ring3)
            if val is None:
                val = 30.5 - 8.2 * key[0] + 1.5 * key[1]
        else:
            if key == (2, 0, 0, 2, 0, 0, 0):
                val = 12.53 if ring3 else 9.23
            else:
                val = _O_TABLE.get(key)
            if val is None:
                val = 28.5 - 8.6 * key[0] + 1.5 * key[1]
        out.append(val)
    return out
