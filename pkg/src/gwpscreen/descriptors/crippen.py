"""Wildman-Crippen atomic logP and molar-refractivity contributions."""

from __future__ import annotations

from dataclasses import dataclass

from gwpscreen.descriptors._crippen_data import CRIPPEN_TYPES
from gwpscreen.descriptors.surface import labute_contributions
from gwpscreen.molgraph import MolecularGraph, with_explicit_hydrogens
from gwpscreen.smarts import compile_smarts, matches_at

__all__ = ["CrippenAssignment", "crippen_assign"]

_COMPILED = [(label, compile_smarts(s), logp, mr) for label, s, logp, mr in CRIPPEN_TYPES]

# element fallbacks when no pattern matches (cannot happen for the supported
# subset, whose catch-all rows come last per element)
_DEFAULT_TYPE = {"C": "CS", "H": "HS", "N": "NS", "O": "OS"}


@dataclass(frozen=True)
class CrippenAssignment:
    """Per-heavy-atom contributions plus the hydrogen totals.

    ``labels``, ``logp``, ``mr`` and ``asa`` are aligned with the heavy atoms
    of the graph.  Hydrogen contributions are summed into ``h_logp`` and
    ``h_mr`` since hydrogens are implicit in the graph.
    """

    labels: tuple[str, ...]
    logp: tuple[float, ...]
    mr: tuple[float, ...]
    asa: tuple[float, ...]
    h_logp: float
    h_mr: float
    h_asa: float

    @property
    def total_logp(self) -> float:
        return sum(self.logp) + self.h_logp

    @property
    def total_mr(self) -> float:
        return sum(self.mr) + self.h_mr

    @property
    def total_asa(self) -> float:
        return sum(self.asa) + self.h_asa


def _type_atom(g: MolecularGraph, i: int) -> tuple[str, float, float]:
    for label, pattern, logp, mr in _COMPILED:
        if matches_at(pattern, g, i):
            return label, logp, mr
    fallback = _DEFAULT_TYPE.get(g.atoms[i].element, "CS")
    for label, _, logp, mr in _COMPILED:
        if label == fallback:
            return label, logp, mr
    raise AssertionError("catch-all Crippen type missing")


def crippen_assign(graph: MolecularGraph) -> CrippenAssignment:
    """Type every atom with the first matching Wildman-Crippen class."""
    full = with_explicit_hydrogens(graph)
    n_heavy = len(graph.atoms)
    labels, logp, mr = [], [], []
    h_logp = h_mr = 0.0
    for i in range(len(full.atoms)):
        label, lp, m = _type_atom(full, i)
        if i < n_heavy:
            labels.append(label)
            logp.append(lp)
            mr.append(m)
        else:
            h_logp += lp
            h_mr += m
    asa, h_asa = labute_contributions(graph)
    return CrippenAssignment(tuple(labels), tuple(logp), tuple(mr), tuple(asa), h_logp, h_mr, h_asa)
