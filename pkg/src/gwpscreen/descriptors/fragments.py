"""Functional-group counts by subgraph matching."""

from __future__ import annotations

from gwpscreen.molgraph import MolecularGraph
from gwpscreen.smarts import compile_smarts, count_unique

__all__ = ["FRAGMENT_PATTERNS", "fragment_counts"]

# Counts are unique matched-atom sets.  fr_halogen counts C-X bonds and
# fr_allylic_oxid counts H-bearing sp3 carbons next to an olefinic carbon;
# fr_nitrite is an ester-type O-N=O group.
FRAGMENT_PATTERNS: dict[str, str] = {
    "fr_nitrile": "[NX1]#[CX2]",
    "fr_nitrite": "[OX2]-[NX2]=[OX1]",
    "fr_allylic_oxid": "[CX4;!H0;$([CX4]-C=C)]",
    "fr_halogen": "[#6]~[F,Cl,Br,I]",
    "fr_ether": "[OD2]([#6])[#6]",
    "fr_ketone": "[#6][CX3](=O)[#6]",
    "fr_alkyl_halide": "[CX4]-[Cl,Br,I,F]",
    "fr_epoxide": "O1CC1",
    "fr_aldehyde": "[CX3H1](=O)[#6]",
    "fr_Al_OH": "[C!$(C=O)]-[OH]",
    "fr_ester": "[#6][CX3](=O)[OX2H0][#6]",
    "fr_methoxy": "[OX2](-[#6])-[CH3]",
    "fr_term_acetylene": "C#[CH]",
    "fr_unbrch_alkane": "[CR0;D2,D1][CR0;D2][CR0;D2][CR0;D2,D1]",
}

_COMPILED = {name: compile_smarts(s) for name, s in FRAGMENT_PATTERNS.items()}


def fragment_counts(graph: MolecularGraph) -> dict[str, int]:
    return {name: count_unique(p, graph) for name, p in _COMPILED.items()}
