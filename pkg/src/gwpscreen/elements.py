"""Per-element constants for the supported element subset.

Atomic weights are standard atomic weights (IUPAC conventional values, as
used by most cheminformatics toolkits), monoisotopic masses are those of the
most abundant isotope.  Bonding radii are the ``Rb0`` values used by Labute's
approximate surface area.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Element:
    symbol: str
    number: int
    weight: float
    monoisotopic: float
    outer_electrons: int
    valences: tuple[int, ...]
    bond_radius: float


ELEMENTS: dict[str, Element] = {
    e.symbol: e
    for e in (
        Element("H", 1, 1.008, 1.007825032, 1, (1,), 0.33),
        Element("B", 5, 10.812, 11.0093054, 3, (3,), 0.82),
        Element("C", 6, 12.011, 12.0, 4, (4,), 0.77),
        Element("N", 7, 14.007, 14.003074, 5, (3, 5), 0.70),
        Element("O", 8, 15.999, 15.99491462, 6, (2,), 0.66),
        Element("F", 9, 18.998, 18.99840322, 7, (1,), 0.611),
        Element("Si", 14, 28.086, 27.97692653, 4, (4,), 0.937),
        Element("P", 15, 30.974, 30.97376163, 5, (3, 5), 0.89),
        Element("S", 16, 32.067, 31.972071, 6, (2, 4, 6), 1.04),
        Element("Cl", 17, 35.453, 34.96885268, 7, (1,), 0.997),
        Element("Br", 35, 79.904, 78.9183371, 7, (1,), 1.167),
        Element("I", 53, 126.904, 126.904473, 7, (1, 3, 5), 1.387),
    )
}

BY_NUMBER: dict[int, Element] = {e.number: e for e in ELEMENTS.values()}

# bare (unbracketed) symbols accepted by the SMILES reader
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_SUBSET = frozenset({"c", "n", "o", "s"})

HALOGENS = frozenset({"F", "Cl", "Br", "I"})

# Charged valences that do not follow from the isoelectronic rule below.
_CHARGED_VALENCES: dict[tuple[str, int], tuple[int, ...]] = {
    ("N", 1): (4,),
    ("N", -1): (2,),
    ("O", 1): (3,),
    ("O", -1): (1,),
    ("C", 1): (3,),
    ("C", -1): (3,),
    ("B", -1): (4,),
    ("S", 1): (3, 5),
    ("S", -1): (1, 3, 5),
    ("P", 1): (4,),
    ("F", -1): (0,),
    ("Cl", -1): (0,),
    ("Br", -1): (0,),
    ("I", -1): (0,),
}


def allowed_valences(symbol: str, charge: int) -> tuple[int, ...]:
    """Total valences (bond orders plus hydrogens) allowed for an atom."""
    if charge == 0:
        return ELEMENTS[symbol].valences
    try:
        return _CHARGED_VALENCES[(symbol, charge)]
    except KeyError:
        pass
    # isoelectronic fallback: treat the ion like the neutral element with
    # the same number of electrons, when that element is in the table
    twin = BY_NUMBER.get(ELEMENTS[symbol].number - charge)
    return twin.valences if twin is not None else ()
