"""Kier-Hall connectivity indices, ring counts and simple atom/bond counts."""

from __future__ import annotations

import math

from gwpscreen.elements import ELEMENTS
from gwpscreen.errors import DegenerateDelta
from gwpscreen.molgraph import BondOrder, MolecularGraph
from gwpscreen.smarts import compile_smarts, count_unique, find_matches

__all__ = ["valence_deltas", "chi_indices", "ring_counts", "count_descriptors", "bond_paths"]


def valence_deltas(graph: MolecularGraph, kind: str = "v") -> list[float]:
    """Kier-Hall deltas per atom.

    ``kind="v"``: ``Zv - h`` for Z <= 10, else ``(Zv - h) / (Z - Zv - 1)``.
    ``kind="n"``: ``Zv - h`` for every atom.

    Raises:
        DegenerateDelta: a delta is negative.
    """
    out = []
    for i, atom in enumerate(graph.atoms):
        el = ELEMENTS[atom.element]
        num = el.outer_electrons - graph.total_h(i)
        if kind == "v" and el.number > 10:
            delta = num / (el.number - el.outer_electrons - 1)
        else:
            delta = float(num)
        if delta < 0:
            raise DegenerateDelta(f"negative valence delta for atom {i} ({atom.element})")
        out.append(delta)
    return out


def _inv_sqrt(x: float) -> float:
    # a zero delta (e.g. methane carbon) contributes nothing
    return 1.0 / math.sqrt(x) if x > 0 else 0.0


def bond_paths(graph: MolecularGraph, length: int) -> list[tuple[frozenset[int], tuple[int, ...]]]:
    """Unique ``length``-bond walks, with the atom sequence each contributes.

    A walk never repeats a bond and never revisits an atom, except that its
    last bond may close onto an earlier atom.  Closing onto the start gives
    a ring, whose atoms are listed once; closing elsewhere gives a lasso,
    whose junction atom appears twice.  Walks are deduplicated by bond set.
    """
    seen: dict[frozenset[int], tuple[int, ...]] = {}

    def walk(path: list[int], bonds: list[int]) -> None:
        if len(bonds) == length:
            seen.setdefault(frozenset(bonds), tuple(path))
            return
        last_step = len(bonds) + 1 == length
        for nbr, k in graph.adjacency[path[-1]]:
            if k in bonds:
                continue
            if nbr in path:
                if last_step:
                    atoms = path if nbr == path[0] else path + [nbr]
                    seen.setdefault(frozenset(bonds + [k]), tuple(atoms))
                continue
            path.append(nbr)
            bonds.append(k)
            walk(path, bonds)
            path.pop()
            bonds.pop()

    for start in range(len(graph.atoms)):
        walk([start], [])
    return list(seen.items())


def chi_indices(graph: MolecularGraph) -> dict[str, float]:
    """Chi0, Chi1, Chi0v..Chi4v and Chi0n..Chi4n."""
    out: dict[str, float] = {}
    degree = [graph.degree(i) for i in range(len(graph.atoms))]
    out["Chi0"] = sum(_inv_sqrt(d) for d in degree)
    out["Chi1"] = sum(_inv_sqrt(degree[b.begin] * degree[b.end]) for b in graph.bonds)
    paths = {k: bond_paths(graph, k) for k in (2, 3, 4)}
    for kind in ("v", "n"):
        deltas = valence_deltas(graph, kind)
        out[f"Chi0{kind}"] = sum(_inv_sqrt(d) for d in deltas)
        out[f"Chi1{kind}"] = sum(_inv_sqrt(deltas[b.begin] * deltas[b.end]) for b in graph.bonds)
        for k in (2, 3, 4):
            total = 0.0
            for _, atoms in paths[k]:
                prod = math.prod(deltas[a] for a in atoms)
                total += _inv_sqrt(prod)
            out[f"Chi{k}{kind}"] = total
    return out


def ring_counts(graph: MolecularGraph) -> dict[str, int]:
    """Ring tallies over the smallest set of smallest rings.

    A ring is aromatic when all its bonds are aromatic, saturated when all
    are single, aliphatic otherwise-not-aromatic and hetero when any member
    is not carbon.
    """
    tallies = dict.fromkeys(
        (
            "RingCount",
            "NumAromaticRings",
            "NumAliphaticRings",
            "NumSaturatedRings",
            "NumHeterocycles",
            "NumAromaticCarbocycles",
            "NumAromaticHeterocycles",
            "NumAliphaticCarbocycles",
            "NumAliphaticHeterocycles",
            "NumSaturatedCarbocycles",
            "NumSaturatedHeterocycles",
        ),
        0,
    )
    for ring in graph.rings:
        n = len(ring)
        orders = [graph.bond_between(ring[k], ring[(k + 1) % n]).order for k in range(n)]
        hetero = any(graph.atoms[a].element != "C" for a in ring)
        aromatic = all(o is BondOrder.AROMATIC for o in orders)
        saturated = all(o is BondOrder.SINGLE for o in orders)
        kind = "Hetero" if hetero else "Carbo"
        tallies["RingCount"] += 1
        tallies["NumHeterocycles"] += hetero
        if aromatic:
            tallies["NumAromaticRings"] += 1
            tallies[f"NumAromatic{kind}cycles"] += 1
        else:
            tallies["NumAliphaticRings"] += 1
            tallies[f"NumAliphatic{kind}cycles"] += 1
        if saturated:
            tallies["NumSaturatedRings"] += 1
            tallies[f"NumSaturated{kind}cycles"] += 1
    return tallies


_ROTOR = compile_smarts("[!$(*#*)&!D1]-&!@[!$(*#*)&!D1]")
_NO = compile_smarts("[#7,#8]")


def count_descriptors(graph: MolecularGraph) -> dict[str, float]:
    """Composition and simple count descriptors."""
    heavy_wt = sum(a.atomic_mass for a in graph.atoms)
    n_h = sum(a.implicit_h for a in graph.atoms)
    h = ELEMENTS["H"]
    exact = sum(ELEMENTS[a.element].monoisotopic for a in graph.atoms) + n_h * h.monoisotopic
    valence_e = sum(ELEMENTS[a.element].outer_electrons - a.charge for a in graph.atoms) + n_h
    carbons = [i for i, a in enumerate(graph.atoms) if a.element == "C"]
    sp3 = sum(
        1
        for i in carbons
        if graph.degree(i) + graph.atoms[i].implicit_h == 4
        and all(graph.bonds[k].order is BondOrder.SINGLE for _, k in graph.adjacency[i])
    )
    rotors = {frozenset(m) for m in find_matches(_ROTOR, graph)}
    return {
        "MolWt": heavy_wt + n_h * h.weight,
        "HeavyAtomMolWt": heavy_wt,
        "ExactMolWt": exact,
        "HeavyAtomCount": len(graph.atoms),
        "NumValenceElectrons": valence_e,
        "NumHeteroatoms": sum(1 for a in graph.atoms if a.element not in ("C", "H")),
        "NHOHCount": sum(graph.total_h(i) for i, a in enumerate(graph.atoms) if a.element in ("N", "O")),
        "NOCount": count_unique(_NO, graph),
        "NumRotatableBonds": len(rotors),
        "FractionCSP3": sp3 / len(carbons) if carbons else 0.0,
    }
