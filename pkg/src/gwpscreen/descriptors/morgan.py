"""Circular (Morgan) environment counts."""

from __future__ import annotations

from gwpscreen.molgraph import MolecularGraph, atom_invariants, bond_code, stable_hash

__all__ = ["morgan_environments", "morgan_density"]


def morgan_environments(graph: MolecularGraph, radius: int) -> list[set[int]]:
    """Distinct environment identifiers accumulated at radii 0..``radius``.

    Element ``r`` of the result holds the identifiers found up to radius
    ``r``.  An environment is dropped when its bond set was already seen
    (from another centre or a smaller radius); its centre then stops
    growing.  Among centres sharing a bond set the smallest identifier is
    kept.
    """
    n_atoms = len(graph.atoms)
    current = atom_invariants(graph)
    features: set[int] = set(current)
    cumulative = [set(features)]
    neighborhoods = [0] * n_atoms  # bond bitmasks
    dead = [False] * n_atoms
    seen_masks: set[int] = set()
    for layer in range(radius):
        nxt = [0] * n_atoms
        round_masks = list(neighborhoods)
        candidates = []
        for i in range(n_atoms):
            if dead[i]:
                continue
            if not graph.adjacency[i]:
                dead[i] = True
                continue
            env = []
            for j, k in graph.adjacency[i]:
                round_masks[i] |= 1 << k
                round_masks[i] |= neighborhoods[j]
                env.append((bond_code(graph.bonds[k].order), current[j]))
            env.sort()
            nxt[i] = stable_hash(layer, current[i], tuple(env))
            candidates.append((round_masks[i], nxt[i], i))
        candidates.sort()
        for mask, ident, i in candidates:
            if mask in seen_masks:
                dead[i] = True
            else:
                seen_masks.add(mask)
                features.add(ident)
        cumulative.append(set(features))
        neighborhoods = round_masks
        current = nxt
    return cumulative


def morgan_density(graph: MolecularGraph, radius: int = 3) -> dict[str, float]:
    """FpDensityMorgan1..``radius``: distinct environments per heavy atom."""
    heavy = len(graph.heavy_atom_indices)
    envs = morgan_environments(graph, radius)
    return {f"FpDensityMorgan{r}": len(envs[r]) / heavy for r in range(1, radius + 1)}
