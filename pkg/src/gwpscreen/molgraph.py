"""SMILES reading into immutable molecular graphs.

The reader accepts a deliberately small SMILES subset: organic-subset atoms,
bracket atoms with hydrogen count and charge, the bond symbols ``- = # :``,
branches, ring closures (``1``..``9`` and ``%nn``) and the aromatic atoms
``c n o s``.  Anything else (stereo marks, isotopes, wildcards, atom classes,
dots) is rejected with a :class:`SmilesError` subclass carrying the byte
offset of the offending token.

Example:
    >>> g = parse_smiles("C1CO1")
    >>> len(g.atoms), len(g.bonds), g.rings
    (3, 3, ((0, 1, 2),))
"""

from __future__ import annotations

import enum
import hashlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from gwpscreen.elements import (
    AROMATIC_SUBSET,
    ELEMENTS,
    ORGANIC_SUBSET,
    allowed_valences,
)
from gwpscreen.errors import GwpScreenError

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "MolecularGraph",
    "SmilesError",
    "SmilesSyntaxError",
    "UnbalancedParenthesis",
    "UnclosedRingBond",
    "UnknownElement",
    "UnsupportedFeature",
    "ValenceViolation",
    "MultiFragmentInput",
    "DuplicateBond",
    "parse_smiles",
    "perceive_rings",
    "graph_hash",
    "atom_invariants",
    "with_explicit_hydrogens",
]


# --------------------------------------------------------------------------
# errors


class SmilesError(GwpScreenError, ValueError):
    """A SMILES string was rejected.  ``offset`` is a byte offset into it."""

    def __init__(self, message: str, offset: int, smiles: str = "") -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.smiles = smiles


class SmilesSyntaxError(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnclosedRingBond(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class UnsupportedFeature(UnknownElement):
    """Valid SMILES outside the accepted subset (stereo, isotopes, wildcards)."""


class ValenceViolation(SmilesError):
    pass


class MultiFragmentInput(SmilesError):
    pass


class DuplicateBond(SmilesSyntaxError):
    pass


# --------------------------------------------------------------------------
# graph types


class BondOrder(enum.Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)

    @property
    def symbol(self) -> str:
        return {1: "-", 2: "=", 3: "#", 4: ":"}[self.value]


_BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    in_ring: bool = False
    atomic_mass: float = field(default=0.0, compare=False)
    atomic_number: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.implicit_h < 0:
            raise ValueError("implicit_h must be non-negative")
        el = ELEMENTS[self.element]
        object.__setattr__(self, "atomic_mass", el.weight)
        object.__setattr__(self, "atomic_number", el.number)


@dataclass(frozen=True)
class Bond:
    endpoints: tuple[int, int]
    order: BondOrder
    in_ring: bool = False

    @property
    def begin(self) -> int:
        return self.endpoints[0]

    @property
    def end(self) -> int:
        return self.endpoints[1]

    def other(self, atom: int) -> int:
        a, b = self.endpoints
        return b if atom == a else a


@dataclass(frozen=True)
class MolecularGraph:
    """Immutable molecular graph.

    Heavy atoms only, unless built by :func:`with_explicit_hydrogens`.
    ``rings`` is the smallest set of smallest rings, each ring listed in
    cycle order starting from its lowest atom index.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    rings: tuple[tuple[int, ...], ...] = ()
    source_smiles: str = ""

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per atom, a tuple of ``(neighbor, bond_index)`` in bond order."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for k, b in enumerate(self.bonds):
            i, j = b.endpoints
            adj[i].append((j, k))
            adj[j].append((i, k))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def _bond_lookup(self) -> dict[tuple[int, int], int]:
        out = {}
        for k, b in enumerate(self.bonds):
            i, j = b.endpoints
            out[(i, j)] = out[(j, i)] = k
        return out

    @cached_property
    def ring_membership(self) -> tuple[int, ...]:
        """Number of rings (in ``rings``) containing each atom."""
        counts = [0] * len(self.atoms)
        for ring in self.rings:
            for a in ring:
                counts[a] += 1
        return tuple(counts)

    @cached_property
    def ring_sizes(self) -> tuple[frozenset[int], ...]:
        sizes: list[set[int]] = [set() for _ in self.atoms]
        for ring in self.rings:
            for a in ring:
                sizes[a].add(len(ring))
        return tuple(frozenset(s) for s in sizes)

    @cached_property
    def explicit_h_neighbors(self) -> tuple[int, ...]:
        return tuple(
            sum(1 for j, _ in self.adjacency[i] if self.atoms[j].element == "H")
            for i in range(len(self.atoms))
        )

    def bond_between(self, i: int, j: int) -> Bond | None:
        k = self._bond_lookup.get((i, j))
        return None if k is None else self.bonds[k]

    def bond_index(self, i: int, j: int) -> int | None:
        return self._bond_lookup.get((i, j))

    def neighbors(self, i: int) -> list[int]:
        return [j for j, _ in self.adjacency[i]]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def total_h(self, i: int) -> int:
        """Implicit hydrogens plus explicit hydrogen neighbors."""
        return self.atoms[i].implicit_h + self.explicit_h_neighbors[i]

    def bond_order_sum(self, i: int) -> float:
        return sum(self.bonds[k].order.valence for _, k in self.adjacency[i])

    def total_valence(self, i: int) -> int:
        """Integer valence: Kekule bond-order sum plus hydrogens.

        Aromatic bonds count 1 each and the atom is rounded up to its lowest
        allowed valence, which accounts for the delocalized pi bond.
        """
        atom = self.atoms[i]
        orders = [self.bonds[k].order for _, k in self.adjacency[i]]
        val = sum(1 if o is BondOrder.AROMATIC else o.value for o in orders) + atom.implicit_h
        if atom.aromatic:
            for v in allowed_valences(atom.element, atom.charge):
                if v >= val:
                    return v
        return val

    @property
    def heavy_atom_indices(self) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if a.element != "H"]


# --------------------------------------------------------------------------
# tokenizer / parser


@dataclass
class _AtomDraft:
    element: str
    charge: int
    hcount: int | None  # None for organic-subset atoms
    aromatic: bool
    offset: int


class _Parser:
    def __init__(self, smiles: str) -> None:
        self.s = smiles
        self.pos = 0
        self.atoms: list[_AtomDraft] = []
        self.bonds: list[tuple[int, int, BondOrder | None]] = []
        self.pairs: set[tuple[int, int]] = set()

    def fail(self, cls, message: str, offset: int | None = None):
        raise cls(message, self.pos if offset is None else offset, self.s)

    # ---- bonds

    def add_bond(self, a: int, b: int, order: BondOrder | None, offset: int) -> None:
        if a == b:
            self.fail(DuplicateBond, "ring closure bonds an atom to itself", offset)
        key = (min(a, b), max(a, b))
        if key in self.pairs:
            self.fail(DuplicateBond, "duplicate bond between the same atoms", offset)
        self.pairs.add(key)
        self.bonds.append((a, b, order))

    # ---- atoms

    def read_bracket(self) -> _AtomDraft:
        s, start = self.s, self.pos
        end = s.find("]", start)
        if end < 0:
            self.fail(SmilesSyntaxError, "unterminated bracket atom", start)
        body = s[start + 1:end]
        i = 0
        if i < len(body) and body[i].isdigit():
            self.fail(UnsupportedFeature, "isotopes are not supported", start + 1)
        if i < len(body) and body[i] == "*":
            self.fail(UnsupportedFeature, "wildcard atoms are not supported", start + 1)
        sym = ""
        if body[i:i + 2] in ELEMENTS and len(body[i:i + 2]) == 2:
            sym = body[i:i + 2]
        elif body[i:i + 1] and (body[i] in ELEMENTS or body[i] in AROMATIC_SUBSET):
            sym = body[i]
        if not sym:
            self.fail(UnknownElement, f"unknown element in bracket atom {body!r}", start + 1)
        i += len(sym)
        aromatic = sym.islower()
        element = sym.capitalize() if aromatic else sym
        hcount = 0
        charge = 0
        if i < len(body) and body[i] == "@":
            self.fail(UnsupportedFeature, "stereo markers are not supported", start + 1 + i)
        if i < len(body) and body[i] == "H":
            i += 1
            j = i
            while j < len(body) and body[j].isdigit():
                j += 1
            hcount = int(body[i:j]) if j > i else 1
            i = j
        if i < len(body) and body[i] in "+-":
            sign = 1 if body[i] == "+" else -1
            ch = body[i]
            j = i + 1
            while j < len(body) and body[j] == ch:
                j += 1
            if j > i + 1:
                charge = sign * (j - i)
                i = j
            else:
                k = j
                while k < len(body) and body[k].isdigit():
                    k += 1
                charge = sign * (int(body[j:k]) if k > j else 1)
                i = k
        if i < len(body):
            c = body[i]
            if c == "@":
                self.fail(UnsupportedFeature, "stereo markers are not supported", start + 1 + i)
            if c == ":":
                self.fail(UnsupportedFeature, "atom classes are not supported", start + 1 + i)
            self.fail(SmilesSyntaxError, f"unexpected {c!r} in bracket atom", start + 1 + i)
        self.pos = end + 1
        return _AtomDraft(element, charge, hcount, aromatic, start)

    def read_atom(self) -> _AtomDraft | None:
        s, p = self.s, self.pos
        c = s[p]
        if c == "[":
            return self.read_bracket()
        two = s[p:p + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return _AtomDraft(two, 0, None, False, p)
        if c in ORGANIC_SUBSET:
            self.pos += 1
            return _AtomDraft(c, 0, None, False, p)
        if c in AROMATIC_SUBSET:
            self.pos += 1
            return _AtomDraft(c.upper(), 0, None, True, p)
        return None

    # ---- main loop

    def parse(self) -> None:
        s = self.s
        if not s:
            self.fail(SmilesSyntaxError, "empty SMILES", 0)
        prev: int | None = None
        pending: tuple[BondOrder, int] | None = None
        branches: list[tuple[int, int]] = []  # (atom index, offset of '(')
        rings: dict[int, tuple[int, BondOrder | None, int]] = {}
        after_open = False
        while self.pos < len(s):
            c = s[self.pos]
            p = self.pos
            if c == "(":
                if prev is None or pending is not None or after_open:
                    self.fail(SmilesSyntaxError, "branch must follow an atom", p)
                branches.append((prev, p))
                self.pos += 1
                after_open = True
                continue
            if c == ")":
                if not branches:
                    self.fail(UnbalancedParenthesis, "unmatched ')'", p)
                if pending is not None:
                    self.fail(SmilesSyntaxError, "dangling bond", pending[1])
                if after_open:
                    self.fail(SmilesSyntaxError, "empty branch", p)
                prev = branches.pop()[0]
                self.pos += 1
                continue
            if c in _BOND_SYMBOLS:
                if prev is None or pending is not None:
                    self.fail(SmilesSyntaxError, "bond symbol must follow an atom", p)
                pending = (_BOND_SYMBOLS[c], p)
                self.pos += 1
                continue
            if c in "/\\":
                self.fail(UnsupportedFeature, "directional bonds are not supported", p)
            if c == "$":
                self.fail(UnsupportedFeature, "quadruple bonds are not supported", p)
            if c == "*":
                self.fail(UnsupportedFeature, "wildcard atoms are not supported", p)
            if c == ".":
                self.fail(MultiFragmentInput, "multi-fragment SMILES", p)
            if c.isdigit() or c == "%":
                if prev is None or after_open:
                    self.fail(SmilesSyntaxError, "ring closure must follow an atom", p)
                if c == "%":
                    digits = s[p + 1:p + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        self.fail(SmilesSyntaxError, "'%' must be followed by two digits", p)
                    num = int(digits)
                    self.pos += 3
                else:
                    num = int(c)
                    self.pos += 1
                order = pending[0] if pending else None
                if num in rings:
                    other, other_order, _ = rings.pop(num)
                    if order and other_order and order is not other_order:
                        self.fail(SmilesSyntaxError, "conflicting ring-closure bond orders", p)
                    self.add_bond(other, prev, order or other_order, p)
                else:
                    rings[num] = (prev, order, p)
                pending = None
                continue
            draft = self.read_atom()
            if draft is None:
                if c.isalpha():
                    self.fail(UnknownElement, f"unknown element {c!r}", p)
                self.fail(SmilesSyntaxError, f"unexpected character {c!r}", p)
            self.atoms.append(draft)
            idx = len(self.atoms) - 1
            if prev is not None:
                self.add_bond(prev, idx, pending[0] if pending else None, p)
            elif pending is not None:
                self.fail(SmilesSyntaxError, "bond symbol must follow an atom", pending[1])
            prev = idx
            pending = None
            after_open = False
        if pending is not None:
            self.fail(SmilesSyntaxError, "dangling bond", pending[1])
        if branches:
            self.fail(UnbalancedParenthesis, "unclosed '('", branches[-1][1])
        if rings:
            first = min(rings.values(), key=lambda r: r[2])
            self.fail(UnclosedRingBond, "unclosed ring bond", first[2])
        if after_open:
            self.fail(SmilesSyntaxError, "empty branch", len(s))


def _resolve_order(order: BondOrder | None, a: _AtomDraft, b: _AtomDraft) -> BondOrder:
    if order is not None:
        return order
    return BondOrder.AROMATIC if a.aromatic and b.aromatic else BondOrder.SINGLE


def _assign_hydrogens(draft: _AtomDraft, orders: list[BondOrder], smiles: str) -> int:
    n_arom = sum(1 for o in orders if o is BondOrder.AROMATIC)
    rest = sum(o.value for o in orders if o is not BondOrder.AROMATIC)
    base = n_arom + rest
    allowed = allowed_valences(draft.element, draft.charge)
    if draft.aromatic and n_arom == 0:
        raise ValenceViolation("aromatic atom without aromatic bonds", draft.offset, smiles)
    if draft.hcount is not None:
        total = base + draft.hcount
        ok = total in allowed or (draft.aromatic and total + 1 in allowed)
        if not ok:
            raise ValenceViolation(
                f"valence {total} not allowed for {draft.element}{draft.charge:+d}",
                draft.offset, smiles,
            )
        return draft.hcount
    if draft.aromatic:
        if draft.element == "C":
            pi = 0 if BondOrder.DOUBLE in orders else 1
            h = 4 - base - pi
        elif draft.element == "N":
            h = 0 if base >= 3 else 3 - base - 1
            if base > 3:
                h = -1
        else:  # aromatic o, s
            h = 0 if base == 2 else -1
        if h < 0:
            raise ValenceViolation(f"aromatic {draft.element} over-bonded", draft.offset, smiles)
        return h
    for v in allowed:
        if v >= base:
            return int(v - base)
    raise ValenceViolation(
        f"valence {base} exceeds allowed {allowed} for {draft.element}", draft.offset, smiles
    )


def parse_smiles(smiles: str) -> MolecularGraph:
    """Parse a SMILES string into a validated :class:`MolecularGraph`.

    Atoms are numbered in SMILES token order.  Implicit hydrogens are
    assigned from the lowest standard valence that fits, rings are
    perceived and Kekule six-rings of carbon/nitrogen are flagged aromatic.

    Raises:
        SmilesError: a subclass naming the failure and its byte offset.
    """
    if not isinstance(smiles, str):
        raise TypeError("smiles must be a str")
    try:
        smiles.encode("ascii")
    except UnicodeEncodeError:
        bad = next(i for i, ch in enumerate(smiles) if ord(ch) > 127)
        raise SmilesSyntaxError("non-ASCII character", len(smiles[:bad].encode()), smiles) from None
    parser = _Parser(smiles)
    parser.parse()
    drafts = parser.atoms
    raw_bonds = [(a, b, _resolve_order(o, drafts[a], drafts[b])) for a, b, o in parser.bonds]
    orders: list[list[BondOrder]] = [[] for _ in drafts]
    for a, b, o in raw_bonds:
        orders[a].append(o)
        orders[b].append(o)
    hydrogens = [_assign_hydrogens(d, orders[i], smiles) for i, d in enumerate(drafts)]

    edges = [(a, b) for a, b, _ in raw_bonds]
    rings = perceive_rings_from_edges(len(drafts), edges)
    ring_atoms = {a for r in rings for a in r}
    ring_pairs = set()
    for r in rings:
        for k in range(len(r)):
            ring_pairs.add(frozenset((r[k], r[(k + 1) % len(r)])))

    aromatic = [d.aromatic for d in drafts]
    bond_orders = [o for _, _, o in raw_bonds]
    _kekule_aromaticity(drafts, raw_bonds, rings, aromatic, bond_orders)

    for i, d in enumerate(drafts):
        if aromatic[i] and i not in ring_atoms:
            raise ValenceViolation("aromatic atom outside a ring", d.offset, smiles)

    atoms = tuple(
        Atom(
            element=d.element,
            charge=d.charge,
            implicit_h=hydrogens[i],
            aromatic=aromatic[i],
            in_ring=i in ring_atoms,
        )
        for i, d in enumerate(drafts)
    )
    bonds = tuple(
        Bond((a, b), bond_orders[k], frozenset((a, b)) in ring_pairs)
        for k, (a, b, _) in enumerate(raw_bonds)
    )
    return MolecularGraph(atoms, bonds, tuple(rings), smiles)


def _kekule_aromaticity(drafts, raw_bonds, rings, aromatic, bond_orders) -> None:
    """Flag alternating single/double six-rings of neutral C/N as aromatic."""
    index = {frozenset((a, b)): k for k, (a, b, _) in enumerate(raw_bonds)}
    exocyclic_double: set[int] = set()
    for ring in rings:
        if len(ring) != 6:
            continue
        if any(drafts[a].element not in ("C", "N") or drafts[a].charge or drafts[a].aromatic for a in ring):
            continue
        ks = [index[frozenset((ring[i], ring[(i + 1) % 6]))] for i in range(6)]
        pattern = [bond_orders[k] for k in ks]
        alternating = all(
            {pattern[i], pattern[(i + 1) % 6]} == {BondOrder.SINGLE, BondOrder.DOUBLE} for i in range(6)
        )
        if not alternating:
            continue
        ring_set = set(ks)
        exo = False
        for k, (a, b, _) in enumerate(raw_bonds):
            if k not in ring_set and (a in ring or b in ring) and bond_orders[k] is BondOrder.DOUBLE:
                exo = True
        if exo:
            continue
        for a in ring:
            aromatic[a] = True
        for k in ks:
            bond_orders[k] = BondOrder.AROMATIC
        exocyclic_double.update(ring)


# --------------------------------------------------------------------------
# rings


def _normalize_ring(cycle: list[int]) -> tuple[int, ...]:
    n = len(cycle)
    k = cycle.index(min(cycle))
    rot = cycle[k:] + cycle[:k]
    if n > 2 and rot[-1] < rot[1]:
        rot = [rot[0]] + rot[1:][::-1]
    return tuple(rot)


def perceive_rings_from_edges(n_atoms: int, edges: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Minimum cycle basis via Horton candidates and GF(2) elimination."""
    n_rings = len(edges) - n_atoms + 1 if n_atoms else 0
    if n_rings <= 0:
        return []
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for k, (a, b) in enumerate(edges):
        adj[a].append((b, k))
        adj[b].append((a, k))
    for lst in adj:
        lst.sort()

    candidates: dict[int, tuple[int, tuple[int, ...], list[int]]] = {}
    for root in range(n_atoms):
        parent = [-1] * n_atoms
        pedge = [-1] * n_atoms
        depth = [-1] * n_atoms
        depth[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, k in adj[u]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    pedge[v] = k
                    queue.append(v)

        def path(v: int) -> list[int]:
            out = [v]
            while v != root:
                v = parent[v]
                out.append(v)
            return out

        for k, (x, y) in enumerate(edges):
            if pedge[x] == k or pedge[y] == k:
                continue
            px, py = path(x), path(y)
            if set(px) & set(py) != {root}:
                continue
            cycle = px[::-1] + py[:-1]  # root .. x, then y back toward root
            mask = 0
            for i in range(len(cycle)):
                mask |= 1 << _edge_id(adj, cycle[i], cycle[(i + 1) % len(cycle)])
            if mask not in candidates:
                ring = _normalize_ring(cycle)
                candidates[mask] = (len(cycle), tuple(sorted(ring)), list(ring))

    ordered = sorted(candidates.items(), key=lambda kv: (kv[1][0], kv[1][1]))
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    chosen: list[tuple[int, ...]] = []
    for mask, (_, _, ring) in ordered:
        vec = mask
        while vec:
            pivot = vec.bit_length() - 1
            if pivot in basis:
                vec ^= basis[pivot]
            else:
                basis[pivot] = vec
                chosen.append(tuple(ring))
                break
        if len(chosen) == n_rings:
            break
    return sorted(chosen, key=lambda r: (len(r), tuple(sorted(r))))


def _edge_id(adj, a: int, b: int) -> int:
    for v, k in adj[a]:
        if v == b:
            return k
    raise KeyError((a, b))


def perceive_rings(graph: MolecularGraph) -> list[tuple[int, ...]]:
    """Smallest set of smallest rings of ``graph`` (circuit-rank many)."""
    heavy = graph.heavy_atom_indices
    if len(heavy) == len(graph.atoms):
        return perceive_rings_from_edges(len(graph.atoms), [b.endpoints for b in graph.bonds])
    # hydrogens never close rings; drop them and map indices back
    pos = {a: i for i, a in enumerate(heavy)}
    edges = [(pos[b.begin], pos[b.end]) for b in graph.bonds if b.begin in pos and b.end in pos]
    return [tuple(heavy[i] for i in r) for r in perceive_rings_from_edges(len(heavy), edges)]


# --------------------------------------------------------------------------
# hydrogens


def with_explicit_hydrogens(graph: MolecularGraph) -> MolecularGraph:
    """Copy of ``graph`` with every implicit hydrogen as an explicit atom.

    Heavy atoms keep their indices; hydrogens are appended in heavy-atom
    order.
    """
    atoms = [Atom(a.element, a.charge, 0, a.aromatic, a.in_ring) for a in graph.atoms]
    bonds = list(graph.bonds)
    for i, a in enumerate(graph.atoms):
        for _ in range(a.implicit_h):
            atoms.append(Atom("H"))
            bonds.append(Bond((i, len(atoms) - 1), BondOrder.SINGLE))
    return MolecularGraph(tuple(atoms), tuple(bonds), graph.rings, graph.source_smiles)


# --------------------------------------------------------------------------
# hashing


def stable_hash(*parts) -> int:
    """Deterministic 64-bit hash of a tuple of ints/strings/tuples."""
    return int.from_bytes(hashlib.blake2b(repr(parts).encode(), digest_size=8).digest(), "little")


_BOND_CODE = {BondOrder.SINGLE: 1, BondOrder.DOUBLE: 2, BondOrder.TRIPLE: 3, BondOrder.AROMATIC: 12}


def bond_code(order: BondOrder) -> int:
    return _BOND_CODE[order]


def atom_invariants(graph: MolecularGraph) -> list[int]:
    """Connectivity invariants: element, total degree, H count, charge, ring flag."""
    out = []
    for i, a in enumerate(graph.atoms):
        h = graph.total_h(i)
        out.append(stable_hash(a.atomic_number, graph.degree(i) + a.implicit_h, h, a.charge, int(a.in_ring)))
    return out


def refine(graph: MolecularGraph, invariants: list[int], layer: int) -> list[int]:
    """One round of neighborhood refinement over all atoms."""
    out = []
    for i in range(len(graph.atoms)):
        env = sorted((_BOND_CODE[graph.bonds[k].order], invariants[j]) for j, k in graph.adjacency[i])
        out.append(stable_hash(layer, invariants[i], tuple(env)))
    return out


def graph_hash(graph: MolecularGraph, rounds: int = 4) -> int:
    """64-bit digest invariant under atom renumbering."""
    inv = atom_invariants(graph)
    layers = [tuple(sorted(inv))]
    for layer in range(rounds):
        inv = refine(graph, inv, layer)
        layers.append(tuple(sorted(inv)))
    return stable_hash(len(graph.atoms), len(graph.bonds), tuple(layers))
