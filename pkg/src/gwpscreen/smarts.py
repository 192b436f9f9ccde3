"""A small SMARTS-like pattern language and a backtracking subgraph matcher.

Only what the descriptor tables need is supported.

Atom primitives (inside brackets):
    element symbols (``C`` aliphatic, ``c`` aromatic), ``#n``, ``*``, ``a``,
    ``A``, ``H<n>`` (total H), ``X<n>`` (total connections), ``D<n>``
    (explicit connections), ``R`` / ``R<n>`` (ring count), ``r<n>`` (ring
    size), ``v<n>`` (total valence), charges ``+ - +n -n ++``, recursive
    ``$(...)``.
Logical operators:
    ``!`` not, implicit and, ``&`` and, ``,`` or, ``;`` low-precedence and.
Bonds:
    ``- = # : ~ @`` with the same operators; an unwritten bond means
    single-or-aromatic.

Example:
    >>> from gwpscreen.molgraph import parse_smiles
    >>> count_unique(compile_smarts("[NX1]#[CX2]"), parse_smiles("N#CCC#N"))
    2
"""

from __future__ import annotations

from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from functools import lru_cache

from gwpscreen.elements import ELEMENTS
from gwpscreen.molgraph import BondOrder, MolecularGraph

__all__ = ["Pattern", "SmartsError", "compile_smarts", "find_matches", "matches_at", "count_unique"]

AtomPred = Callable[[MolecularGraph, int], bool]
BondPred = Callable[[MolecularGraph, int], bool]


class SmartsError(ValueError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Pattern:
    """Compiled pattern: atom predicates, and bonds ``(i, j, predicate)``.

    Every atom ``k > 0`` has a tree parent ``parents[k] < k``.  ``bonds``
    also holds ring-closure edges.
    """

    text: str
    atoms: tuple[AtomPred, ...]
    bonds: tuple[tuple[int, int, BondPred], ...]
    parents: tuple[int, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.atoms)


# --------------------------------------------------------------------------
# atom-level properties


def _aromatic(g: MolecularGraph, i: int) -> bool:
    return g.atoms[i].aromatic


def _total_degree(g: MolecularGraph, i: int) -> int:
    return g.degree(i) + g.atoms[i].implicit_h


_AROMATIC_SYMBOLS = {"c": "C", "n": "N", "o": "O", "s": "S", "p": "P", "b": "B"}


def _bond_is(order: BondOrder) -> BondPred:
    return lambda g, k: g.bonds[k].order is order


def _bond_default(g: MolecularGraph, k: int) -> bool:
    return g.bonds[k].order in (BondOrder.SINGLE, BondOrder.AROMATIC)


def _bond_any(g: MolecularGraph, k: int) -> bool:
    return True


def _bond_ring(g: MolecularGraph, k: int) -> bool:
    return g.bonds[k].in_ring


_BOND_PRIMITIVES: dict[str, BondPred] = {
    "-": _bond_is(BondOrder.SINGLE),
    "=": _bond_is(BondOrder.DOUBLE),
    "#": _bond_is(BondOrder.TRIPLE),
    ":": _bond_is(BondOrder.AROMATIC),
    "~": _bond_any,
    "@": _bond_ring,
}


# --------------------------------------------------------------------------
# expression parsing shared by atoms and bonds


def _and(a, b):
    return lambda g, i: a(g, i) and b(g, i)


def _or(a, b):
    return lambda g, i: a(g, i) or b(g, i)


def _not(a):
    return lambda g, i: not a(g, i)


class _ExprParser:
    """Precedence: ``;`` < ``,`` < ``&`` < implicit and < ``!``."""

    def __init__(self, text: str, start: int, end: int, primitive) -> None:
        self.text = text
        self.pos = start
        self.end = end
        self.primitive = primitive

    def parse(self):
        expr = self.low_and()
        if self.pos != self.end:
            raise SmartsError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return expr

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.end else ""

    def low_and(self):
        expr = self.or_()
        while self.peek() == ";":
            self.pos += 1
            expr = _and(expr, self.or_())
        return expr

    def or_(self):
        expr = self.high_and()
        while self.peek() == ",":
            self.pos += 1
            expr = _or(expr, self.high_and())
        return expr

    def high_and(self):
        expr = self.implicit_and()
        while self.peek() == "&":
            self.pos += 1
            expr = _and(expr, self.implicit_and())
        return expr

    def implicit_and(self):
        expr = self.unary()
        while self.peek() and self.peek() not in ";,&":
            expr = _and(expr, self.unary())
        return expr

    def unary(self):
        if self.peek() == "!":
            self.pos += 1
            return _not(self.unary())
        if not self.peek():
            raise SmartsError("expected a primitive", self.pos)
        pred, self.pos = self.primitive(self.text, self.pos, self.end)
        return pred


def _read_int(text: str, pos: int, end: int) -> tuple[int | None, int]:
    j = pos
    while j < end and text[j].isdigit():
        j += 1
    return (int(text[pos:j]) if j > pos else None), j


def _find_close(text: str, pos: int) -> int:
    """Index of the ')' closing the '(' at ``pos``."""
    depth = 0
    for j in range(pos, len(text)):
        if text[j] == "(":
            depth += 1
        elif text[j] == ")":
            depth -= 1
            if depth == 0:
                return j
    raise SmartsError("unbalanced parenthesis", pos)


def _atom_primitive(text: str, pos: int, end: int) -> tuple[AtomPred, int]:
    c = text[pos]
    if c == "$":
        if pos + 1 >= end or text[pos + 1] != "(":
            raise SmartsError("expected '(' after '$'", pos)
        close = _find_close(text, pos + 1)
        inner = compile_smarts(text[pos + 2:close])
        return (lambda g, i: matches_at(inner, g, i)), close + 1
    if c == "#":
        n, j = _read_int(text, pos + 1, end)
        if n is None:
            raise SmartsError("expected atomic number", pos)
        return (lambda g, i: g.atoms[i].atomic_number == n), j
    if c == "*":
        return (lambda g, i: True), pos + 1
    if c == "a":
        return _aromatic, pos + 1
    if c == "A":
        return (lambda g, i: not g.atoms[i].aromatic), pos + 1
    if c in "+-":
        sign = 1 if c == "+" else -1
        j = pos + 1
        while j < end and text[j] == c:
            j += 1
        if j > pos + 1:
            charge = sign * (j - pos)
        else:
            n, j = _read_int(text, pos + 1, end)
            charge = sign * (1 if n is None else n)
        return (lambda g, i: g.atoms[i].charge == charge), j
    if c == "H":
        n, j = _read_int(text, pos + 1, end)
        n = 1 if n is None else n
        return (lambda g, i: g.total_h(i) == n), j
    if c == "X":
        n, j = _read_int(text, pos + 1, end)
        n = 1 if n is None else n
        return (lambda g, i: _total_degree(g, i) == n), j
    if c == "D":
        n, j = _read_int(text, pos + 1, end)
        n = 1 if n is None else n
        return (lambda g, i: g.degree(i) == n), j
    if c == "v":
        n, j = _read_int(text, pos + 1, end)
        n = 1 if n is None else n
        return (lambda g, i: g.total_valence(i) == n), j
    if c == "R":
        n, j = _read_int(text, pos + 1, end)
        if n is None:
            return (lambda g, i: g.atoms[i].in_ring), j
        return (lambda g, i: g.ring_membership[i] == n), j
    if c == "r":
        n, j = _read_int(text, pos + 1, end)
        if n is None:
            return (lambda g, i: g.atoms[i].in_ring), j
        return (lambda g, i: n in g.ring_sizes[i]), j
    two = text[pos:pos + 2]
    if pos + 2 <= end and two in ELEMENTS and len(two) == 2:
        return _element(two, aromatic=False), pos + 2
    if c in _AROMATIC_SYMBOLS:
        return _element(_AROMATIC_SYMBOLS[c], aromatic=True), pos + 1
    if c in ELEMENTS:
        return _element(c, aromatic=False), pos + 1
    raise SmartsError(f"unknown atom primitive {c!r}", pos)


def _element(symbol: str, aromatic: bool) -> AtomPred:
    def pred(g: MolecularGraph, i: int) -> bool:
        a = g.atoms[i]
        return a.element == symbol and a.aromatic == aromatic

    return pred


def _bond_primitive(text: str, pos: int, end: int) -> tuple[BondPred, int]:
    c = text[pos]
    if c in _BOND_PRIMITIVES:
        return _BOND_PRIMITIVES[c], pos + 1
    raise SmartsError(f"unknown bond primitive {c!r}", pos)


# --------------------------------------------------------------------------
# pattern compilation

_BOND_CHARS = set("-=#:~@!&,;")
_BARE_ATOMS = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I", "c", "n", "o", "s", "p", "*", "a", "A")


@lru_cache(maxsize=None)
def compile_smarts(text: str) -> Pattern:
    """Compile a pattern string into a :class:`Pattern`."""
    atoms: list[AtomPred] = []
    bonds: list[tuple[int, int, BondPred]] = []
    parents: list[int] = []
    stack: list[int] = []
    prev: int | None = None
    pending: BondPred | None = None
    rings: dict[int, tuple[int, BondPred | None]] = {}
    pos = 0
    n = len(text)
    while pos < n:
        c = text[pos]
        if c == "(":
            if prev is None:
                raise SmartsError("branch before any atom", pos)
            stack.append(prev)
            pos += 1
            continue
        if c == ")":
            if not stack:
                raise SmartsError("unbalanced ')'", pos)
            prev = stack.pop()
            pos += 1
            continue
        if c in _BOND_CHARS and prev is not None and pending is None:
            j = pos
            while j < n and text[j] in _BOND_CHARS:
                j += 1
            pending = _ExprParser(text, pos, j, _bond_primitive).parse()
            pos = j
            continue
        if c.isdigit() or c == "%":
            if prev is None:
                raise SmartsError("ring closure before any atom", pos)
            if c == "%":
                num = int(text[pos + 1:pos + 3])
                pos += 3
            else:
                num = int(c)
                pos += 1
            if num in rings:
                other, order = rings.pop(num)
                bonds.append((other, prev, pending or order or _bond_default))
            else:
                rings[num] = (prev, pending)
            pending = None
            continue
        if c == "[":
            close = text.find("]", pos)
            # brackets may nest inside recursive $( ) expressions
            depth = 0
            for j in range(pos, n):
                if text[j] == "[":
                    depth += 1
                elif text[j] == "]":
                    depth -= 1
                    if depth == 0:
                        close = j
                        break
            if close < 0:
                raise SmartsError("unterminated bracket", pos)
            pred = _ExprParser(text, pos + 1, close, _atom_primitive).parse()
            pos = close + 1
        else:
            for sym in _BARE_ATOMS:
                if text.startswith(sym, pos):
                    break
            else:
                raise SmartsError(f"unexpected {c!r}", pos)
            pred, _ = _atom_primitive(sym, 0, len(sym))
            pos += len(sym)
        atoms.append(pred)
        idx = len(atoms) - 1
        if prev is not None:
            bonds.append((prev, idx, pending or _bond_default))
            parents.append(prev)
        else:
            parents.append(-1)
        prev = idx
        pending = None
    if stack or rings or not atoms:
        raise SmartsError("incomplete pattern", n)
    return Pattern(text, tuple(atoms), tuple(bonds), tuple(parents))


# --------------------------------------------------------------------------
# matching


def _search(pattern: Pattern, g: MolecularGraph, first: int | None) -> Iterator[tuple[int, ...]]:
    npat = len(pattern.atoms)
    # bonds to check when atom k is placed: those to earlier pattern atoms
    checks: list[list[tuple[int, BondPred]]] = [[] for _ in range(npat)]
    for a, b, pred in pattern.bonds:
        lo, hi = min(a, b), max(a, b)
        checks[hi].append((lo, pred))
    mapping = [-1] * npat
    used: set[int] = set()

    def extend(k: int) -> Iterator[tuple[int, ...]]:
        if k == npat:
            yield tuple(mapping)
            return
        parent = pattern.parents[k]
        pool = [j for j, _ in g.adjacency[mapping[parent]]] if parent >= 0 else range(len(g.atoms))
        for cand in pool:
            if cand in used or not pattern.atoms[k](g, cand):
                continue
            ok = True
            for other, pred in checks[k]:
                bk = g.bond_index(mapping[other], cand)
                if bk is None or not pred(g, bk):
                    ok = False
                    break
            if not ok:
                continue
            mapping[k] = cand
            used.add(cand)
            yield from extend(k + 1)
            used.discard(cand)
            mapping[k] = -1

    if first is None:
        yield from extend(0)
        return
    if not pattern.atoms[0](g, first):
        return
    mapping[0] = first
    used.add(first)
    yield from extend(1)


def find_matches(pattern: Pattern | str, g: MolecularGraph) -> list[tuple[int, ...]]:
    """All injective matches, as tuples of graph atom indices in pattern order."""
    if isinstance(pattern, str):
        pattern = compile_smarts(pattern)
    return list(_search(pattern, g, None))


def matches_at(pattern: Pattern | str, g: MolecularGraph, atom: int) -> bool:
    """Whether some match maps the first pattern atom onto ``atom``."""
    if isinstance(pattern, str):
        pattern = compile_smarts(pattern)
    return next(_search(pattern, g, atom), None) is not None


def count_unique(pattern: Pattern | str, g: MolecularGraph) -> int:
    """Number of matches that differ in their matched atom set."""
    return len({frozenset(m) for m in find_matches(pattern, g)})
