import json
import random
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwpscreen.molgraph import (
    BondOrder,
    UnknownElement,
    graph_hash,
    parse_smiles,
    perceive_rings,
    with_explicit_hydrogens,
)
from helpers import INVALID_FIXTURES, random_smiles

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_descriptors.json").read_text())["molecules"]


def test_methane():
    g = parse_smiles("C")
    assert len(g.atoms) == 1 and g.atoms[0].implicit_h == 4
    assert g.bonds == () and g.rings == ()


def test_hfc134a():
    g = parse_smiles("FCC(F)(F)F")
    elements = [a.element for a in g.atoms]
    assert elements.count("C") == 2 and elements.count("F") == 4
    assert sum(a.implicit_h for a in g.atoms) == 2
    assert len(g.bonds) == 5 and g.rings == ()


def test_oxirane_ring():
    g = parse_smiles("C1CO1")
    assert len(g.atoms) == 3 and len(g.bonds) == 3
    assert len(g.rings) == 1 and len(g.rings[0]) == 3
    assert any(g.atoms[i].element == "O" for i in g.rings[0])
    assert all(a.in_ring for a in g.atoms) and all(b.in_ring for b in g.bonds)


@pytest.mark.parametrize(
    "smiles, n_rings, sizes",
    [("CCC", 0, []), ("C1CC1", 1, [3]), ("c1ccc2ccccc2c1", 2, [6, 6]), ("C12C3C1C23", 3, [3, 3, 3])],
)
def test_perceive_rings(smiles, n_rings, sizes):
    g = parse_smiles(smiles)
    rings = perceive_rings(g)
    assert len(rings) == n_rings
    assert sorted(len(r) for r in rings) == sizes


def test_cyclopropane_ring_members():
    assert [set(r) for r in parse_smiles("C1CC1").rings] == [{0, 1, 2}]


@pytest.mark.parametrize("smiles, error, offset", INVALID_FIXTURES)
def test_invalid_fixtures_offsets(smiles, error, offset):
    with pytest.raises(error) as info:
        parse_smiles(smiles)
    assert info.value.offset == offset


def test_stereo_rejected_as_unknown_element_class():
    with pytest.raises(UnknownElement):
        parse_smiles("F[C@H](Cl)Br")


def test_graph_hash_examples():
    assert graph_hash(parse_smiles("CCO")) == graph_hash(parse_smiles("OCC"))
    assert graph_hash(parse_smiles("CCO")) != graph_hash(parse_smiles("CCF"))


def test_graph_hash_stable_across_processes():
    code = "from gwpscreen.molgraph import graph_hash, parse_smiles; print(graph_hash(parse_smiles('C1CC1')))"
    out = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
           for _ in range(2)}
    assert out == {f"{graph_hash(parse_smiles('C1CC1'))}\n"}


def test_graph_hash_distinct_on_dataset():
    import csv

    path = Path(__file__).parents[1] / "data" / "ar6_gwp100.csv"
    rows = list(csv.DictReader(path.open()))
    hashes = {graph_hash(parse_smiles(r["smiles"])) for r in rows}
    assert len(hashes) == len(rows)


def test_explicit_hydrogens():
    g = with_explicit_hydrogens(parse_smiles("CO"))
    assert [a.element for a in g.atoms].count("H") == 4
    assert all(a.implicit_h == 0 for a in g.atoms)
    assert len(g.bonds) == 5


def test_kekule_benzene_is_aromatic():
    g = parse_smiles("C1=CC=CC=C1")
    assert all(a.aromatic for a in g.atoms)
    assert all(b.order is BondOrder.AROMATIC for b in g.bonds)


def _handshake_even(g) -> bool:
    # heavy valences plus one per hydrogen atom: twice the H-completed bond count
    total = sum(g.total_valence(i) + g.atoms[i].implicit_h for i in range(len(g.atoms)))
    return total % 2 == 0


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_fixture_invariants(name):
    g = parse_smiles(GOLDEN[name]["smiles"])
    assert len(g.rings) == len(g.bonds) - len(g.atoms) + 1
    assert all(a.implicit_h >= 0 for a in g.atoms)
    assert _handshake_even(g)
    assert _handshake_even(with_explicit_hydrogens(g))


@settings(max_examples=150, deadline=None)
@given(name=st.sampled_from(sorted(GOLDEN)), seed=st.integers(0, 2**32 - 1))
def test_retraversal_preserves_graph(name, seed):
    g = parse_smiles(GOLDEN[name]["smiles"])
    text = random_smiles(g, random.Random(seed))
    g2 = parse_smiles(text)
    assert graph_hash(g2) == graph_hash(g)
    assert len(g2.rings) == len(g.rings)
    assert sorted(map(len, g2.rings)) == sorted(map(len, g.rings))
