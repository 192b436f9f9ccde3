import json
import random
from pathlib import Path

from hypothesis import given, settings
from hypothesis import strategies as st

from gwpscreen.descriptors import featurize
from gwpscreen.molgraph import SmilesError, parse_smiles
from helpers import fuzz_parser, grammar_strings

SEEDS = [r["smiles"] for r in json.loads((Path(__file__).parent / "data" / "golden_descriptors.json")
                                         .read_text())["molecules"].values()]


def test_grammar_fuzz_no_crashes():
    stats = fuzz_parser(20_000, 11, SEEDS)
    assert stats["crashes"] == []
    assert stats["rank_violations"] == []
    assert stats["bad_offsets"] == []
    assert stats["valid"] > 500


def test_accepted_fuzz_strings_featurize():
    rng = random.Random(5)
    done = 0
    for text in grammar_strings(rng, 4000, SEEDS):
        try:
            g = parse_smiles(text)
        except SmilesError:
            continue
        values = featurize(g)
        assert all(v == v for v in values.values())
        done += 1
    assert done > 100


@settings(max_examples=2000, deadline=None)
@given(st.text(max_size=30))
def test_arbitrary_text_only_named_errors(text):
    try:
        parse_smiles(text)
    except SmilesError as exc:
        assert 0 <= exc.offset <= len(text)
