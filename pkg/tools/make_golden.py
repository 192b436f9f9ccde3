"""Regenerate tests/data/golden_descriptors.json with RDKit.

RDKit is a development-time oracle only; the package never imports it.

    python3 tools/make_golden.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import rdkit
from rdkit import Chem
from rdkit.Chem import Crippen, Descriptors, Lipinski, rdMolDescriptors

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from gwpscreen.descriptors import DESCRIPTOR_NAMES  # noqa: E402
from gwpscreen.descriptors.fragments import FRAGMENT_PATTERNS  # noqa: E402

FIXTURES = [
    ("methane", "C"),
    ("water", "O"),
    ("ethanol", "CCO"),
    ("HFC-134a", "FCC(F)(F)F"),
    ("ethylene oxide", "C1CO1"),
    ("carbon tetrachloride", "ClC(Cl)(Cl)Cl"),
    ("acetonitrile", "CC#N"),
    ("malononitrile analogue", "N#CCC#N"),
    ("benzene", "c1ccccc1"),
    ("tetrafluoroethylene", "FC(F)=C(F)F"),
    ("HFO-1234yf", "C=C(F)C(F)(F)F"),
    ("Halon-1301", "FC(F)(F)Br"),
    ("acetone", "CC(=O)C"),
    ("HFE-143a", "COC(F)(F)F"),
    ("SF5CF3", "FS(F)(F)(F)(F)C(F)(F)F"),
    ("sulfur hexafluoride", "FS(F)(F)(F)(F)F"),
    ("nitrogen trifluoride", "FN(F)F"),
    ("sulfuryl fluoride", "O=S(=O)(F)F"),
    ("trifluoroiodomethane", "FC(F)(F)I"),
    ("naphthalene", "c1ccc2ccccc2c1"),
    ("PFC-318", "FC1(F)C(F)(F)C(F)(F)C1(F)F"),
    ("methyl nitrite", "CON=O"),
    ("nitromethane", "C[N+](=O)[O-]"),
    ("propene", "C=CC"),
    ("trifluoroethanol", "OCC(F)(F)F"),
    ("furan", "c1ccoc1"),
    ("4-methylpyridine", "Cc1ccncc1"),
    ("tetramethylsilane", "C[Si](C)(C)C"),
    ("n-hexane", "CCCCCC"),
    ("methylcyclopropane", "CC1CC1"),
    ("HCFC-141b", "CC(F)(Cl)Cl"),
    ("nitrous oxide", "[N-]=[N+]=O"),
]

# descriptors whose definition here is not the toolkit's named function
DIVERGENCES = {
    "NumRotatableBonds": "non-strict rotor pattern [!$(*#*)&!D1]-&!@[!$(*#*)&!D1]",
    "BCUT2D_CHGHI/CHGLO": "formal charge on the Burden diagonal instead of Gasteiger charges",
    "fr_halogen": "C-X bond count via [#6]~[F,Cl,Br,I] instead of halogen atom count",
    "fr_allylic_oxid": "simplified [CX4;!H0;$([CX4]-C=C)], no steroid exclusion",
    "fr_nitrite": "no toolkit counterpart; [OX2]-[NX2]=[OX1] matched with the toolkit SMARTS engine",
}


def _pattern_count(mol, smarts: str) -> int:
    return len(mol.GetSubstructMatches(Chem.MolFromSmarts(smarts)))


def reference(smiles: str) -> dict:
    mol = Chem.MolFromSmiles(smiles)
    calc = dict(Descriptors.descList)
    out: dict[str, float] = {}
    for name in DESCRIPTOR_NAMES:
        if name in calc:
            out[name] = float(calc[name](mol))
    out["NumRotatableBonds"] = float(
        rdMolDescriptors.CalcNumRotatableBonds(mol, rdMolDescriptors.NumRotatableBondsOptions.NonStrict)
    )
    out["NumHeterocycles"] = float(rdMolDescriptors.CalcNumHeterocycles(mol))
    contribs = rdMolDescriptors._CalcCrippenContribs(mol)
    props = {
        "MW": [a.GetMass() for a in mol.GetAtoms()],
        "CHG": [float(a.GetFormalCharge()) for a in mol.GetAtoms()],
        "LOGP": [c[0] for c in contribs],
        "MR": [c[1] for c in contribs],
    }
    low = {"MW": "MWLOW", "CHG": "CHGLO", "LOGP": "LOGPLOW", "MR": "MRLOW"}
    for key, vals in props.items():
        hi, lo = rdMolDescriptors.BCUT2D(mol, vals)
        out[f"BCUT2D_{key}HI"] = float(hi)
        out[f"BCUT2D_{low[key]}"] = float(lo)
    for name in ("fr_halogen", "fr_allylic_oxid", "fr_nitrite"):
        out[name] = float(_pattern_count(mol, FRAGMENT_PATTERNS[name]))
    missing = [n for n in DESCRIPTOR_NAMES if n not in out]
    if missing:
        raise SystemExit(f"no reference for {missing}")
    return {
        "smiles": smiles,
        "descriptors": {n: out[n] for n in DESCRIPTOR_NAMES},
        "crippen_logp": [c[0] for c in contribs],
        "crippen_mr": [c[1] for c in contribs],
        "mol_logp": Crippen.MolLogP(mol),
        "lipinski_nhoh": Lipinski.NHOHCount(mol),
    }


def main() -> None:
    doc = {
        "toolkit": f"RDKit {rdkit.__version__}",
        "generator": "tools/make_golden.py",
        "divergences": DIVERGENCES,
        "molecules": {name: reference(smi) for name, smi in FIXTURES},
    }
    path = ROOT / "tests" / "data" / "golden_descriptors.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n", encoding="utf-8")
    print(f"wrote {len(FIXTURES)} molecules to {path}")


if __name__ == "__main__":
    main()
