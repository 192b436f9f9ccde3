"""Assemble data/ar6_gwp100.csv from the openclimatedata GWP table.

Usage:
    pip download globalwarmingpotentials==0.13.2 --no-deps -d /tmp/gwp
    python3 -m zipfile -e /tmp/gwp/globalwarmingpotentials-0.13.2-py3-none-any.whl /tmp/gwp/x
    python3 tools/build_ar6_dataset.py /tmp/gwp/x/globalwarmingpotentials/globalwarmingpotentials.csv

The source table (CC0) gives species names and AR6 100-year GWPs; the
structures below are assigned by hand from the species names.  Species
without an AR6 value are skipped, and species that resolve to the same
molecular graph keep their first row.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

from gwpscreen.molgraph import graph_hash, parse_smiles

SMILES = {
    "CH4": "C",
    "N2O": "[N-]=[N+]=O",
    "CFC11": "FC(Cl)(Cl)Cl",
    "CFC12": "FC(F)(Cl)Cl",
    "CFC13": "FC(F)(F)Cl",
    "CFC113": "FC(Cl)(Cl)C(F)(F)Cl",
    "CFC114": "FC(F)(Cl)C(F)(F)Cl",
    "CFC115": "FC(F)(F)C(F)(F)Cl",
    "Halon1301": "FC(F)(F)Br",
    "Halon1211": "FC(F)(Cl)Br",
    "Halon2402": "FC(F)(Br)C(F)(F)Br",
    "Halon1202": "FC(F)(Br)Br",
    "CCl4": "ClC(Cl)(Cl)Cl",
    "CH3Br": "CBr",
    "CH2Br2": "BrCBr",
    "CHBrF2": "FC(F)Br",
    "CH3CCl3": "CC(Cl)(Cl)Cl",
    "HCFC21": "FC(Cl)Cl",
    "HCFC22": "FC(F)Cl",
    "HCFC123": "FC(F)(F)C(Cl)Cl",
    "HCFC124": "FC(Cl)C(F)(F)F",
    "HCFC141b": "CC(F)(Cl)Cl",
    "HCFC142b": "CC(F)(F)Cl",
    "HCFC225ca": "FC(F)(F)C(F)(F)C(Cl)Cl",
    "HCFC225cb": "FC(Cl)C(F)(F)C(F)(F)Cl",
    "HFC23": "FC(F)F",
    "HFC32": "FCF",
    "HFC41": "CF",
    "HFC125": "FC(F)C(F)(F)F",
    "HFC134": "FC(F)C(F)F",
    "HFC134a": "FCC(F)(F)F",
    "HFC143": "FCC(F)F",
    "HFC143a": "CC(F)(F)F",
    "HFC152": "FCCF",
    "HFC152a": "CC(F)F",
    "HFC161": "CCF",
    "HFC227ea": "FC(F)(F)C(F)C(F)(F)F",
    "HFC236cb": "FCC(F)(F)C(F)(F)F",
    "HFC236ea": "FC(F)C(F)C(F)(F)F",
    "HFC236fa": "FC(F)(F)CC(F)(F)F",
    "HFC245ca": "FCC(F)(F)C(F)F",
    "HFC245fa": "FC(F)CC(F)(F)F",
    "HFC365mfc": "CC(F)(F)CC(F)(F)F",
    "HFC4310mee": "FC(F)(F)C(F)C(F)C(F)(F)C(F)(F)F",
    "SO2F2": "O=S(=O)(F)F",
    "SF6": "FS(F)(F)(F)(F)F",
    "NF3": "FN(F)F",
    "CF4": "FC(F)(F)F",
    "C2F6": "FC(F)(F)C(F)(F)F",
    "C3F8": "FC(F)(F)C(F)(F)C(F)(F)F",
    "cC4F8": "FC1(F)C(F)(F)C(F)(F)C1(F)F",
    "C4F10": "FC(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "C5F12": "FC(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "C6F14": "FC(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "C7F16": "FC(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "C8F18": "FC(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "C10F18": "FC1(F)C(F)(F)C(F)(F)C2(F)C(F)(F)C(F)(F)C(F)(F)C(F)(F)C2(F)C1(F)F",
    "SF5CF3": "FC(F)(F)S(F)(F)(F)(F)F",
    "cC3F6": "FC1(F)C(F)(F)C1(F)F",
    "HFE125": "FC(F)OC(F)(F)F",
    "HFE134": "FC(F)OC(F)F",
    "HFE143a": "COC(F)(F)F",
    "HCFE235da2": "FC(F)OC(Cl)C(F)(F)F",
    "HFE245cb2": "COC(F)(F)C(F)(F)F",
    "HFE245fa2": "FC(F)OCC(F)(F)F",
    "HFE254cb2": "COC(F)(F)C(F)F",
    "HFE347mcc3": "COC(F)(F)C(F)(F)C(F)(F)F",
    "HFE347pcf2": "FC(F)C(F)(F)OCC(F)(F)F",
    "HFE356pcc3": "COC(F)(F)C(F)(F)C(F)F",
    "HFE569sf2": "CCOC(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "HFE4310pccc124": "FC(F)OC(F)(F)OC(F)(F)C(F)(F)OC(F)F",
    "HFE236ca12": "FC(F)OC(F)(F)OC(F)F",
    "HFE338pcc13": "FC(F)OC(F)(F)C(F)(F)OC(F)F",
    "HFE227ea": "FC(F)(F)C(F)OC(F)(F)F",
    "HFE236ea2": "FC(F)OC(F)C(F)(F)F",
    "HFE236fa": "FC(F)(F)COC(F)(F)F",
    "HFE245fa1": "FC(F)COC(F)(F)F",
    "HFE263fb2": "COCC(F)(F)F",
    "HFE329mcc2": "FC(F)C(F)(F)OC(F)(F)C(F)(F)F",
    "HFE338mcf2": "FC(F)(F)COC(F)(F)C(F)(F)F",
    "HFE347mcf2": "FC(F)COC(F)(F)C(F)(F)F",
    "HFE356mec3": "COC(F)(F)C(F)C(F)(F)F",
    "HFE356pcf2": "FC(F)COC(F)(F)C(F)F",
    "HFE356pcf3": "FC(F)OCC(F)(F)C(F)F",
    "HFE365mcf3": "COCC(F)(F)C(F)(F)F",
    "HFE374pc2": "CCOC(F)(F)C(F)F",
    "HFE7100": "COC(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
    "PFPMIE": "FC(F)(F)OC(F)(C(F)(F)F)C(F)(F)OC(F)(F)OC(F)(F)F",
    "CHCl3": "ClC(Cl)Cl",
    "CH2Cl2": "ClCCl",
    "CH3Cl": "CCl",
    "Halon1201": "FC(F)Br",
    "CH3OCH3": "COC",
    "CF3I": "FC(F)(F)I",
}


def class_label(graph) -> str:
    """Composition class from the seven-way scheme; blank when none fits."""
    elements = {a.element for a in graph.atoms}
    has_h = any(graph.total_h(i) for i in range(len(graph.atoms)))
    unsaturated = any(b.order.valence > 1 for b in graph.bonds)
    other = elements - {"C", "F", "Cl"}
    if other or "C" not in elements:
        return ""
    if elements == {"C"}:
        return "HC" if has_h else ""
    if elements == {"C", "Cl"}:
        return "HCC" if has_h else "CC"
    if elements == {"C", "F", "Cl"}:
        return "HCFC" if has_h else "CFC"
    if elements == {"C", "F"} and has_h:
        return "HFO" if unsaturated else "HFC"
    return ""


def main(source: str, dest: str = "data/ar6_gwp100.csv") -> None:
    with open(source, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    seen: dict[int, str] = {}
    out = []
    skipped = []
    for row in rows:
        name = row["Species"].strip()
        value = (row.get("AR6GWP100") or "").strip()
        if not value:
            skipped.append((name, "no AR6 GWP100"))
            continue
        if name not in SMILES:
            skipped.append((name, "no structure assigned"))
            continue
        graph = parse_smiles(SMILES[name])
        h = graph_hash(graph)
        if h in seen:
            skipped.append((name, f"same structure as {seen[h]}"))
            continue
        seen[h] = name
        out.append((name, SMILES[name], value, class_label(graph)))
    Path(dest).parent.mkdir(parents=True, exist_ok=True)
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "smiles", "gwp100", "class"])
        w.writerows(out)
    print(f"wrote {len(out)} compounds to {dest}")
    for name, why in skipped:
        print(f"  skipped {name}: {why}")


if __name__ == "__main__":
    main(*sys.argv[1:])
