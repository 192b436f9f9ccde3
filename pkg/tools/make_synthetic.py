"""Write the synthetic halocarbon dataset used for desk-scale runs.

Usage: python3 tools/make_synthetic.py [n] [seed] [dest]
"""

import csv
import sys

from gwpscreen.synthetic import halocarbon_dataset


def main(n: str = "300", seed: str = "1", dest: str = "data/synthetic_halocarbons.csv") -> None:
    records = halocarbon_dataset(int(n), int(seed))
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "smiles", "gwp100"])
        for r in records:
            w.writerow([r.id, r.smiles, repr(r.gwp100)])
    print(f"wrote {len(records)} molecules to {dest}")


if __name__ == "__main__":
    main(*sys.argv[1:])
