"""Named 2D descriptor vectors and feature matrices.

Example:
    >>> from gwpscreen.molgraph import parse_smiles
    >>> round(featurize(parse_smiles("C"))["MolWt"], 3)
    16.043
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gwpscreen.descriptors.bcut import bcut2d
from gwpscreen.descriptors.crippen import CrippenAssignment, crippen_assign
from gwpscreen.descriptors.fragments import FRAGMENT_PATTERNS, fragment_counts
from gwpscreen.descriptors.morgan import morgan_density
from gwpscreen.descriptors.surface import LOGP_BINS, MR_BINS, tpsa_contributions, vsa_bin
from gwpscreen.descriptors.topology import chi_indices, count_descriptors, ring_counts
from gwpscreen.errors import ArtifactVersionError, GwpScreenError
from gwpscreen.molgraph import MolecularGraph

__all__ = [
    "DESCRIPTOR_NAMES",
    "COUNT_DESCRIPTORS",
    "CrippenAssignment",
    "FeatureMatrix",
    "FeaturizationError",
    "crippen_assign",
    "featurize",
    "featurize_batch",
    "vsa_bin",
]

FEATURE_SCHEMA_VERSION = 1


class FeaturizationError(GwpScreenError):
    """A molecule in a batch failed; ``molecule_id`` names it."""

    def __init__(self, molecule_id: str, cause: Exception) -> None:
        super().__init__(f"molecule {molecule_id!r}: {cause}")
        self.molecule_id = molecule_id
        self.cause = cause


_CHI = ["Chi0", "Chi1"] + [f"Chi{k}{t}" for t in ("v", "n") for k in range(5)]
_BCUT = [
    "BCUT2D_MWHI", "BCUT2D_MWLOW", "BCUT2D_CHGHI", "BCUT2D_CHGLO",
    "BCUT2D_LOGPHI", "BCUT2D_LOGPLOW", "BCUT2D_MRHI", "BCUT2D_MRLOW",
]
_RINGS = [
    "RingCount", "NumAromaticRings", "NumAliphaticRings", "NumSaturatedRings", "NumHeterocycles",
    "NumAromaticCarbocycles", "NumAromaticHeterocycles", "NumAliphaticCarbocycles",
    "NumAliphaticHeterocycles", "NumSaturatedCarbocycles", "NumSaturatedHeterocycles",
]
_COUNTS = [
    "MolWt", "HeavyAtomMolWt", "ExactMolWt", "HeavyAtomCount", "NumValenceElectrons",
    "NumHeteroatoms", "NHOHCount", "NOCount", "NumRotatableBonds", "FractionCSP3",
]

DESCRIPTOR_NAMES: tuple[str, ...] = tuple(
    _COUNTS
    + _RINGS
    + ["MolLogP", "MolMR", "LabuteASA", "TPSA"]
    + _CHI
    + _BCUT
    + [f"SlogP_VSA{k}" for k in range(1, len(LOGP_BINS) + 2)]
    + [f"SMR_VSA{k}" for k in range(1, len(MR_BINS) + 2)]
    + list(FRAGMENT_PATTERNS)
    + [f"FpDensityMorgan{r}" for r in (1, 2, 3)]
)

COUNT_DESCRIPTORS: frozenset[str] = frozenset(
    ["HeavyAtomCount", "NumValenceElectrons", "NumHeteroatoms", "NHOHCount", "NOCount", "NumRotatableBonds"]
    + _RINGS
    + list(FRAGMENT_PATTERNS)
)


def featurize(graph: MolecularGraph) -> dict[str, float]:
    """Full descriptor vector for one molecule, keyed in ``DESCRIPTOR_NAMES`` order."""
    values: dict[str, float] = {}
    values.update(count_descriptors(graph))
    values.update(ring_counts(graph))
    crip = crippen_assign(graph)
    values["MolLogP"] = crip.total_logp
    values["MolMR"] = crip.total_mr
    values["LabuteASA"] = crip.total_asa
    values["TPSA"] = sum(tpsa_contributions(graph))
    values.update(chi_indices(graph))
    values.update(bcut2d(graph, crip.logp, crip.mr))
    for k, v in enumerate(vsa_bin(crip.logp, crip.asa, LOGP_BINS), 1):
        values[f"SlogP_VSA{k}"] = v
    for k, v in enumerate(vsa_bin(crip.mr, crip.asa, MR_BINS), 1):
        values[f"SMR_VSA{k}"] = v
    values.update(fragment_counts(graph))
    values.update(morgan_density(graph, 3))
    out = {name: float(values[name]) for name in DESCRIPTOR_NAMES}
    bad = [k for k, v in out.items() if not math.isfinite(v)]
    if bad:
        raise GwpScreenError(f"non-finite descriptors: {bad}")
    return out


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Descriptor columns by molecules.

    ``drop_list`` names the zero-variance columns; they stay in ``values``
    and are removed by the standardizer.
    """

    column_names: tuple[str, ...]
    ids: tuple[str, ...]
    values: np.ndarray
    drop_list: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.ids), len(self.column_names)):
            raise ValueError("values shape does not match ids x column_names")

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_names.index(name)]

    def row(self, molecule_id: str) -> dict[str, float]:
        r = self.values[self.ids.index(molecule_id)]
        return dict(zip(self.column_names, map(float, r)))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.csv_text())

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", *self.column_names])
        for mid, row in zip(self.ids, self.values):
            w.writerow([mid, *(repr(float(v)) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path: str | Path) -> FeatureMatrix:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if not header or header[0] != "id":
            raise ValueError("feature CSV must start with an 'id' column")
        values = np.array([[float(x) for x in r[1:]] for r in body], dtype=float).reshape(len(body), len(header) - 1)
        return cls.build(tuple(header[1:]), tuple(r[0] for r in body), values)

    @classmethod
    def build(cls, column_names: Sequence[str], ids: Sequence[str], values: np.ndarray) -> FeatureMatrix:
        """Construct and compute the zero-variance drop-list."""
        values = np.asarray(values, dtype=float)
        drop = tuple(
            name for j, name in enumerate(column_names) if values.shape[0] == 0 or np.all(values[:, j] == values[0, j])
        )
        return cls(tuple(column_names), tuple(ids), values, drop)

    def save(self, path: str | Path) -> None:
        """Versioned binary artifact (``.npz``) embedding names, ids and drop-list."""
        meta = json.dumps(
            {
                "schema_version": FEATURE_SCHEMA_VERSION,
                "column_names": list(self.column_names),
                "ids": list(self.ids),
                "drop_list": list(self.drop_list),
            }
        )
        with open(path, "wb") as fh:
            np.savez(fh, values=self.values, meta=np.array(meta))

    @classmethod
    def load(cls, path: str | Path) -> FeatureMatrix:
        try:
            with np.load(path, allow_pickle=False) as data:
                meta = json.loads(str(data["meta"]))
                values = np.array(data["values"], dtype=float)
        except (OSError, KeyError, ValueError) as exc:
            raise ArtifactVersionError(f"unreadable feature artifact: {exc}") from exc
        if meta.get("schema_version") != FEATURE_SCHEMA_VERSION:
            raise ArtifactVersionError(f"unsupported feature schema {meta.get('schema_version')!r}")
        return cls(tuple(meta["column_names"]), tuple(meta["ids"]), values, tuple(meta["drop_list"]))


def _featurize_indexed(item: tuple[str, MolecularGraph]) -> list[float]:
    mid, graph = item
    try:
        return list(featurize(graph).values())
    except Exception as exc:  # re-raised with the molecule id attached
        raise FeaturizationError(mid, exc) from exc


def featurize_batch(
    graphs: Sequence[MolecularGraph],
    ids: Iterable[str] | None = None,
    workers: int = 1,
) -> FeatureMatrix:
    """Featurize molecules in input order.

    Raises:
        FeaturizationError: naming the first failing molecule id.
    """
    if len(graphs) < 2:
        raise ValueError("featurize_batch needs at least two molecules")
    ids = [str(i) for i in range(len(graphs))] if ids is None else [str(i) for i in ids]
    if len(ids) != len(graphs):
        raise ValueError("one id per molecule is required")
    items = list(zip(ids, graphs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_featurize_indexed, items, chunksize=8))
    else:
        rows = [_featurize_indexed(it) for it in items]
    return FeatureMatrix.build(DESCRIPTOR_NAMES, ids, np.array(rows, dtype=float))
