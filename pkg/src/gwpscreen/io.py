"""Dataset CSV ingestion, experiment configs and deterministic JSON artifacts."""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from gwpscreen.errors import ArtifactVersionError, GwpScreenError
from gwpscreen.molgraph import SmilesError, parse_smiles
from gwpscreen.tuner import EnsembleModel, SearchSpace

__all__ = [
    "CLASS_LABELS",
    "DatasetError",
    "ConfigError",
    "DatasetRecord",
    "ExperimentConfig",
    "read_dataset",
    "read_smiles_table",
    "load_config",
    "dumps",
    "write_json",
    "sha256_file",
    "load_ensemble",
    "save_ensemble",
]

CLASS_LABELS = frozenset({"HC", "CFC", "HCFC", "HFC", "HFO", "CC", "HCC"})


class DatasetError(GwpScreenError):
    """Unusable dataset file; ``problems`` lists ``(row number, message)``."""

    def __init__(self, message: str, problems: list[tuple[int, str]] | None = None) -> None:
        super().__init__(message)
        self.problems = problems or []


class ConfigError(GwpScreenError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    smiles: str
    gwp100: float
    class_label: str = ""


def _read_rows(path: str | Path, required: tuple[str, ...]) -> tuple[list[str], list[tuple[int, dict]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in required if c not in header]
        if missing:
            raise DatasetError(f"{path}: missing column(s) {', '.join(missing)}")
        reader.fieldnames = header
        # header is line 1; data rows are numbered from 2
        return header, [(n, row) for n, row in enumerate(reader, 2)]


def read_smiles_table(path: str | Path) -> list[tuple[int, str, str]]:
    """``(row number, id, smiles)`` from a CSV with ``id,smiles`` columns."""
    _, rows = _read_rows(path, ("id", "smiles"))
    return [(n, (r["id"] or "").strip(), (r["smiles"] or "").strip()) for n, r in rows]


def read_dataset(path: str | Path, validate_smiles: bool = True) -> list[DatasetRecord]:
    """Records from an ``id,smiles,gwp100[,class]`` CSV.

    Raises:
        DatasetError: duplicate ids, non-positive or unparseable targets,
            unknown class labels or unparseable SMILES, all rows listed.
    """
    header, rows = _read_rows(path, ("id", "smiles", "gwp100"))
    records: list[DatasetRecord] = []
    problems: list[tuple[int, str]] = []
    seen: set[str] = set()
    for n, row in rows:
        mid = (row["id"] or "").strip()
        smi = (row["smiles"] or "").strip()
        label = (row.get("class") or "").strip() if "class" in header else ""
        if not mid:
            problems.append((n, "empty id"))
            continue
        if mid in seen:
            problems.append((n, f"duplicate id {mid!r}"))
            continue
        seen.add(mid)
        try:
            y = float(row["gwp100"])
        except (TypeError, ValueError):
            problems.append((n, f"gwp100 {row['gwp100']!r} is not a number"))
            continue
        if not (math.isfinite(y) and y > 0):
            problems.append((n, f"gwp100 must be positive, got {y}"))
            continue
        if label and label not in CLASS_LABELS:
            problems.append((n, f"unknown class {label!r}"))
            continue
        if validate_smiles:
            try:
                parse_smiles(smi)
            except SmilesError as exc:
                problems.append((n, f"{type(exc).__name__}: {exc}"))
                continue
        records.append(DatasetRecord(mid, smi, y, label))
    if problems:
        raise DatasetError(f"{path}: {len(problems)} bad row(s)", problems)
    return records


# --------------------------------------------------------------------------
# experiment config


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a training run depends on; paths are absolute."""

    dataset: str
    output_dir: str
    budget: int = 10
    k: int = 3
    seed: int = 0
    pca_threshold: float = 0.99
    workers: int = 1
    ensemble_average_scale: str = "qt"
    search_space: SearchSpace = field(default_factory=SearchSpace)
    n_repeats: int = 30
    reference_rmse: float | None = None
    reference_r2: float | None = None
    reference_n_components: int | None = None

    def __post_init__(self) -> None:
        if self.budget < 1 or self.k < 1 or self.workers < 1 or self.n_repeats < 1:
            raise ConfigError("budget, k, workers and n_repeats must all be >= 1")
        if not 0.0 < self.pca_threshold <= 1.0:
            raise ConfigError(f"pca_threshold must lie in (0, 1], got {self.pca_threshold}")
        if self.ensemble_average_scale not in ("qt", "original"):
            raise ConfigError("ensemble_average_scale must be 'qt' or 'original'")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def with_overrides(self, **kw) -> ExperimentConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def fingerprint(self) -> dict:
        """The settings that determine the trained artifact (no output path)."""
        d = asdict(self)
        d.pop("output_dir")
        d.pop("workers")
        d["dataset"] = Path(self.dataset).name
        d["search_space"] = self.search_space.to_dict()
        return d

    def config_hash(self) -> str:
        return hashlib.sha256(dumps(self.fingerprint()).encode()).hexdigest()


def _pair(text: str) -> tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"expected 'low, high', got {text!r}")
    return int(parts[0]), int(parts[1])


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse an INI experiment config.

    ``[experiment]`` holds ``dataset``, ``output_dir``, ``budget``, ``k``,
    ``seed``, ``pca_threshold``, ``workers``, ``ensemble_average_scale`` and
    ``n_repeats``; ``[search_space]`` may override ``layers``, ``neurons``,
    ``batch`` and ``epochs`` (each ``low, high``), ``activations`` (comma
    list) and ``learning_rate``; ``[reference]`` may give ``rmse``, ``r2`` and
    ``n_components`` to print beside measured test metrics.  Relative paths resolve
    against the config file's directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not parser.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    ex = parser["experiment"]
    base = path.resolve().parent
    try:
        space_kw: dict = {}
        if parser.has_section("search_space"):
            ss = parser["search_space"]
            for key in ("layers", "neurons", "batch", "epochs"):
                if key in ss:
                    space_kw[key] = _pair(ss[key])
            if "activations" in ss:
                space_kw["activations"] = tuple(a.strip() for a in ss["activations"].split(",") if a.strip())
            if "learning_rate" in ss:
                space_kw["learning_rate"] = ss.getfloat("learning_rate")
        ref = parser["reference"] if parser.has_section("reference") else {}
        return ExperimentConfig(
            dataset=str((base / ex.get("dataset", "")).resolve()) if ex.get("dataset") else "",
            output_dir=str((base / ex.get("output_dir", "out")).resolve()),
            budget=ex.getint("budget", 10),
            k=ex.getint("k", 3),
            seed=ex.getint("seed", 0),
            pca_threshold=ex.getfloat("pca_threshold", 0.99),
            workers=ex.getint("workers", 1),
            ensemble_average_scale=ex.get("ensemble_average_scale", "qt").strip(),
            search_space=SearchSpace(**space_kw),
            n_repeats=ex.getint("n_repeats", 30),
            reference_rmse=float(ref["rmse"]) if "rmse" in ref else None,
            reference_r2=float(ref["r2"]) if "r2" in ref else None,
            reference_n_components=int(ref["n_components"]) if "n_components" in ref else None,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# JSON artifacts


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed layout, non-finite floats as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def save_ensemble(path: str | Path, ensemble: EnsembleModel) -> None:
    write_json(path, ensemble.to_dict())


def load_ensemble(path: str | Path) -> EnsembleModel:
    """Read an ensemble artifact.

    Raises:
        ArtifactVersionError: unreadable, malformed or of another schema version.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactVersionError(f"cannot read ensemble {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ArtifactVersionError(f"{path} is not an ensemble artifact")
    return EnsembleModel.from_dict(d)
