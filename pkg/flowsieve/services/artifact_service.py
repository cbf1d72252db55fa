"""
Artifact service: reading and writing every file flowsieve produces.

Datasets are numpy ``.npz`` containers with a JSON header; everything else
is canonical JSON (sorted keys) carrying ``schema_version`` and the hash of
the configuration that produced it.
"""
import hashlib
import json
import logging
import os
import zipfile
from pathlib import Path
from typing import Any, Dict, Optional, Type

import numpy as np

from flowsieve.config import (
    ARTIFACT_NAMES,
    DATASET_FILE_SUFFIX,
    DATASET_FORMAT,
    DATASET_FORMAT_VERSION,
    SCHEMA_VERSION,
    TEXT_HASH_LINES,
)
from flowsieve.errors import ConfigError, DataError, FlowSieveError
from flowsieve.models.classifier import ClassifierModel, model_from_dict
from flowsieve.models.dataset import Dataset
from flowsieve.models.evaluation import EvalReport
from flowsieve.models.importance import ImportanceReport
from flowsieve.models.scaler import ScalerParams
from flowsieve.models.selection import SelectionTrace

logger = logging.getLogger(__name__)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a resolved configuration."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def write_json(path: Path, payload: Dict[str, Any], config_digest: Optional[str] = None) -> Path:
    """
    Write ``payload`` as indented JSON with sorted keys.

    ``schema_version`` is always set; ``config_hash`` when a digest is given.
    """
    document = dict(payload)
    document["schema_version"] = SCHEMA_VERSION
    if config_digest is not None:
        document["config_hash"] = config_digest
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: Path, error: Type[FlowSieveError] = DataError) -> Dict[str, Any]:
    """
    Read a JSON object from ``path``.

    Raises:
        FlowSieveError: ``error`` when the file is missing, unreadable or not a JSON object
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise error(f"{path}: file not found")
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise error(f"{path}: unreadable JSON ({str(e)})")
    if not isinstance(document, dict):
        raise error(f"{path}: expected a JSON object")
    version = document.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise error(f"{path}: schema_version {version} is not supported (expected {SCHEMA_VERSION})")
    return document


def save_dataset(d: Dataset, path: Path, config_digest: Optional[str] = None) -> Path:
    """
    Write ``d`` to an ``.npz`` container.

    The header records names, shape and scaling, plus ``config_hash`` when a
    digest is given.
    """
    path = Path(path)
    if path.suffix != DATASET_FILE_SUFFIX:
        raise ConfigError(f"dataset files must end in {DATASET_FILE_SUFFIX}: {path}")
    header = {"format": DATASET_FORMAT, "version": DATASET_FORMAT_VERSION, **d.header()}
    if config_digest is not None:
        header["config_hash"] = config_digest
    arrays = {"header": np.array(canonical_json(header)), "X": np.ascontiguousarray(d.X)}
    if d.y is not None:
        arrays["y"] = np.ascontiguousarray(d.y)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    logger.info(f"Saved dataset {path} ({d.n_rows} rows x {d.n_features} features)")
    return path


def _read_container(path: Path, with_arrays: bool):
    if not path.exists():
        raise DataError(f"{path}: file not found")
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"][()]))
            if not with_arrays:
                return header, None, None
            X = data["X"]
            y = data["y"] if "y" in data.files else None
    except (OSError, ValueError, KeyError, zipfile.BadZipFile, json.JSONDecodeError) as e:
        raise DataError(f"{path}: not a flowsieve dataset ({str(e)})")
    return header, X, y


def read_dataset_header(path: Path) -> Dict[str, Any]:
    """Header of a dataset container, without loading its arrays."""
    return _read_container(Path(path), with_arrays=False)[0]


def load_dataset(path: Path) -> Dataset:
    """
    Read a dataset container written by ``save_dataset``.

    Raises:
        DataError: Missing file, foreign format or inconsistent header
    """
    path = Path(path)
    header, X, y = _read_container(path, with_arrays=True)
    if header.get("format") != DATASET_FORMAT or header.get("version") != DATASET_FORMAT_VERSION:
        raise DataError(f"{path}: unsupported dataset format {header.get('format')!r} v{header.get('version')}")
    if X.shape != (header["n_rows"], header["n_features"]):
        raise DataError(f"{path}: header says {header['n_rows']}x{header['n_features']}, matrix is {X.shape}")
    if header["has_labels"] != (y is not None):
        raise DataError(f"{path}: header label flag does not match the stored arrays")
    return Dataset(
        feature_names=tuple(header["feature_names"]),
        X=X,
        y=y,
        scaled_with=header.get("scaled_with"),
    )


def load_model(path: Path) -> ClassifierModel:
    return model_from_dict(read_json(path))


def load_scaler(path: Path) -> ScalerParams:
    return ScalerParams.from_dict(read_json(path))


def load_trace(path: Path) -> SelectionTrace:
    return SelectionTrace.from_dict(read_json(path))


def load_eval_report(path: Path) -> EvalReport:
    return EvalReport.from_dict(read_json(path))


def load_importance(path: Path) -> ImportanceReport:
    return ImportanceReport.from_dict(read_json(path))


class ArtifactStore:
    """Named artifacts of one pipeline run, stamped with the run's config hash."""

    def __init__(self, directory: Path, config_digest: Optional[str] = None):
        """
        Initialize the store.

        Args:
            directory: Run output directory, created if missing
            config_digest: Hash embedded in every artifact the store writes
        """
        self.directory = Path(directory)
        self.config_digest = config_digest
        os.makedirs(self.directory, exist_ok=True)

    def path(self, name: str) -> Path:
        if name not in ARTIFACT_NAMES:
            raise ConfigError(f"unknown artifact {name!r}")
        return self.directory / ARTIFACT_NAMES[name]

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def write(self, name: str, payload: Dict[str, Any]) -> Path:
        return write_json(self.path(name), payload, self.config_digest)

    def write_text(self, name: str, text: str) -> Path:
        """Write a text artifact; a first line carries the config hash when the store has one."""
        path = self.path(name)
        if self.config_digest is not None:
            text = TEXT_HASH_LINES[path.suffix].format(self.config_digest) + "\n" + text
        path.write_text(text, encoding="utf-8")
        return path

    def read(self, name: str) -> Dict[str, Any]:
        return read_json(self.path(name))

    def save_dataset(self, d: Dataset) -> Path:
        return save_dataset(d, self.path("dataset"), self.config_digest)

    def load_run(self) -> Dict[str, Any]:
        """
        Everything present in the run directory, parsed.

        Returns:
            Dict[str, Any]: Artifact name -> model object (or dict for untyped JSON); absent artifacts are skipped
        """
        loaders = {
            "trace": SelectionTrace.from_dict,
            "eval_report": EvalReport.from_dict,
            "importance": ImportanceReport.from_dict,
            "scaler": ScalerParams.from_dict,
            "model": model_from_dict,
        }
        run: Dict[str, Any] = {}
        for name, filename in ARTIFACT_NAMES.items():
            path = self.directory / filename
            if not path.exists() or not filename.endswith(".json"):
                continue
            try:
                document = read_json(path)
                run[name] = loaders[name](document) if name in loaders else document
            except (FlowSieveError, KeyError, TypeError) as e:
                logger.error(f"Could not load artifact {path}: {str(e)}", exc_info=True)
        return run


def artifact_config_hash(path: Path) -> Optional[str]:
    """
    Config hash embedded in any artifact file, or None when it carries none.

    JSON files keep it under ``config_hash``, datasets in their header, and
    text files on their first line.
    """
    path = Path(path)
    if path.suffix == DATASET_FILE_SUFFIX:
        return read_dataset_header(path).get("config_hash")
    if path.suffix in TEXT_HASH_LINES:
        if not path.exists():
            raise DataError(f"{path}: file not found")
        first = path.read_text(encoding="utf-8").split("\n", 1)[0]
        prefix, suffix = TEXT_HASH_LINES[path.suffix].split("{}")
        if first.startswith(prefix) and first.endswith(suffix):
            return first[len(prefix):len(first) - len(suffix)]
        return None
    return read_json(path).get("config_hash")
