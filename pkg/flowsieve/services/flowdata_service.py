"""
Flow CSV ingestion: load, clean, drop identifier columns and binarize labels.

Loading checks the record structure of each file, then streams it twice in
bounded chunks: the first pass infers column types, the second materializes
the columns.
"""
import csv
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from flowsieve.config import (
    CSV_CHUNK_ROWS,
    CUSTOM_PROFILE,
    DATASET_PROFILES,
    INFINITY_TOKENS,
    MISSING_TOKENS,
)
from flowsieve.errors import ConfigError, DataError
from flowsieve.models.dataset import Dataset, LabelRule, LoadReport, RawTable

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_header(path: Path) -> List[str]:
    """Read the raw header fields of a CSV file."""
    try:
        header = pd.read_csv(path, header=None, nrows=1, dtype=str, na_filter=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise DataError(f"{path}: empty file") from e
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: unreadable: {e}") from e
    return [str(v) for v in header.iloc[0].tolist()]


def _dedupe_header(raw: Sequence[str]) -> Tuple[List[str], Dict[str, str]]:
    """
    Trim header names and make them unique.

    Later duplicates get a ``.k`` suffix (k = 1, 2, ...) that does not clash
    with any other name.

    Returns:
        Tuple of the final names and a {new name: original name} map of renames
    """
    trimmed = [name.strip() for name in raw]
    taken = set()
    names: List[str] = []
    renamed: Dict[str, str] = {}
    for original, name in zip(raw, trimmed):
        candidate = name
        k = 0
        while candidate in taken or (k > 0 and candidate in trimmed):
            k += 1
            candidate = f"{name}.{k}"
        if k:
            renamed[candidate] = original
        taken.add(candidate)
        names.append(candidate)
    return names, renamed


def _validate_structure(path: Path, n_fields: int) -> None:
    """
    Check that every record has the header's field count.

    pandas pads short records with empty cells, which cannot be told apart
    from genuinely empty trailing cells, so the check runs on the raw records.

    Raises:
        DataError: Naming the line of the first ragged record
    """
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            next(reader, None)
            for record in reader:
                if not record:
                    continue
                if len(record) != n_fields:
                    raise DataError(
                        f"{path}: ragged row at line {reader.line_num}: "
                        f"expected {n_fields} fields, saw {len(record)}"
                    )
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise DataError(f"{path}: unreadable: {e}") from e


def _iter_chunks(path: Path, names: List[str], chunk_rows: int) -> Iterator[pd.DataFrame]:
    """Stream the data rows of a structurally valid CSV as string-typed chunks."""
    try:
        reader = pd.read_csv(
            path,
            header=0,
            dtype=str,
            na_filter=False,
            index_col=False,
            chunksize=chunk_rows,
            encoding="utf-8",
        )
        for chunk in reader:
            chunk.columns = names
            yield chunk
    except pd.errors.ParserError as e:
        raise DataError(f"{path}: ragged row: {e}") from e
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: unreadable: {e}") from e


def _parse_numeric(values: pd.Series) -> Optional[np.ndarray]:
    """
    Parse a string column as float64.

    Missing tokens become NaN and infinity spellings become ±inf.

    Returns:
        Optional[np.ndarray]: Parsed values, or None if any other cell is not a number
    """
    text = values.str.strip()
    missing = text.isin(MISSING_TOKENS)
    infinite = text.map(INFINITY_TOKENS)
    candidates = text.mask(missing | infinite.notna())
    parsed = pd.to_numeric(candidates, errors="coerce")
    if (parsed.isna() & candidates.notna()).any():
        return None
    return parsed.fillna(infinite).to_numpy(dtype=np.float64)


def load_csv(path: PathLike, schema: Optional[Dict[str, str]] = None, chunk_rows: int = CSV_CHUNK_ROWS) -> RawTable:
    """
    Load a flow CSV into a RawTable.

    Args:
        path: CSV file with a header row
        schema: Optional {column: "numeric" | "text"} overrides of type inference
        chunk_rows: Rows held in memory per parsing chunk

    Returns:
        RawTable: One column per header name; the report records header renames

    Raises:
        DataError: Unreadable or empty file, ragged row, or a forced-numeric column that does not parse
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    schema = dict(schema or {})
    bad_kinds = {k: v for k, v in schema.items() if v not in ("numeric", "text")}
    if bad_kinds:
        raise ConfigError(f"schema kinds must be 'numeric' or 'text': {bad_kinds}")

    names, renamed = _dedupe_header(_read_header(path))
    report = LoadReport(renamed_columns=renamed)
    for new_name, original in renamed.items():
        report = report.with_warning(f"duplicate header {original.strip()!r} renamed to {new_name!r}")
    unknown = sorted(set(schema) - set(names))
    if unknown:
        report = report.with_warning(f"schema names absent from header: {unknown}")

    _validate_structure(path, len(names))

    # Pass 1: type inference
    text_columns = {n for n in names if schema.get(n) == "text"}
    to_infer = [n for n in names if n not in schema]
    rows = 0
    for chunk in _iter_chunks(path, names, chunk_rows):
        for name in to_infer:
            if name not in text_columns and _parse_numeric(chunk[name]) is None:
                text_columns.add(name)
        rows += len(chunk)

    # Pass 2: materialization
    parts: Dict[str, List[np.ndarray]] = {n: [] for n in names}
    for chunk in _iter_chunks(path, names, chunk_rows):
        for name in names:
            if name in text_columns:
                parts[name].append(chunk[name].to_numpy(dtype=object))
                continue
            parsed = _parse_numeric(chunk[name])
            if parsed is None:
                raise DataError(f"{path}: column {name!r} is declared numeric but holds text")
            parts[name].append(parsed)

    columns = {}
    for name in names:
        if name in text_columns:
            columns[name] = pd.Series(np.concatenate(parts[name]) if parts[name] else np.array([], dtype=object), dtype=object)
        else:
            columns[name] = pd.Series(np.concatenate(parts[name]) if parts[name] else np.array([], dtype=np.float64), dtype=np.float64)
    frame = pd.DataFrame(columns, columns=names)

    logger.info(f"Loaded {rows} rows x {len(names)} columns from {path} ({len(text_columns)} text columns)")
    return RawTable(frame=frame, report=replace(report, rows_in=rows))


def _format_cell(value: float) -> str:
    return "" if np.isnan(value) else repr(float(value))


def load_csvs(paths: Sequence[PathLike], schema: Optional[Dict[str, str]] = None, chunk_rows: int = CSV_CHUNK_ROWS) -> RawTable:
    """
    Load several CSVs of one capture and concatenate them in argument order.

    Raises:
        DataError: No paths given, or headers that disagree after trimming
    """
    if not paths:
        raise DataError("no input files")
    tables = [load_csv(p, schema=schema, chunk_rows=chunk_rows) for p in paths]
    first = tables[0]
    for path, table in zip(paths[1:], tables[1:]):
        if table.column_names != first.column_names:
            raise DataError(f"{path}: header differs from {paths[0]}")
    if len(tables) == 1:
        return first

    # A column that is text in any file is text in the concatenation
    text_anywhere = {n for t in tables for n in t.text_columns}
    frames = []
    for table in tables:
        frame = table.frame
        for name in text_anywhere & set(table.numeric_columns):
            frame = frame.assign(**{name: frame[name].map(_format_cell).astype(object)})
        frames.append(frame)
    frame = pd.concat(frames, ignore_index=True)

    report = LoadReport(
        rows_in=sum(t.row_count for t in tables),
        warnings=tuple(w for t in tables for w in t.report.warnings),
        renamed_columns=dict(first.report.renamed_columns),
    )
    return RawTable(frame=frame, report=report)


def write_csv(t: RawTable, path: PathLike) -> None:
    """Serialize a RawTable back to CSV (missing cells empty, floats in shortest round-trip form)."""
    t.frame.to_csv(path, index=False, na_rep="")


def clean(t: RawTable) -> RawTable:
    """
    Keep exactly the rows whose numeric cells are all finite and present.

    Returns:
        RawTable: Same columns, invalid rows removed, report updated with the drop count
    """
    numeric = t.numeric_columns
    if not numeric or t.row_count == 0:
        return t
    keep = np.isfinite(t.frame[numeric].to_numpy(dtype=np.float64)).all(axis=1)
    dropped = int((~keep).sum())
    logger.info(f"Removed {dropped} of {t.row_count} rows with NaN or infinite cells")
    if dropped == 0:
        return t
    frame = t.frame.loc[keep].reset_index(drop=True)
    return RawTable(frame=frame, report=t.report.with_dropped(dropped))


def drop_columns(t: RawTable, names: Sequence[str]) -> RawTable:
    """
    Remove the listed columns; absent names become warnings.

    Raises:
        DataError: If no column would remain
    """
    present = [n for n in names if n in t.frame.columns]
    report = t.report
    for name in names:
        if name not in t.frame.columns:
            logger.warning(f"Column {name!r} not present, nothing to drop")
            report = report.with_warning(f"column {name!r} not present")
    if len(set(present)) == len(t.column_names):
        raise DataError("dropping every column leaves an empty table")
    frame = t.frame.drop(columns=present)
    return RawTable(frame=frame, report=report)


def _label_strings(t: RawTable, label_column: str) -> pd.Series:
    labels = t.frame[label_column]
    if t.is_numeric(label_column):
        return labels.map(lambda v: format(v, "g"))
    return labels.astype(str).str.strip()


def binarize_labels_with_report(t: RawTable, rule: LabelRule, label_column: str) -> Tuple[Dataset, LoadReport]:
    """
    Map the label column through ``rule`` and build the numeric Dataset.

    Returns:
        Tuple of the Dataset and the updated report (per-class counts filled in)

    Raises:
        DataError: Missing label column, remaining text feature columns,
            unknown labels under the "error" policy, or no row left in either class
    """
    if label_column not in t.frame.columns:
        raise DataError(f"label column {label_column!r} not found")
    features = [n for n in t.column_names if n != label_column]
    text_features = [n for n in features if not t.is_numeric(n)]
    if text_features:
        raise DataError(f"non-numeric feature columns remain, drop them first: {text_features}")

    labels = _label_strings(t, label_column)
    codes = {label: rule.classify(label) for label in labels.unique()}
    mapped = labels.map(codes)
    unknown = mapped.isna()
    report = t.report
    if unknown.any():
        unknown_labels = sorted(str(label) for label, code in codes.items() if code is None)
        if rule.unknown_policy == "error":
            raise DataError(f"labels match neither class: {unknown_labels}")
        count = int(unknown.sum())
        logger.warning(f"Dropping {count} rows with labels outside the rule: {unknown_labels}")
        report = report.with_dropped(count).with_warning(f"dropped {count} rows labelled {unknown_labels}")

    keep = ~unknown.to_numpy()
    y = mapped.to_numpy()[keep].astype(np.int8)
    if y.size == 0:
        raise DataError("both classes empty after label mapping")
    X = t.frame.loc[keep, features].to_numpy(dtype=np.float64)
    dataset = Dataset(feature_names=tuple(features), X=X, y=y)

    counts = dataset.class_counts()
    report = replace(report, per_class_counts=counts)
    if min(counts.values()) == 0:
        logger.warning(f"Single-class dataset {counts}; selection and training need both classes")
        report = report.with_warning(f"single-class dataset {counts}")
    logger.info(f"Binarized labels: {counts['benign']} benign, {counts['attack']} attack")
    return dataset, report


def binarize_labels(t: RawTable, rule: LabelRule, label_column: str) -> Dataset:
    """Map the label column through ``rule`` and build the numeric Dataset."""
    return binarize_labels_with_report(t, rule, label_column)[0]


def to_unlabeled(t: RawTable) -> Dataset:
    """Build a Dataset without labels from an all-numeric table."""
    text = t.text_columns
    if text:
        raise DataError(f"non-numeric feature columns remain, drop them first: {text}")
    return Dataset(feature_names=tuple(t.column_names), X=t.frame.to_numpy(dtype=np.float64))


def resolve_profile(profile: str, rules: Optional[Dict[str, Any]] = None) -> Tuple[LabelRule, str, List[str]]:
    """
    Resolve a dataset profile into its label rule, label column and drop list.

    Args:
        profile: "cic-ids2017", "cic-iot2023" or "custom"
        rules: Rule document; required for "custom", overrides the rule otherwise.
            May carry "label_column" and "drop_columns" keys as well.

    Raises:
        ConfigError: Unknown profile, or "custom" without rules
    """
    if profile == CUSTOM_PROFILE:
        if not rules:
            raise ConfigError("profile 'custom' needs a rules document")
        base: Dict[str, Any] = {"label_column": "Label", "drop_columns": [], "rule": {}}
    elif profile in DATASET_PROFILES:
        base = DATASET_PROFILES[profile]
    else:
        raise ConfigError(f"unknown profile {profile!r}")

    rules = dict(rules or {})
    label_column = rules.pop("label_column", base["label_column"])
    drop = list(rules.pop("drop_columns", base["drop_columns"]))
    rule = LabelRule.from_dict(rules if rules else base["rule"])
    return rule, label_column, drop


def ingest(
    paths: Sequence[PathLike],
    rule: Optional[LabelRule],
    label_column: Optional[str],
    drop: Sequence[str] = (),
    schema: Optional[Dict[str, str]] = None,
    chunk_rows: int = CSV_CHUNK_ROWS,
) -> Tuple[Dataset, LoadReport]:
    """
    Load, clean, drop identifier columns and binarize labels.

    With ``label_column`` None the result is an unlabeled Dataset.

    Returns:
        Tuple of the Dataset and the cleaning report
    """
    table = load_csvs(paths, schema=schema, chunk_rows=chunk_rows)
    table = clean(table)
    if drop:
        table = drop_columns(table, drop)
    if label_column is None:
        dataset = to_unlabeled(table)
        return dataset, table.report
    if rule is None:
        raise ConfigError("a label rule is required when a label column is given")
    return binarize_labels_with_report(table, rule, label_column)
