"""Masked-matrix and labeled-dataset containers with CSV ingestion/emission.

Conventions used throughout the package:

- a design matrix is (n_samples, n_features), row-major, float64;
- masked (censored) entries hold NaN in ``values`` and False in ``mask``;
- labels are always fully observed;
- CSV files are UTF-8, comma-delimited, ``\\n`` line endings, with a
  mandatory header row; reals are serialized in shortest round-trip
  decimal form and missing design cells as the literal token ``NA``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ParseError, ValidationError

MISSING_TOKEN = "NA"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CensoredMatrix:
    """A partially observed design: ``values`` with NaN wherever ``mask`` is False."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask)
        if values.ndim != 2:
            raise ValidationError(f"values must be 2-D, got shape {values.shape}")
        if mask.shape != values.shape:
            raise ValidationError(
                f"mask shape {mask.shape} does not match values shape {values.shape}"
            )
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValidationError("need at least one sample and one feature")
        if mask.dtype != np.bool_:
            if not np.isin(mask, (0, 1)).all():
                raise ValidationError("mask entries must be 0 or 1")
            mask = mask.astype(bool)
        if not np.isfinite(values[mask]).all():
            raise ValidationError("observed entries must be finite")
        if not np.isnan(values[~mask]).all():
            raise ValidationError("masked entries must be NaN")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "mask", _readonly(mask.copy()))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """A censored design together with its fully observed label vector."""

    design: CensoredMatrix
    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.float64)
        if labels.ndim != 1:
            raise ValidationError(f"labels must be 1-D, got shape {labels.shape}")
        if labels.shape[0] != self.design.n_samples:
            raise ValidationError(
                f"{labels.shape[0]} labels for {self.design.n_samples} samples"
            )
        if not np.isfinite(labels).all():
            raise ValidationError("labels must be finite")
        object.__setattr__(self, "labels", _readonly(labels))


def observed_fraction(m: CensoredMatrix) -> float:
    """Fraction of entries that are observed, in [0, 1]."""
    return float(m.mask.sum()) / m.mask.size


def _is_missing(cell: str) -> bool:
    return cell.strip() == "" or cell.strip().upper() == MISSING_TOKEN


def _parse_cell(cell: str, row_index: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"row {row_index}: non-numeric cell {cell!r}") from None


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file, expected a header row")
    return rows


def _parse_matrix(rows: list[list[str]], width: int, path) -> tuple[np.ndarray, np.ndarray]:
    n = len(rows) - 1
    if n < 1:
        raise ParseError(f"{path}: no data rows")
    values = np.full((n, width), np.nan)
    mask = np.zeros((n, width), dtype=bool)
    for k, row in enumerate(rows[1:], start=1):
        if len(row) != len(rows[0]):
            raise ParseError(f"row {k}: expected {len(rows[0])} cells, got {len(row)}")
        for i in range(width):
            if _is_missing(row[i]):
                continue
            values[k - 1, i] = _parse_cell(row[i], k)
            mask[k - 1, i] = True
    return values, mask


def load_dataset(path) -> LabeledDataset:
    """Read a design-plus-labels CSV whose final column is named ``y``."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 2 or header[-1] != "y":
        raise ParseError(f"{path}: header must name features then a final 'y' column")
    p = len(header) - 1
    values, mask = _parse_matrix(rows, p, path)
    labels = np.empty(len(rows) - 1)
    for k, row in enumerate(rows[1:], start=1):
        if _is_missing(row[-1]):
            raise ValidationError(f"row {k}: label column may not be missing")
        labels[k - 1] = _parse_cell(row[-1], k)
    return LabeledDataset(design=CensoredMatrix(values, mask), labels=labels)


def load_design(path) -> CensoredMatrix:
    """Read a design-only CSV (header row of feature names, NA for missing)."""
    rows = _read_rows(path)
    values, mask = _parse_matrix(rows, len(rows[0]), path)
    return CensoredMatrix(values, mask)


def load_labels(path) -> np.ndarray:
    """Read a single-column label CSV."""
    rows = _read_rows(path)
    if len(rows[0]) != 1:
        raise ParseError(f"{path}: label file must have exactly one column")
    out = np.empty(len(rows) - 1)
    for k, row in enumerate(rows[1:], start=1):
        if len(row) != 1:
            raise ParseError(f"row {k}: expected 1 cell, got {len(row)}")
        if _is_missing(row[0]):
            raise ValidationError(f"row {k}: label column may not be missing")
        out[k - 1] = _parse_cell(row[0], k)
    return out


def format_value(v) -> str:
    """Deterministic CSV cell formatting; floats use shortest round-trip form."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def default_feature_names(p: int) -> list[str]:
    return [f"x{i + 1}" for i in range(p)]


def save_design(m: CensoredMatrix, path, feature_names: Sequence[str] | None = None) -> None:
    """Write a censored design to CSV, emitting ``NA`` at masked positions."""
    names = list(feature_names) if feature_names is not None else default_feature_names(m.n_features)
    if len(names) != m.n_features:
        raise ValidationError(f"{len(names)} names for {m.n_features} features")
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for k in range(m.n_samples):
            cells = [
                format_value(m.values[k, i]) if m.mask[k, i] else MISSING_TOKEN
                for i in range(m.n_features)
            ]
            fh.write(",".join(cells) + "\n")


def save_dataset(ds: LabeledDataset, path, feature_names: Sequence[str] | None = None) -> None:
    """Write design and labels as one CSV with a trailing ``y`` column."""
    m = ds.design
    names = list(feature_names) if feature_names is not None else default_feature_names(m.n_features)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(names + ["y"]) + "\n")
        for k in range(m.n_samples):
            cells = [
                format_value(m.values[k, i]) if m.mask[k, i] else MISSING_TOKEN
                for i in range(m.n_features)
            ]
            cells.append(format_value(ds.labels[k]))
            fh.write(",".join(cells) + "\n")


def save_table(
    rows: Sequence[Mapping],
    path,
    fieldnames: Sequence[str] | None = None,
    header_comment: str | None = None,
) -> None:
    """Write records sharing one field schema as CSV, columns in schema order.

    The schema is ``fieldnames`` if given, else the first record's key order;
    an empty row list needs explicit ``fieldnames`` to emit a header-only file.
    """
    schema = list(fieldnames) if fieldnames is not None else None
    for r in rows:
        keys = list(r.keys())
        if schema is None:
            schema = keys
        elif keys != schema:
            raise ValidationError(
                f"record schema {keys} does not match table schema {schema}"
            )
    if schema is None:
        raise ValidationError("empty row list requires explicit fieldnames")
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        if header_comment is not None:
            fh.write(f"# {header_comment}\n")
        fh.write(",".join(schema) + "\n")
        for r in rows:
            fh.write(",".join(format_value(r[k]) for k in schema) + "\n")
