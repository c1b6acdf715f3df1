"""CSV ingestion and serialization for shift-share samples.

Three files describe a sample:

* outcomes: ``unit,Y[,X]`` with one row per unit,
* exposures: wide ``unit,<sector>,...`` or long ``unit,sector,weight``
  (auto-detected from the header),
* shocks: ``sector,g[,cluster]`` with one row per sector.

Unit order follows the outcomes file, sector order follows the shocks
file.  All parse errors name the file, line, and column.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .design import ShiftShareDesign
from .errors import DataValidationError


def _read_rows(path):
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            rows = [[c.strip() for c in row] for row in csv.reader(fh)]
    except OSError as exc:
        raise DataValidationError(f"{path}: cannot read file: {exc}") from exc
    rows = [r for r in rows if r and any(c != "" for c in r)]
    if len(rows) < 2:
        raise DataValidationError(f"{path}: need a header line and at least one data line")
    header = rows[0]
    width = len(header)
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataValidationError(
                f"{path}: line {k}: expected {width} fields, got {len(row)}"
            )
    return header, rows[1:]


def _parse_float(text, path, line, col):
    if text == "":
        raise DataValidationError(f"{path}: line {line}: missing value in column {col!r}")
    try:
        v = float(text)
    except ValueError:
        raise DataValidationError(
            f"{path}: line {line}: column {col!r}: not a number: {text!r}"
        ) from None
    if not np.isfinite(v):
        raise DataValidationError(
            f"{path}: line {line}: column {col!r}: non-finite value {text!r}"
        )
    return v


def _require_label(text, path, line, col):
    if text == "":
        raise DataValidationError(f"{path}: line {line}: missing value in column {col!r}")
    return text


def _load_outcomes(path):
    header, rows = _read_rows(path)
    names = [h.lower() for h in header]
    if names[:2] != ["unit", "y"] or names not in (["unit", "y"], ["unit", "y", "x"]):
        raise DataValidationError(
            f"{path}: header must be 'unit,Y' or 'unit,Y,X', got {','.join(header)!r}"
        )
    has_x = len(names) == 3
    units, Y, X = [], [], []
    seen = set()
    for k, row in enumerate(rows, start=2):
        u = _require_label(row[0], path, k, "unit")
        if u in seen:
            raise DataValidationError(f"{path}: line {k}: duplicate unit {u!r}")
        seen.add(u)
        units.append(u)
        Y.append(_parse_float(row[1], path, k, "Y"))
        if has_x:
            X.append(_parse_float(row[2], path, k, "X"))
    return units, np.array(Y), (np.array(X) if has_x else None)


def _load_shocks(path):
    header, rows = _read_rows(path)
    names = [h.lower() for h in header]
    if names not in (["sector", "g"], ["sector", "g", "cluster"]):
        raise DataValidationError(
            f"{path}: header must be 'sector,g' or 'sector,g,cluster', got {','.join(header)!r}"
        )
    has_cluster = len(names) == 3
    sectors, g, clusters = [], [], []
    seen = set()
    for k, row in enumerate(rows, start=2):
        s = _require_label(row[0], path, k, "sector")
        if s in seen:
            raise DataValidationError(f"{path}: line {k}: duplicate sector {s!r}")
        seen.add(s)
        sectors.append(s)
        g.append(_parse_float(row[1], path, k, "g"))
        if has_cluster:
            clusters.append(_require_label(row[2], path, k, "cluster"))
    cluster_ids = None
    if has_cluster:
        codes = {}
        cluster_ids = np.array([codes.setdefault(c, len(codes)) for c in clusters], dtype=np.int64)
    return sectors, np.array(g), cluster_ids


def _load_exposures(path, units, sectors):
    header, rows = _read_rows(path)
    names = [h.lower() for h in header]
    unit_pos = {u: i for i, u in enumerate(units)}
    sector_pos = {s: j for j, s in enumerate(sectors)}
    S = np.zeros((len(units), len(sectors)))
    if names == ["unit", "sector", "weight"]:
        filled = set()
        for k, row in enumerate(rows, start=2):
            u = _require_label(row[0], path, k, "unit")
            s = _require_label(row[1], path, k, "sector")
            if u not in unit_pos:
                raise DataValidationError(
                    f"{path}: line {k}: unit {u!r} not present in the outcomes file"
                )
            if s not in sector_pos:
                raise DataValidationError(
                    f"{path}: line {k}: sector {s!r} not present in the shocks file"
                )
            if (u, s) in filled:
                raise DataValidationError(f"{path}: line {k}: duplicate pair ({u!r}, {s!r})")
            filled.add((u, s))
            S[unit_pos[u], sector_pos[s]] = _parse_float(row[2], path, k, "weight")
        covered = {u for u, _ in filled}
    else:
        if names[0] != "unit":
            raise DataValidationError(
                f"{path}: first header field must be 'unit', got {header[0]!r}"
            )
        file_sectors = header[1:]
        missing = [s for s in sectors if s not in file_sectors]
        extra = [s for s in file_sectors if s not in sector_pos]
        if missing or extra:
            what = f"missing {missing[:3]!r}" if missing else f"unknown {extra[:3]!r}"
            raise DataValidationError(
                f"{path}: exposure sectors do not match the shocks file ({what})"
            )
        cols = [sector_pos[s] for s in file_sectors]
        covered = set()
        for k, row in enumerate(rows, start=2):
            u = _require_label(row[0], path, k, "unit")
            if u not in unit_pos:
                raise DataValidationError(
                    f"{path}: line {k}: unit {u!r} not present in the outcomes file"
                )
            if u in covered:
                raise DataValidationError(f"{path}: line {k}: duplicate unit {u!r}")
            covered.add(u)
            for col_name, j, text in zip(file_sectors, cols, row[1:]):
                S[unit_pos[u], j] = _parse_float(text, path, k, col_name)
    absent = [u for u in units if u not in covered]
    if absent:
        raise DataValidationError(
            f"{path}: no exposure row for unit {absent[0]!r}"
            + (f" (and {len(absent) - 1} more)" if len(absent) > 1 else "")
        )
    return S


def load_design(
    outcomes_path: str | os.PathLike,
    exposures_path: str | os.PathLike,
    shocks_path: str | os.PathLike,
    reduced_form: bool | None = None,
) -> ShiftShareDesign:
    """Assemble a validated design from the three CSV files.

    Parameters
    ----------
    outcomes_path, exposures_path, shocks_path : path-like
        See the module docstring for the expected layouts.
    reduced_form : bool, optional
        Force the reduced-form flag; by default it is auto-detected
        (no X column, or X equal to the instrument within tolerance).
    """
    units, Y, X = _load_outcomes(outcomes_path)
    sectors, g, cluster_ids = _load_shocks(shocks_path)
    S = _load_exposures(exposures_path, units, sectors)
    return ShiftShareDesign.from_arrays(
        Y,
        X,
        S,
        g,
        cluster_ids=cluster_ids,
        reduced_form=reduced_form,
        unit_labels=tuple(units),
        sector_labels=tuple(sectors),
    )


def save_design(
    design: ShiftShareDesign,
    outcomes_path: str | os.PathLike,
    exposures_path: str | os.PathLike,
    shocks_path: str | os.PathLike,
) -> None:
    """Write a design back to the three-file CSV layout.

    Floats are written with ``repr`` so that a load/save cycle
    round-trips exactly.  Exposures are written in the wide layout.
    """
    units = design.unit_labels or tuple(f"u{i + 1}" for i in range(design.N))
    sectors = design.sector_labels or tuple(f"s{j + 1}" for j in range(design.J))
    with open(outcomes_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        if design.reduced_form:
            w.writerow(["unit", "Y"])
            for u, y in zip(units, design.Y):
                w.writerow([u, repr(float(y))])
        else:
            w.writerow(["unit", "Y", "X"])
            for u, y, x in zip(units, design.Y, design.X):
                w.writerow([u, repr(float(y)), repr(float(x))])
    with open(exposures_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["unit"] + list(sectors))
        for u, row in zip(units, design.S):
            w.writerow([u] + [repr(float(v)) for v in row])
    with open(shocks_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        if design.cluster_ids is not None:
            w.writerow(["sector", "g", "cluster"])
            for s, gj, c in zip(sectors, design.g, design.cluster_ids):
                w.writerow([s, repr(float(gj)), f"c{int(c)}"])
        else:
            w.writerow(["sector", "g"])
            for s, gj in zip(sectors, design.g):
                w.writerow([s, repr(float(gj))])
