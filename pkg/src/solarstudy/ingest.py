"""Readers for station CSV files, study configuration files and monthly-mean
tables.

Station files are wide: ``date`` followed by any subset of ``G,T,H,E,D``.
Table files hold one row of twelve monthly values per series::

    table,series,jan,feb,...,dec
    10,G_MA,1390.4,...

Series names are ``G_MA``/``G_MF`` for irradiance and ``<P>_MA<S>`` /
``<P>_MF<S>`` for parameter ``P`` at station ``S``.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (BadValue, DuplicateDate, HumidityOutOfRange, IoFailure,
                     MalformedHeader, MalformedRow, MalformedTable, MissingKey,
                     NonNumericValue, UnknownKey)
from .timeseries import DailySeries, ParameterKind, Station

MAX_ORDER = 26
MONTH_COLUMNS = ("jan", "feb", "mar", "apr", "may", "jun",
                 "jul", "aug", "sep", "oct", "nov", "dec")


def _read_lines(path) -> list[str]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from None
    except UnicodeDecodeError:
        raise IoFailure(path, "not valid UTF-8") from None
    if text.startswith("﻿"):
        text = text[1:]
    return text.splitlines()


# -- station CSV ------------------------------------------------------------

def parse_station_csv(path, station: Station | None = None) -> dict[ParameterKind, DailySeries]:
    """Read a wide station file into one :class:`DailySeries` per column.

    Rows may appear in any order; they are sorted by date.  Empty cells are
    rejected (no imputation).  The G column, being station independent, is
    returned with ``station=None``.
    """
    lines = _read_lines(path)
    rows = list(csv.reader(lines))
    if not rows or not rows[0]:
        raise MalformedHeader(path, "empty file; expected header starting with 'date'", 1)
    header = [h.strip() for h in rows[0]]
    if header[0].lower() != "date":
        raise MalformedHeader(path, f"first column must be 'date', got {header[0]!r}", 1)
    kinds = []
    for tok in header[1:]:
        try:
            kind = ParameterKind(tok)
        except ValueError:
            raise MalformedHeader(path, f"unknown parameter column {tok!r} "
                                  "(expected G, T, H, E or D)", 1) from None
        if kind in kinds:
            raise MalformedHeader(path, f"duplicate column {tok!r}", 1)
        kinds.append(kind)
    if not kinds:
        raise MalformedHeader(path, "no parameter columns", 1)

    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(path, f"expected {len(header)} fields, got {len(row)}", lineno)
        try:
            day = date.fromisoformat(row[0].strip())
        except ValueError:
            raise MalformedRow(path, f"invalid ISO date {row[0]!r}", lineno) from None
        vals = []
        for kind, cell in zip(kinds, row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericValue(path, lineno, kind.value, cell) from None
            if not math.isfinite(v):
                raise NonNumericValue(path, lineno, kind.value, cell)
            if kind is ParameterKind.H and not 0.0 <= v <= 100.0:
                raise HumidityOutOfRange(path, f"relative humidity {v} outside [0, 100]", lineno)
            vals.append(v)
        records.append((day, lineno, vals))

    records.sort(key=lambda r: r[0])
    for a, b in zip(records, records[1:]):
        if a[0] == b[0]:
            first, second = sorted((a[1], b[1]))
            raise DuplicateDate(path, f"date {b[0].isoformat()} repeats line {first}", second)
    dates = [r[0] for r in records]
    out = {}
    for i, kind in enumerate(kinds):
        owner = None if kind is ParameterKind.G else station
        out[kind] = DailySeries(owner, kind, dates, [r[2][i] for r in records])
    return out


def write_station_csv(path, series: Mapping[ParameterKind, DailySeries]):
    """Write series sharing one date axis as a wide station file."""
    kinds = [k for k in ParameterKind if k in series]
    dates = series[kinds[0]].dates
    for k in kinds:
        if series[k].dates != dates:
            raise ValueError("all series must share the same dates")
    cols = [series[k].values.tolist() for k in kinds]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(["date"] + [k.value for k in kinds]) + "\n")
            for i, d in enumerate(dates):
                fh.write(d.isoformat() + "," + ",".join(repr(c[i]) for c in cols) + "\n")
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from None


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class StationInput:
    station: Station
    path: Path


@dataclass(frozen=True)
class StudyConfig:
    """Everything a study run needs.

    ``parameters`` optionally restricts the parameters modelled per station id;
    by default every column found in the station file is used.
    """

    stations: tuple[StationInput, ...]
    train_boundary: date
    p_max: int = 5
    q_max: int = 5
    enforce_invertibility: bool = True
    output_dir: Path = Path("output")
    seed: int = 0
    parameters: Mapping[str, tuple[ParameterKind, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        for name in ("p_max", "q_max"):
            v = getattr(self, name)
            if not 0 <= v <= MAX_ORDER:
                raise ValueError(f"{name} must lie in [0, {MAX_ORDER}], got {v}")
        ids = [s.station.id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ValueError("station ids must be unique")


_STATION_KEY = re.compile(r"^station\.([A-Za-z0-9_-]+)\.(file|name|coastal|latitude|longitude)$")
_GLOBAL_KEYS = {"train_boundary", "p_max", "q_max", "enforce_invertibility", "seed", "output_dir"}
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_bool(path, lineno, key, text):
    t = text.lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise BadValue(path, f"{key}: expected true/false, got {text!r}", lineno)


def _parse_int(path, lineno, key, text, lo=None, hi=None):
    try:
        v = int(text)
    except ValueError:
        raise BadValue(path, f"{key}: expected an integer, got {text!r}", lineno) from None
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise BadValue(path, f"{key}: {v} outside [{lo}, {hi}]", lineno)
    return v


def _parse_float(path, lineno, key, text):
    try:
        v = float(text)
    except ValueError:
        raise BadValue(path, f"{key}: expected a number, got {text!r}", lineno) from None
    if not math.isfinite(v):
        raise BadValue(path, f"{key}: expected a finite number, got {text!r}", lineno)
    return v


def parse_config(path) -> StudyConfig:
    """Parse a ``key = value`` study file (``#`` starts a comment).

    Relative file paths are resolved against the configuration's directory.
    """
    path = Path(path)
    base = path.parent
    seen: dict[str, int] = {}
    stations: dict[str, dict] = {}
    opts: dict = {}
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadValue(path, f"expected 'key = value', got {line!r}", lineno)
        key, value = (t.strip() for t in line.split("=", 1))
        if key in seen:
            raise BadValue(path, f"key {key!r} already set on line {seen[key]}", lineno)
        seen[key] = lineno
        m = _STATION_KEY.match(key)
        if m:
            sid, attr = m.groups()
            entry = stations.setdefault(sid, {"line": lineno})
            if attr == "file":
                if not value:
                    raise BadValue(path, f"{key}: empty path", lineno)
                p = Path(value)
                entry["file"] = p if p.is_absolute() else base / p
            elif attr == "name":
                entry["name"] = value
            elif attr == "coastal":
                entry["coastal"] = _parse_bool(path, lineno, key, value)
            else:
                v = _parse_float(path, lineno, key, value)
                bound = 90.0 if attr == "latitude" else 180.0
                if not -bound <= v <= bound:
                    raise BadValue(path, f"{key}: {v} outside [-{bound:g}, {bound:g}]", lineno)
                entry[attr] = v
            continue
        if key not in _GLOBAL_KEYS:
            raise UnknownKey(path, f"unknown key {key!r}", lineno)
        if key == "train_boundary":
            try:
                opts[key] = date.fromisoformat(value)
            except ValueError:
                raise BadValue(path, f"{key}: expected an ISO date, got {value!r}", lineno) from None
        elif key in ("p_max", "q_max"):
            opts[key] = _parse_int(path, lineno, key, value, 0, MAX_ORDER)
        elif key == "seed":
            opts[key] = _parse_int(path, lineno, key, value)
        elif key == "enforce_invertibility":
            opts[key] = _parse_bool(path, lineno, key, value)
        else:
            p = Path(value)
            opts[key] = p if p.is_absolute() else base / p

    if "train_boundary" not in opts:
        raise MissingKey(path, "required key 'train_boundary' is missing")
    if not stations:
        raise MissingKey(path, "no station defined (need station.<id>.file)")
    inputs = []
    for sid, entry in stations.items():
        if "file" not in entry:
            raise MissingKey(path, f"station {sid!r} has no 'station.{sid}.file'", entry["line"])
        st = Station(sid, entry.get("name", ""), entry.get("latitude"),
                     entry.get("longitude"), entry.get("coastal", False))
        inputs.append(StationInput(st, entry["file"]))
    opts.setdefault("output_dir", base / "output")
    return StudyConfig(tuple(inputs), **opts)


# -- monthly-mean tables --------------------------------------------------------

def split_label(series: str) -> tuple[str, str, str]:
    """``'D_MAK'`` -> ``('D', 'MA', 'K')``; ``'G_MF'`` -> ``('G', 'MF', '')``."""
    try:
        param, rest = series.split("_", 1)
        ParameterKind(param)
    except ValueError:
        raise ValueError(f"bad series name {series!r}") from None
    kind, station = rest[:2], rest[2:]
    if kind not in ("MA", "MF") or (param == "G") != (station == ""):
        raise ValueError(f"bad series name {series!r}")
    return param, kind, station


def table_name(label: str, kind: str) -> str:
    """Internal label (``'G'``, ``'D_K'``) plus MA/MF -> table series name."""
    if "_" in label:
        param, station = label.split("_", 1)
        return f"{param}_{kind}{station}"
    return f"{label}_{kind}"


def read_table_rows(path) -> list[tuple[str, str, list[float], int]]:
    """Rows of a ``table,series,jan..dec`` file as (table, series, values, line)."""
    lines = _read_lines(path)
    rows = list(csv.reader(lines))
    if not rows:
        raise MalformedTable(f"{path}: empty table file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:2] != ["table", "series"]:
        raise MalformedTable(f"{path}:1: header must start with 'table,series'")
    if tuple(header[2:]) != MONTH_COLUMNS:
        raise MalformedTable(f"{path}:1: expected twelve month columns jan..dec")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        name = row[1].strip() if len(row) > 1 else ""
        cells = [c for c in row[2:] if c.strip()]
        if len(cells) != 12:
            raise MalformedTable(f"{path}:{lineno}: row {name!r} has {len(cells)} "
                                 "monthly values, expected 12")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise MalformedTable(f"{path}:{lineno}: row {name!r} has a non-numeric value") from None
        out.append((row[0].strip(), name, vals, lineno))
    return out


def load_tables(path) -> tuple[dict[str, list[float]], dict[str, list[float]]]:
    """Read monthly-mean tables into (actual, forecast) dicts keyed by internal
    labels ``'G'``, ``'D_K'``, ...

    ``path`` is a table file or a directory of ``means_*.csv`` files.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("means_*.csv"))
        if not files:
            raise IoFailure(path, "no means_*.csv files found")
    else:
        files = [path]
    actual: dict[str, list[float]] = {}
    forecast: dict[str, list[float]] = {}
    for f in files:
        for _, name, vals, lineno in read_table_rows(f):
            try:
                param, kind, station = split_label(name)
            except ValueError as exc:
                raise MalformedTable(f"{f}:{lineno}: {exc}") from None
            label = param if not station else f"{param}_{station}"
            target = actual if kind == "MA" else forecast
            if label in target:
                raise MalformedTable(f"{f}:{lineno}: duplicate row {name!r}")
            target[label] = vals
    return actual, forecast


def read_column(spec: str) -> tuple[str, list[float]]:
    """Resolve ``path:name`` to a numeric sequence.

    ``name`` selects a row of a table file or a column of a wide CSV; it may
    be omitted for files with a single value column.
    """
    path, _, name = spec.rpartition(":")
    if not path or (len(path) == 1 and path.isalpha()):    # drive letter, no name
        path, name = spec, ""
    lines = _read_lines(path)
    rows = list(csv.reader(lines))
    if not rows:
        raise MalformedTable(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if [h.lower() for h in header[:2]] == ["table", "series"]:
        table = {r[1]: r[2] for r in read_table_rows(path)}
        if not name:
            raise BadValue(path, "table files need a series name (path:series)")
        if name not in table:
            raise BadValue(path, f"no series {name!r}; have {', '.join(table)}")
        return name, table[name]
    if not name:
        if len(header) != 2:
            raise BadValue(path, "several columns present; use path:column")
        name = header[1]
    if name not in header:
        raise BadValue(path, f"no column {name!r}; have {', '.join(header)}", 1)
    j = header.index(name)
    vals = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            vals.append(float(row[j]))
        except (ValueError, IndexError):
            raise NonNumericValue(path, lineno, name, row[j] if j < len(row) else "") from None
    return name, vals


def read_columns(path, names: Iterable[str]) -> dict[str, list[float]]:
    return dict(read_column(f"{path}:{n}") for n in names)
