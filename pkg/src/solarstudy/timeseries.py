"""Calendar-aware daily series containers and the transforms applied to them
before ARMA fitting: per-month pooling, train/test splitting, first
differencing (and its exact inverse) and monthly-mean aggregation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (EmptyTrain, MissingMonth, SeriesTooShort,
                     UnsupportedOrder)


class ParameterKind(str, Enum):
    G = "G"
    T = "T"
    H = "H"
    E = "E"
    D = "D"

    @property
    def unit(self) -> str:
        return _UNITS[self.value]

    @property
    def long_name(self) -> str:
        return _NAMES[self.value]


_UNITS = {"G": "", "T": "°C", "H": "%", "E": "°C", "D": "°C"}
_NAMES = {
    "G": "Global Solar Irradiance",
    "T": "Average Temperature",
    "H": "Relative Humidity",
    "E": "Earth Skin Temperature",
    "D": "Dew/Frost Point",
}

# Predictor order used for regressions and report tables.
PREDICTORS = (ParameterKind.D, ParameterKind.H, ParameterKind.E, ParameterKind.T)


@dataclass(frozen=True)
class Station:
    id: str
    name: str = ""
    latitude: float | None = None
    longitude: float | None = None
    coastal: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("station id must be nonempty")
        if self.latitude is not None and not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if self.longitude is not None and not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DailySeries:
    """Date-ordered daily observations of one parameter at one station.

    ``station`` is ``None`` for the station-independent irradiance series.
    """

    station: Station | None
    parameter: ParameterKind
    dates: tuple[date, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", _frozen_array(self.values))
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ValueError(f"dates not strictly increasing at {b}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series contains non-finite values")
        if self.parameter is ParameterKind.H and len(self.values):
            if self.values.min() < 0.0 or self.values.max() > 100.0:
                raise ValueError("relative humidity outside [0, 100]")

    def __len__(self):
        return len(self.dates)

    @property
    def observations(self):
        return list(zip(self.dates, self.values.tolist()))

    def with_values(self, dates, values) -> "DailySeries":
        return DailySeries(self.station, self.parameter, dates, values)


@dataclass(frozen=True, eq=False)
class MonthSlice:
    month: int
    values: np.ndarray
    source_dates: tuple[date, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "source_dates", tuple(self.source_dates))
        if len(self.values) != len(self.source_dates):
            raise ValueError("values and source dates differ in length")
        if any(d.month != self.month for d in self.source_dates):
            raise ValueError(f"slice for month {self.month} holds a foreign date")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class DifferencedSeries:
    """Result of :func:`difference`.

    ``residuals`` holds the rounding error of each first difference
    (``values[i] + residuals[i]`` equals the exact real difference), which lets
    :func:`undifference` rebuild the original floats bit for bit.  It is all
    zeros for hand-built instances and for orders other than one.
    """

    order: int
    values: np.ndarray
    anchors: np.ndarray
    residuals: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "anchors", _frozen_array(self.anchors))
        if self.residuals is None:
            res = np.zeros(len(self.values))
        else:
            res = self.residuals
        object.__setattr__(self, "residuals", _frozen_array(res))
        if len(self.anchors) != self.order:
            raise ValueError("need exactly `order` anchors")
        if len(self.residuals) != len(self.values):
            raise ValueError("residuals and values differ in length")


@dataclass(frozen=True)
class MonthlyMeans:
    parameter: ParameterKind
    station: Station | None
    means: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.means) != 12 or len(self.counts) != 12:
            raise ValueError("monthly means need exactly 12 entries")
        if not all(math.isfinite(m) for m in self.means):
            raise ValueError("monthly means must be finite")
        if any(c < 1 for c in self.counts):
            raise ValueError("every month needs at least one observation")


def _two_diff(a: np.ndarray, b: np.ndarray):
    """Error-free ``a - b``: returns (rounded difference, exact remainder)."""
    nb = -b
    s = a + nb
    bb = s - a
    err = (a - (s - bb)) + (nb - bb)
    return s, err


def difference(values: Sequence[float], d: int = 1) -> DifferencedSeries:
    x = np.asarray(values, dtype=float)
    if d < 0:
        raise UnsupportedOrder(f"differencing order must be >= 0, got {d}")
    if len(x) <= d:
        raise SeriesTooShort(f"need more than {d} values to difference, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot difference non-finite values")
    anchors = x[:d].copy()
    if d == 1:
        out, res = _two_diff(x[1:], x[:-1])
        return DifferencedSeries(1, out, anchors, res)
    return DifferencedSeries(d, np.diff(x, n=d) if d else x.copy(), anchors)


def undifference(diff: DifferencedSeries, extension: Sequence[float] = ()) -> np.ndarray:
    """Integrate ``diff`` (and any appended differences) back to levels.

    The in-sample part reproduces the original values exactly; each step is a
    correctly rounded sum of the previous level, the stored difference and its
    rounding remainder.
    """
    ext = np.asarray(extension, dtype=float)
    if diff.order == 0:
        return np.concatenate([diff.values, ext])
    if diff.order != 1:
        raise UnsupportedOrder(f"only orders 0 and 1 can be inverted, got {diff.order}")
    if not np.all(np.isfinite(ext)):
        raise ValueError("extension contains non-finite values")
    n = len(diff.values)
    out = np.empty(1 + n + len(ext))
    level = float(diff.anchors[0])
    out[0] = level
    for i, (dv, rv) in enumerate(zip(diff.values.tolist(), diff.residuals.tolist())):
        level = math.fsum((level, dv, rv))
        out[i + 1] = level
    for j, dv in enumerate(ext.tolist()):
        level = level + dv
        out[n + 1 + j] = level
    return out


def partition_by_month(series: DailySeries) -> list[MonthSlice]:
    """Pool same-month observations across years into twelve slices.

    Consecutive years are simply concatenated: the last 31 January value of
    one year is followed by 1 January of the next.
    """
    if len(series) == 0:
        raise SeriesTooShort("cannot partition an empty series")
    buckets: list[list[int]] = [[] for _ in range(12)]
    for i, d in enumerate(series.dates):
        buckets[d.month - 1].append(i)
    slices = []
    for m, idx in enumerate(buckets, start=1):
        slices.append(MonthSlice(m, series.values[idx],
                                 tuple(series.dates[i] for i in idx)))
    return slices


def split_train_test(series: DailySeries, boundary: date):
    """Split at ``boundary``: train holds dates <= boundary, test the rest."""
    k = 0
    while k < len(series.dates) and series.dates[k] <= boundary:
        k += 1
    if k == 0:
        raise EmptyTrain(f"no observation on or before {boundary.isoformat()}")
    train = series.with_values(series.dates[:k], series.values[:k])
    test = series.with_values(series.dates[k:], series.values[k:])
    return train, test


def monthly_mean_from_pairs(dates: Iterable[date], values: Iterable[float],
                            window: tuple[date, date] | None = None):
    """Per-calendar-month (means, counts) of the in-window pairs.

    Raises :class:`MissingMonth` listing every month without data.
    """
    sums = [0.0] * 12
    counts = [0] * 12
    parts: list[list[float]] = [[] for _ in range(12)]
    for d, v in zip(dates, values):
        if window is not None and not window[0] <= d <= window[1]:
            continue
        parts[d.month - 1].append(float(v))
        counts[d.month - 1] += 1
    missing = [m + 1 for m in range(12) if counts[m] == 0]
    if missing:
        raise MissingMonth(missing)
    for m in range(12):
        sums[m] = math.fsum(parts[m]) / counts[m]
    return sums, counts


def monthly_mean(series: DailySeries, window: tuple[date, date] | None = None) -> MonthlyMeans:
    try:
        means, counts = monthly_mean_from_pairs(series.dates, series.values.tolist(), window)
    except MissingMonth as exc:
        label = series.parameter.value
        if series.station is not None:
            label += f"_{series.station.id}"
        raise MissingMonth(exc.months, context=label) from None
    return MonthlyMeans(series.parameter, series.station, means, counts)
