"""Study orchestration.

``run_study`` fits one minimum-AICC ARMA model per (series, calendar month)
to the first differences of the pooled training days, forecasts the test
window, and reduces both the actual test data and the forecasts to monthly
means.  The statistics stage (actual-vs-forecast correlations, irradiance
vs terrestrial parameters, and the regressions of actual G on each station's
predictors) is shared with ``replay_from_tables``, which starts from
published monthly means instead.

Series are labelled ``'G'`` for irradiance and ``'<P>_<station id>'``
otherwise, e.g. ``'D_K'``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import arma, stats
from .errors import (ConflictingSeries, EmptyTest, IoFailure, MalformedTable,
                     MissingSeries, SeriesFailure, StudyError, ZeroVariance)
from .ingest import StudyConfig, parse_station_csv, table_name
from .timeseries import (PREDICTORS, DailySeries, MonthlyMeans, ParameterKind,
                         Station, difference, monthly_mean_from_pairs,
                         partition_by_month, split_train_test)

log = logging.getLogger(__name__)

MONTHS = tuple(range(1, 13))


@dataclass(frozen=True)
class MonthModel:
    """Chosen model for one (series, month); ``p = q = None`` marks a
    deterministic (zero-variance) differenced slice that was extrapolated
    without fitting."""

    p: int | None
    q: int | None
    aicc: float
    n: int
    mean: float = 0.0
    sigma2: float = 0.0
    ar: tuple = ()
    ma: tuple = ()

    @property
    def order(self):
        return (self.p, self.q)

    @property
    def label(self) -> str:
        if self.p is None:
            return "deterministic"
        return f"ARMA({self.p},{self.q})"


@dataclass(eq=False)
class StudyReport:
    stations: tuple[Station, ...]
    per_month_models: dict[tuple[str | None, str, int], MonthModel]
    means_actual: dict[str, MonthlyMeans]
    means_forecast: dict[str, MonthlyMeans]
    ma_vs_mf: dict[str, stats.CorrelationResult]
    g_vs_params_actual: dict[str, stats.CorrelationResult]
    g_vs_params_forecast: dict[str, stats.CorrelationResult]
    regressions: dict[str, stats.RegressionFit]
    selection: dict = field(default_factory=dict, repr=False)

    @property
    def series_labels(self) -> list[str]:
        return list(self.means_actual)


def series_label(parameter, station_id: str | None) -> str:
    p = ParameterKind(parameter).value
    return p if station_id is None or p == "G" else f"{p}_{station_id}"


def _parse_label(label: str) -> tuple[ParameterKind, str | None]:
    if "_" in label:
        p, sid = label.split("_", 1)
        return ParameterKind(p), sid
    return ParameterKind(label), None


# -- statistics stage ------------------------------------------------------------

def _as_means(values, label) -> np.ndarray:
    v = values.means if isinstance(values, MonthlyMeans) else values
    arr = np.asarray(v, dtype=float)
    if arr.shape != (12,):
        raise MalformedTable(f"row {label!r} has {arr.size} monthly values, expected 12")
    if not np.all(np.isfinite(arr)):
        raise MalformedTable(f"row {label!r} has non-finite values")
    return arr


def _correlate(label, x, y) -> stats.CorrelationResult:
    try:
        return stats.pearson(x, y)
    except ZeroVariance as exc:
        p, sid = _parse_label(label)
        raise SeriesFailure(sid, p.value, None, exc) from exc


def _statistics(actual: Mapping[str, np.ndarray], forecast: Mapping[str, np.ndarray],
                station_ids: Sequence[str]):
    # the correlations below walk the constant G series too, so a flat G is
    # reported against G itself first
    ma_vs_mf = {}
    for label in actual:
        if label in forecast:
            ma_vs_mf[label] = _correlate(label, actual[label], forecast[label])
    g_act, g_fc = {}, {}
    regs = {}
    if "G" in actual:
        for sid in station_ids:
            for p in PREDICTORS:
                label = series_label(p, sid)
                if label in actual:
                    g_act[label] = _correlate("G", actual["G"], actual[label])
                if "G" in forecast and label in forecast:
                    g_fc[label] = _correlate("G", forecast["G"], forecast[label])
        for sid in station_ids:
            labels = [series_label(p, sid) for p in PREDICTORS]
            if all(lb in actual for lb in labels):
                regs[f"{sid}_MA"] = stats.ols(
                    actual["G"], {table_name(lb, "MA"): actual[lb] for lb in labels})
            if all(lb in forecast for lb in labels):
                regs[f"{sid}_MF"] = stats.ols(
                    actual["G"], {table_name(lb, "MF"): forecast[lb] for lb in labels})
    return ma_vs_mf, g_act, g_fc, regs


def _means_obj(label, values, counts=None) -> MonthlyMeans:
    p, sid = _parse_label(label)
    station = Station(sid) if sid else None
    return MonthlyMeans(p, station, tuple(values), tuple(counts or (1,) * 12))


def replay_from_tables(actual: Mapping[str, Sequence[float] | MonthlyMeans],
                       forecast: Mapping[str, Sequence[float] | MonthlyMeans],
                       stations: Sequence[Station] | None = None) -> StudyReport:
    """Statistics stage on given monthly means, skipping all ARMA work.

    ``actual`` and ``forecast`` map labels (``'G'``, ``'D_K'``, ...) to twelve
    monthly means.  Station order defaults to first appearance in ``actual``.
    """
    act = {k: _as_means(v, table_name(k, "MA")) for k, v in actual.items()}
    fc = {k: _as_means(v, table_name(k, "MF")) for k, v in forecast.items()}
    if stations is None:
        ids = []
        for label in act:
            _, sid = _parse_label(label)
            if sid and sid not in ids:
                ids.append(sid)
        stations = tuple(Station(s) for s in ids)
    ids = [s.id for s in stations]
    ma_vs_mf, g_act, g_fc, regs = _statistics(act, fc, ids)

    def counts(src, k):
        v = src[k]
        return v.counts if isinstance(v, MonthlyMeans) else None

    return StudyReport(
        tuple(stations), {},
        {k: _means_obj(k, v, counts(actual, k)) for k, v in act.items()},
        {k: _means_obj(k, v, counts(forecast, k)) for k, v in fc.items()},
        ma_vs_mf, g_act, g_fc, regs)


# -- full study ------------------------------------------------------------------

def load_station_data(config: StudyConfig) -> dict[str, DailySeries]:
    """Parse every station file; returns series keyed by label with G once.

    G may appear in several files; all copies must agree exactly.
    """
    out: dict[str, DailySeries] = {}
    g_source = None
    for spec in config.stations:
        columns = parse_station_csv(spec.path, spec.station)
        wanted = config.parameters.get(spec.station.id)
        for kind, series in columns.items():
            if kind is ParameterKind.G:
                if g_source is None:
                    out["G"] = series
                    g_source = spec.path
                elif (series.dates != out["G"].dates
                      or not np.array_equal(series.values, out["G"].values)):
                    raise ConflictingSeries(
                        f"G differs between {g_source} and {spec.path}")
                continue
            if wanted is not None and kind not in wanted:
                continue
            out[series_label(kind, spec.station.id)] = series
    return out


@dataclass(frozen=True)
class _MonthJob:
    label: str
    month: int
    train: np.ndarray
    horizon: int
    p_max: int
    q_max: int
    enforce: bool


def _run_month(job: _MonthJob):
    """Fit and forecast one (series, month); returns (model, forecast levels)."""
    station_id = _parse_label(job.label)[1]
    param = _parse_label(job.label)[0].value
    try:
        diff = difference(job.train, 1)
        x = diff.values
        last = float(job.train[-1])
        if np.ptp(x) == 0.0:
            # flat differences: nothing stochastic to model, extrapolate the
            # constant step
            step = float(x[0])
            levels = last + step * np.arange(1, job.horizon + 1)
            return MonthModel(None, None, math.nan, len(x), step), levels
        model, report = arma.select_order(x, job.p_max, job.q_max,
                                          enforce_invertibility=job.enforce)
        fc = arma.forecast(model, x, job.horizon, anchor=last)
        chosen = MonthModel(model.p, model.q, model.aicc, model.n, model.mean,
                            model.sigma2, model.ar, model.ma)
        return chosen, fc.point, report
    except StudyError as exc:
        raise SeriesFailure(station_id, param, job.month, exc) from exc


def run_study(config: StudyConfig, data: Mapping[str, DailySeries] | None = None,
              executor: Executor | None = None) -> StudyReport:
    """Full study: per-month fit and forecast, monthly means, statistics.

    ``data`` (label -> series) bypasses reading the station files; pass an
    ``executor`` to fit the (series, month) cells concurrently.
    """
    series = dict(load_station_data(config) if data is None else data)
    if "G" not in series:
        raise MissingSeries("no input carries the irradiance column G")
    station_ids = [s.station.id for s in config.stations]
    order = ["G"] + [series_label(p, sid) for sid in station_ids for p in PREDICTORS]
    labels = [lb for lb in order if lb in series]
    labels += [lb for lb in series if lb not in labels]

    # validate the split for every series before any fitting
    splits = {}
    for label in labels:
        s = series[label]
        p, sid = _parse_label(label)
        try:
            train, test = split_train_test(s, config.train_boundary)
        except StudyError as exc:
            raise SeriesFailure(sid, p.value, None, exc) from exc
        if len(test) == 0:
            raise SeriesFailure(sid, p.value, None, EmptyTest(
                f"no observation after {config.train_boundary.isoformat()}"))
        splits[label] = (train, test)

    jobs = []
    test_dates = {}
    for label in labels:
        train, test = splits[label]
        tr = partition_by_month(train)
        te = partition_by_month(test)
        for m in MONTHS:
            test_dates[label, m] = te[m - 1].source_dates
            jobs.append(_MonthJob(label, m, np.array(tr[m - 1].values),
                                  len(te[m - 1]), config.p_max, config.q_max,
                                  config.enforce_invertibility))
    for job in jobs:
        p, sid = _parse_label(job.label)
        if job.horizon == 0 or len(job.train) < 2:
            what = "test" if job.horizon == 0 else "training"
            raise SeriesFailure(sid, p.value, job.month, StudyError(
                f"no {what} data for this month"))

    results = list(executor.map(_run_month, jobs)) if executor else [_run_month(j) for j in jobs]

    models = {}
    selection = {}
    fc_pairs: dict[str, tuple[list, list]] = {lb: ([], []) for lb in labels}
    for job, res in zip(jobs, results):
        model, levels = res[0], res[1]
        p, sid = _parse_label(job.label)
        models[sid, p.value, job.month] = model
        if len(res) > 2:
            selection[sid, p.value, job.month] = res[2]
        fc_pairs[job.label][0].extend(test_dates[job.label, job.month])
        fc_pairs[job.label][1].extend(levels.tolist())
        log.debug("%s month %d: %s", job.label, job.month, model.label)

    means_act, means_fc = {}, {}
    act, fc = {}, {}
    for label in labels:
        p, sid = _parse_label(label)
        test = splits[label][1]
        try:
            ma, ca = monthly_mean_from_pairs(test.dates, test.values.tolist())
            mf, cf = monthly_mean_from_pairs(*fc_pairs[label])
        except StudyError as exc:
            raise SeriesFailure(sid, p.value, None, exc) from exc
        station = Station(sid) if sid else None
        means_act[label] = MonthlyMeans(p, station, ma, ca)
        means_fc[label] = MonthlyMeans(p, station, mf, cf)
        act[label] = np.array(ma)
        fc[label] = np.array(mf)

    ma_vs_mf, g_act, g_fc, regs = _statistics(act, fc, station_ids)
    return StudyReport(tuple(s.station for s in config.stations), models, means_act,
                       means_fc, ma_vs_mf, g_act, g_fc, regs, selection)


# -- report files ----------------------------------------------------------------

def _g6(v: float) -> str:
    if isinstance(v, (int, np.integer)):
        return str(v)
    if math.isnan(v):
        return "nan"
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from None


def _csv(rows) -> str:
    return "".join(",".join(_g6(c) if not isinstance(c, str) else c for c in r) + "\n"
                   for r in rows)


def means_rows(report: StudyReport, group: str):
    """Rows of the means table for ``group`` ('G' or a station id)."""
    header = ["table", "series", "jan", "feb", "mar", "apr", "may", "jun",
              "jul", "aug", "sep", "oct", "nov", "dec"]
    rows = [header]
    for kind, src in (("MA", report.means_actual), ("MF", report.means_forecast)):
        for label, mm in src.items():
            _, sid = _parse_label(label)
            if (sid or "G") == group:
                rows.append([group, table_name(label, kind)] + list(mm.means))
    return rows


def _corr_rows(results: Mapping[str, stats.CorrelationResult], name_of=lambda k: k):
    rows = [["series", "n", "r", "t", "p"]]
    for k, c in results.items():
        rows.append([name_of(k), c.n, c.r, c.t, c.p])
    return rows


def regression_summary(report: StudyReport) -> str:
    blocks = []
    for name, fit in report.regressions.items():
        sid, kind = name.rsplit("_", 1)
        lines = [f"[{name}] G_MA regressed on {kind} predictors of station {sid}",
                 fit.equation("G_MA"),
                 fit.summary_line(),
                 f"n = {fit.n}  k = {fit.k}  SSE = {_g6(fit.sse)}  SST = {_g6(fit.sst)}",
                 "coefficients: " + ", ".join(
                     [f"intercept={fit.intercept:.10g}"]
                     + [f"{k}={v:.10g}" for k, v in fit.slopes.items()])]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def emit_report(report: StudyReport, directory) -> list[Path]:
    """Write the report as CSV tables plus ``regressions.txt``; returns the
    written paths.  Deterministic: the same report gives identical bytes."""
    d = Path(directory)
    written = []

    def put(name, text):
        path = d / name
        _write(path, text)
        written.append(path)

    by_series: dict[str, list] = {}
    for (sid, param, month), mm in report.per_month_models.items():
        by_series.setdefault(series_label(param, sid), []).append((month, mm))
    for label, rows in by_series.items():
        out = [["month", "model", "p", "q", "aicc", "n"]]
        for month, mm in sorted(rows):
            out.append([str(month), mm.label, "" if mm.p is None else mm.p,
                        "" if mm.q is None else mm.q, mm.aicc, mm.n])
        put(f"models_{label}.csv", _csv(out))

    groups = []
    for label in report.means_actual:
        g = _parse_label(label)[1] or "G"
        if g not in groups:
            groups.append(g)
    for g in groups:
        put(f"means_{g}.csv", _csv(means_rows(report, g)))

    g_rows = {k: v for k, v in report.ma_vs_mf.items() if k == "G"}
    if g_rows:
        put("corr_G_ma_mf.csv", _csv(_corr_rows(g_rows)))
    for g in groups:
        if g == "G":
            continue
        rows = {k: v for k, v in report.ma_vs_mf.items() if _parse_label(k)[1] == g}
        if rows:
            put(f"corr_{g}_ma_mf.csv", _csv(_corr_rows(rows)))
    if report.g_vs_params_actual:
        put("corr_G_vs_params_actual.csv",
            _csv(_corr_rows(report.g_vs_params_actual, lambda k: table_name(k, "MA"))))
    if report.g_vs_params_forecast:
        put("corr_G_vs_params_forecast.csv",
            _csv(_corr_rows(report.g_vs_params_forecast, lambda k: table_name(k, "MF"))))
    if report.regressions:
        put("regressions.txt", regression_summary(report))
    return written


# -- synthetic data ----------------------------------------------------------------

# climatology used by the generator: (annual mean, amplitude, phase sign, noise sd)
# G peaks in winter; the temperatures and humidity peak in summer
_CLIMATE = {
    "G": (1365.0, 25.0, 1.0, 0.15),
    "D": (10.0, 10.0, -1.0, 0.08),
    "H": (45.0, 15.0, -1.0, 0.12),
    "E": (29.0, 7.0, -1.0, 0.06),
    "T": (25.0, 6.0, -1.0, 0.05),
}


def synthetic_dataset(seed: int = 0, years: int = 23, start_year: int = 1983,
                      station_ids: Sequence[str] = ("K", "J")):
    """Daily data whose per-month pooled first differences follow known ARMA
    models (orders up to (1, 1)), on top of a seasonal climatology.

    Returns ``(data, truth)``: series keyed by label, and the generating
    ``ArmaModel`` per (label, month).
    """
    rng = np.random.default_rng(seed)
    first, last = date(start_year, 1, 1), date(start_year + years - 1, 12, 31)
    days = [first + timedelta(d) for d in range((last - first).days + 1)]
    idx_by_month = [[i for i, d in enumerate(days) if d.month == m] for m in MONTHS]
    labels = ["G"] + [f"{p.value}_{sid}" for sid in station_ids for p in PREDICTORS]
    data, truth = {}, {}
    for li, label in enumerate(labels):
        param, sid = _parse_label(label)
        base, amp, sign, sd = _CLIMATE[param.value]
        values = np.empty(len(days))
        for m in MONTHS:
            kind = rng.integers(3)
            ar = (round(float(rng.uniform(-0.6, 0.6)), 2),) if kind != 1 else ()
            ma = (round(float(rng.uniform(-0.6, 0.6)), 2),) if kind != 0 else ()
            model = arma.arma_model(ar, ma, 0.0, sd * sd)
            truth[label, m] = model
            idx = idx_by_month[m - 1]
            steps = arma.simulate(model, len(idx) - 1, seed * 1000 + li * 12 + m)
            level = base + sign * amp * math.cos(2 * math.pi * (m - 1) / 12.0)
            values[idx] = level + np.concatenate([[0.0], np.cumsum(steps)])
        if param is ParameterKind.H:
            values = np.clip(values, 0.0, 100.0)
        station = None if param is ParameterKind.G else Station(sid)
        data[label] = DailySeries(station, param, days, values)
    return data, truth
