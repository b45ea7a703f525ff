"""Command-line entry point (``solarstudy``).

Exit status: 0 on success, 1 for usage errors, 2 for data or numeric errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import date
from pathlib import Path

from . import arma, pipeline, pv, stats
from .charts import emit_svg_charts
from .errors import StudyError
from .ingest import load_tables, parse_config, parse_station_csv, read_column, read_columns
from .timeseries import ParameterKind, difference, partition_by_month, split_train_test

EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _date(text):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ISO date {text!r}") from None


def _month(text):
    m = int(text)
    if not 1 <= m <= 12:
        raise argparse.ArgumentTypeError("month must be 1-12")
    return m


def _order(text):
    v = int(text)
    if not 0 <= v <= 26:
        raise argparse.ArgumentTypeError("order bound must be 0-26")
    return v


def _print_report(report: pipeline.StudyReport, out):
    for title, rows in (("actual vs forecast", report.ma_vs_mf),
                        ("G vs parameters (actual)", report.g_vs_params_actual),
                        ("G vs parameters (forecast)", report.g_vs_params_forecast)):
        if not rows:
            continue
        print(f"# correlation: {title}", file=out)
        for label, c in rows.items():
            print(f"{label:<6} r={c.r:.3f} p={c.p:.3f}", file=out)
    if report.regressions:
        print("# regressions", file=out)
        out.write(pipeline.regression_summary(report))


def cmd_study(args):
    config = parse_config(args.config)
    executor = ProcessPoolExecutor(args.jobs) if args.jobs > 1 else None
    try:
        report = pipeline.run_study(config, executor=executor)
    finally:
        if executor is not None:
            executor.shutdown()
    out_dir = args.out or config.output_dir
    for path in pipeline.emit_report(report, out_dir):
        print(path)
    return 0


def cmd_replay(args):
    actual, forecast = load_tables(args.tables)
    report = pipeline.replay_from_tables(actual, forecast)
    _print_report(report, sys.stdout)
    if args.out:
        for path in pipeline.emit_report(report, args.out):
            print(path)
    return 0


def _month_slice(args):
    columns = parse_station_csv(args.input)
    kind = ParameterKind(args.param)
    if kind not in columns:
        raise StudyError(f"{args.input}: no column {kind.value}")
    series = columns[kind]
    test_len = None
    if args.boundary is not None:
        series, test = split_train_test(series, args.boundary)
        test_len = len(partition_by_month(test)[args.month - 1]) if len(test) else 0
    values = partition_by_month(series)[args.month - 1].values
    return values, test_len


def _fit(args, values):
    diff = difference(values, 1)
    model, report = arma.select_order(diff.values, args.p_max, args.q_max,
                                      enforce_invertibility=not args.no_invertibility)
    return diff, model, report


def cmd_fit(args):
    values, _ = _month_slice(args)
    _, model, report = _fit(args, values)
    print(f"ARMA({model.p},{model.q}) AICC={model.aicc:.6f}")
    print(f"mean={model.mean:.6g} sigma2={model.sigma2:.6g} loglik={model.loglik:.6f} n={model.n}")
    if model.p:
        print("ar=" + ",".join(f"{c:.6g}" for c in model.ar))
    if model.q:
        print("ma=" + ",".join(f"{c:.6g}" for c in model.ma))
    if report.tie_break_applied:
        print("tie-break applied")
    return 0


def cmd_forecast(args):
    values, test_len = _month_slice(args)
    h = args.horizon if args.horizon is not None else test_len
    if not h:
        raise StudyError("forecast horizon unknown: pass --horizon or a --boundary "
                         "leaving test data")
    diff, model, _ = _fit(args, values)
    fc = arma.forecast(model, diff.values, h, anchor=float(values[-1]))
    print(f"# ARMA({model.p},{model.q}) forecast, original scale")
    for k, (v, m) in enumerate(zip(fc.point, fc.mse), start=1):
        print(f"{k},{v:.6g},{m:.6g}")
    return 0


def cmd_correlate(args):
    _, x = read_column(args.x)
    _, y = read_column(args.y)
    c = stats.pearson(x, y)
    print(f"r={c.r:.3f} p={c.p:.3f} t={c.t:.3f} n={c.n}")
    return 0


def cmd_regress(args):
    names = [n.strip() for n in args.x.split(",") if n.strip()]
    if not names:
        raise StudyError("no predictors given")
    _, y = read_column(f"{args.input}:{args.y}")
    X = read_columns(args.input, names)
    fit = stats.ols(y, X)
    print(fit.equation(args.y))
    print(fit.summary_line())
    print(f"n = {fit.n}  k = {fit.k}  SSE = {fit.sse:.6g}  SST = {fit.sst:.6g}")
    print("coefficients: " + ", ".join([f"intercept={fit.intercept:.10g}"]
                                        + [f"{k}={v:.10g}" for k, v in fit.slopes.items()]))
    return 0


def cmd_plot(args):
    src = Path(args.report)
    actual, forecast = load_tables(src)
    out = args.out or (src if src.is_dir() else Path("."))
    for path in emit_svg_charts(actual, forecast, out):
        print(path)
    return 0


def cmd_efficiency(args):
    eta = pv.efficiency(args.e, args.area, args.ht, args.tau)
    print(f"{eta:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="solarstudy", description="Per-month ARIMA study of irradiance "
                 "and terrestrial parameters, with correlation and regression tables.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("study", help="run the full study from a configuration file")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path, help="override output_dir")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the fits")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("replay", help="statistics stage from monthly-mean tables")
    p.add_argument("--tables", required=True, type=Path)
    p.add_argument("--out", type=Path, help="also write report files here")
    p.set_defaults(func=cmd_replay)

    for name, func, text in (("fit", cmd_fit, "select an ARMA order for one month"),
                             ("forecast", cmd_forecast, "fit one month and forecast it")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--input", required=True, type=Path, help="station CSV")
        p.add_argument("--param", required=True, choices=[k.value for k in ParameterKind])
        p.add_argument("--month", required=True, type=_month)
        p.add_argument("--p-max", type=_order, default=5)
        p.add_argument("--q-max", type=_order, default=5)
        p.add_argument("--boundary", type=_date, help="last training date")
        p.add_argument("--no-invertibility", action="store_true",
                       help="do not require invertible MA polynomials")
        if name == "forecast":
            p.add_argument("--horizon", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("correlate", help="Pearson correlation of two columns")
    p.add_argument("--x", required=True, help="path[:column-or-series]")
    p.add_argument("--y", required=True, help="path[:column-or-series]")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("regress", help="OLS of one column on others")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--y", required=True)
    p.add_argument("--x", required=True, help="comma-separated predictor names")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("plot", help="SVG charts from a report directory or table file")
    p.add_argument("--report", required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("efficiency", help="PV array efficiency")
    p.add_argument("--e", required=True, type=float, help="electrical energy")
    p.add_argument("--area", required=True, type=float)
    p.add_argument("--ht", required=True, type=float, help="irradiance per unit area")
    p.add_argument("--tau", required=True, type=float, help="transmissivity")
    p.set_defaults(func=cmd_efficiency)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (StudyError, OSError, ValueError) as exc:
        print(f"solarstudy: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
