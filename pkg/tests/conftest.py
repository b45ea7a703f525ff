from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "fixtures" / "paper_tables.csv"


@pytest.fixture(scope="session")
def tables_path():
    return FIXTURE


@pytest.fixture(scope="session")
def tables():
    from solarstudy.ingest import load_tables
    return load_tables(FIXTURE)


BOUNDARY_YEARS = 18


@pytest.fixture(scope="session")
def synthetic_study():
    """One full 23-year synthetic run with the default grid, shared by the
    pipeline and acceptance tests.  Returns (config, data, truth, report,
    elapsed seconds)."""
    import time
    from datetime import date

    from solarstudy.ingest import StationInput, StudyConfig
    from solarstudy.pipeline import run_study, synthetic_dataset
    from solarstudy.timeseries import Station

    data, truth = synthetic_dataset(seed=0)
    config = StudyConfig(
        (StationInput(Station("K", "Karachi", coastal=True), Path("k.csv")),
         StationInput(Station("J", "Jacobabad"), Path("j.csv"))),
        date(1983 + BOUNDARY_YEARS - 1, 12, 31))
    t0 = time.perf_counter()
    report = run_study(config, data)
    return config, data, truth, report, time.perf_counter() - t0


# -- acceptance criterion reporting ------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}
_DETAILS: dict[int, str] = {}


def record_detail(n: int, text: str):
    _DETAILS[n] = text


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, text = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {text}")
        if n in _DETAILS:
            terminalreporter.write_line(f"               {_DETAILS[n]}")
