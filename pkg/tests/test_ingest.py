from datetime import date
from pathlib import Path

import pytest

from solarstudy.errors import (BadValue, DuplicateDate, HumidityOutOfRange, IoFailure,
                               MalformedHeader, MalformedRow, MalformedTable, MissingKey,
                               NonNumericValue, UnknownKey)
from solarstudy.ingest import (load_tables, parse_config, parse_station_csv, read_column,
                               read_table_rows, split_label, table_name, write_station_csv)
from solarstudy.timeseries import DailySeries, ParameterKind, Station


def _write(path: Path, text: str, newline="\n") -> Path:
    path.write_bytes(text.replace("\n", newline).encode())
    return path


class TestStationCsv:
    def test_basic(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,G,T,H\n2001-01-02,1.5,20,50\n2001-01-01,1.0,19,40\n")
        st = Station("K", "Karachi")
        cols = parse_station_csv(f, st)
        assert set(cols) == {ParameterKind.G, ParameterKind.T, ParameterKind.H}
        assert tuple(cols[ParameterKind.T].dates) == (date(2001, 1, 1), date(2001, 1, 2))
        assert cols[ParameterKind.T].values.tolist() == [19.0, 20.0]
        assert cols[ParameterKind.T].station == st
        assert cols[ParameterKind.G].station is None

    def test_crlf_and_blank_lines(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,D\n2001-01-01,3\n\n2001-01-02,4\n", "\r\n")
        assert parse_station_csv(f)[ParameterKind.D].values.tolist() == [3.0, 4.0]

    def test_non_numeric_reports_line_and_column(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,G,T\n2001-01-01,1,2\n2001-01-02,1,abc\n")
        with pytest.raises(NonNumericValue) as exc:
            parse_station_csv(f)
        assert exc.value.line == 3 and exc.value.column == "T"
        assert "abc" in str(exc.value)

    def test_empty_cell_rejected(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,G,T\n2001-01-01,1,\n")
        with pytest.raises(NonNumericValue):
            parse_station_csv(f)

    def test_nan_rejected(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,G\n2001-01-01,nan\n")
        with pytest.raises(NonNumericValue):
            parse_station_csv(f)

    def test_duplicate_date(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,G\n2001-01-01,1\n2001-01-02,1\n2001-01-01,2\n")
        with pytest.raises(DuplicateDate) as exc:
            parse_station_csv(f)
        assert exc.value.line == 4

    def test_humidity_range(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,H\n2001-01-01,101\n")
        with pytest.raises(HumidityOutOfRange) as exc:
            parse_station_csv(f)
        assert exc.value.line == 2

    @pytest.mark.parametrize("header", ["G,T", "date,X", "date,G,G", "date", ""])
    def test_bad_header(self, tmp_path, header):
        f = _write(tmp_path / "k.csv", header + "\n")
        with pytest.raises(MalformedHeader):
            parse_station_csv(f)

    def test_bad_row(self, tmp_path):
        f = _write(tmp_path / "k.csv", "date,G\n2001-01-01,1,2\n")
        with pytest.raises(MalformedRow):
            parse_station_csv(f)
        f = _write(tmp_path / "k.csv", "date,G\n2001-13-01,1\n")
        with pytest.raises(MalformedRow):
            parse_station_csv(f)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            parse_station_csv(tmp_path / "nope.csv")

    def test_round_trip(self, tmp_path):
        days = [date(2000, 1, 1), date(2000, 1, 2), date(2000, 2, 1)]
        src = {ParameterKind.G: DailySeries(None, ParameterKind.G, days, [0.1, 1 / 3, 2e-17]),
               ParameterKind.E: DailySeries(None, ParameterKind.E, days, [1.0, 2.0, 3.0])}
        write_station_csv(tmp_path / "rt.csv", src)
        back = parse_station_csv(tmp_path / "rt.csv")
        for k in src:
            assert back[k].values.tolist() == src[k].values.tolist()
            assert tuple(back[k].dates) == tuple(days)


CONFIG = """\
# study
train_boundary = 2002-12-31
station.K.file = k.csv
station.K.name = Karachi
station.K.coastal = yes
"""


class TestConfig:
    def test_defaults(self, tmp_path):
        cfg = parse_config(_write(tmp_path / "s.cfg", CONFIG))
        assert cfg.train_boundary == date(2002, 12, 31)
        assert (cfg.p_max, cfg.q_max, cfg.enforce_invertibility, cfg.seed) == (5, 5, True, 0)
        assert cfg.output_dir == tmp_path / "output"
        (inp,) = cfg.stations
        assert inp.path == tmp_path / "k.csv"
        assert inp.station.name == "Karachi" and inp.station.coastal

    def test_overrides(self, tmp_path):
        text = CONFIG + "p_max = 3\nq_max = 0\nenforce_invertibility = false\nseed = 9\n"
        cfg = parse_config(_write(tmp_path / "s.cfg", text))
        assert (cfg.p_max, cfg.q_max, cfg.enforce_invertibility, cfg.seed) == (3, 0, False, 9)

    def test_order_bound(self, tmp_path):
        with pytest.raises(BadValue) as exc:
            parse_config(_write(tmp_path / "s.cfg", CONFIG + "p_max = 30\n"))
        assert exc.value.line == 6

    def test_missing_boundary(self, tmp_path):
        text = CONFIG.replace("train_boundary = 2002-12-31\n", "")
        with pytest.raises(MissingKey) as exc:
            parse_config(_write(tmp_path / "s.cfg", text))
        assert "train_boundary" in str(exc.value)

    def test_unknown_key(self, tmp_path):
        with pytest.raises(UnknownKey) as exc:
            parse_config(_write(tmp_path / "s.cfg", CONFIG + "colour = red\n"))
        assert exc.value.line == 6

    def test_duplicate_key(self, tmp_path):
        with pytest.raises(BadValue):
            parse_config(_write(tmp_path / "s.cfg", CONFIG + "p_max = 1\np_max = 2\n"))

    def test_station_without_file(self, tmp_path):
        with pytest.raises(MissingKey):
            parse_config(_write(tmp_path / "s.cfg", CONFIG + "station.J.name = Jacobabad\n"))

    def test_bad_date(self, tmp_path):
        with pytest.raises(BadValue):
            parse_config(_write(tmp_path / "s.cfg", CONFIG.replace("2002-12-31", "31/12/2002")))


class TestTables:
    def test_fixture(self, tables):
        actual, forecast = tables
        assert set(actual) == set(forecast)
        assert set(actual) == {"G", "D_K", "H_K", "E_K", "T_K", "D_J", "H_J", "E_J", "T_J"}
        assert actual["G"][0] == 1390.4
        assert all(len(v) == 12 for v in actual.values())

    def test_labels(self):
        assert split_label("D_MAK") == ("D", "MA", "K")
        assert split_label("G_MF") == ("G", "MF", "")
        assert table_name("D_K", "MF") == "D_MFK" and table_name("G", "MA") == "G_MA"
        for bad in ("X_MAK", "G_MAK", "D_MA", "D_XXK", "G"):
            with pytest.raises(ValueError):
                split_label(bad)

    def test_short_row(self, tmp_path):
        head = "table,series," + ",".join(["jan", "feb", "mar", "apr", "may", "jun", "jul",
                                           "aug", "sep", "oct", "nov", "dec"])
        f = _write(tmp_path / "t.csv", head + "\n10,G_MA," + ",".join(["1"] * 11) + "\n")
        with pytest.raises(MalformedTable) as exc:
            read_table_rows(f)
        assert "G_MA" in str(exc.value) and ":2:" in str(exc.value)

    def test_bad_header(self, tmp_path):
        with pytest.raises(MalformedTable):
            read_table_rows(_write(tmp_path / "t.csv", "a,b,c\n"))

    def test_read_column(self, tables_path, tmp_path):
        name, vals = read_column(f"{tables_path}:G_MA")
        assert name == "G_MA" and vals[0] == 1390.4
        f = _write(tmp_path / "w.csv", "x,y\n1,2\n3,4\n")
        assert read_column(f"{f}:y") == ("y", [2.0, 4.0])
        with pytest.raises(BadValue):
            read_column(f"{f}:z")
        with pytest.raises(BadValue):
            read_column(f"{tables_path}:Z_MA")

    def test_directory_without_means(self, tmp_path):
        with pytest.raises(IoFailure):
            load_tables(tmp_path)
