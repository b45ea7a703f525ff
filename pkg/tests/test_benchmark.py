import importlib.util

import pytest

from solarstudy import BACKEND

from .conftest import ROOT


@pytest.mark.skipif(BACKEND != "cython", reason="compiled kernels not built")
def test_benchmark_runs(capsys):
    spec = importlib.util.spec_from_file_location("bench_kernels",
                                                  ROOT / "benchmarks" / "bench_kernels.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--n", "60", "--repeat", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split()[:2] == ["case", "cython"]
    assert len(out) == 7
