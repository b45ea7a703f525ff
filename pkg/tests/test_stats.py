import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from solarstudy.errors import LengthMismatch, RankDeficient, TooFewObservations, ZeroVariance
from solarstudy.stats import betainc, ols, pearson, t_two_sided_p

scipy_stats = pytest.importorskip("scipy.stats")
scipy_special = pytest.importorskip("scipy.special")


class TestTDistribution:
    def test_zero(self):
        for df in (1, 2, 5, 100):
            assert t_two_sided_p(0.0, df) == 1.0

    def test_cauchy(self):
        assert t_two_sided_p(1.0, 1) == pytest.approx(0.5, rel=1e-12)

    def test_table_value(self):
        assert t_two_sided_p(2.228, 10) == pytest.approx(0.050, abs=1e-3)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 1.8856, 3.0, 10.0, 250.0])
    def test_df2_closed_form(self, t):
        closed = 2 * (1 - (0.5 + t / (2 * math.sqrt(2 + t * t))))
        assert t_two_sided_p(t, 2) == pytest.approx(closed, rel=1e-10, abs=1e-15)

    @pytest.mark.parametrize("df", [1, 2, 3, 7, 10, 30, 200, 5000])
    @pytest.mark.parametrize("t", [0.01, 0.7, 2.0, 4.5, 12.0])
    def test_against_scipy(self, t, df):
        ref = 2 * scipy_stats.t.sf(t, df)
        assert t_two_sided_p(t, df) == pytest.approx(ref, rel=1e-8, abs=1e-300)

    def test_sign_symmetric(self):
        assert t_two_sided_p(-2.5, 6) == t_two_sided_p(2.5, 6)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.01, 50), st.floats(0.01, 50), st.integers(1, 300))
    def test_monotone(self, a, b, df):
        assume(abs(a - b) > 1e-6)
        lo, hi = sorted((a, b))
        assert t_two_sided_p(lo, df) > t_two_sided_p(hi, df) or t_two_sided_p(hi, df) == 0.0

    def test_bad_df(self):
        with pytest.raises(ValueError):
            t_two_sided_p(1.0, 0)

    @pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.3), (5.0, 0.5, 0.9), (2.0, 3.0, 0.5),
                                       (100.0, 0.5, 0.99), (0.5, 50.0, 0.001)])
    def test_betainc(self, a, b, x):
        assert betainc(a, b, x) == pytest.approx(scipy_special.betainc(a, b, x), rel=1e-10)


class TestPearson:
    def test_hand_example(self):
        c = pearson([1, 2, 3, 4], [1, 3, 2, 4])
        assert c.r == pytest.approx(0.8, abs=1e-14)
        assert c.t == pytest.approx(0.8 * math.sqrt(2) / 0.6, rel=1e-12)
        assert c.p == pytest.approx(0.2, abs=1e-12)
        assert c.n == 4

    def test_self(self):
        x = [3.0, 1.0, 4.0, 1.5, 9.0]
        c = pearson(x, x)
        assert c.r == 1.0 and c.p == 0.0

    def test_negated(self):
        c = pearson([1, 2, 3], [3, 2, 1])
        assert c.r == -1.0 and c.p == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pearson([1, 2, 3], [1, 2])

    def test_constant(self):
        with pytest.raises(ZeroVariance):
            pearson([1, 2, 3], [5, 5, 5])

    def test_too_few(self):
        with pytest.raises(TooFewObservations):
            pearson([1, 2], [2, 1])

    def test_against_scipy(self):
        rng = np.random.default_rng(1)
        for n in (3, 5, 12, 40):
            x, y = rng.standard_normal(n), rng.standard_normal(n)
            ref = scipy_stats.pearsonr(x, y)
            c = pearson(x, y)
            assert c.r == pytest.approx(ref[0], abs=1e-12)
            assert c.p == pytest.approx(ref[1], rel=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=4, max_size=15),
           st.floats(0.1, 10), st.floats(-10, 10), st.floats(0.1, 10), st.floats(-10, 10),
           st.booleans())
    def test_scale_equivariance(self, xs, a, b, c, d, flip):
        x = np.array(xs)
        y = np.sin(np.arange(len(x)) * 1.3) + 0.01 * x
        assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
        base = pearson(x, y)
        sgn = -1 if flip else 1
        other = pearson(sgn * a * x + b, c * y + d)
        assert other.r == pytest.approx(sgn * base.r, abs=1e-9)
        assert other.p == pytest.approx(base.p, abs=1e-7)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal(12), rng.standard_normal(12)
        assert pearson(x, y).r == pearson(y, x).r


class TestOls:
    def test_exact_line(self):
        f = ols([3, 5, 7], {"x": [1, 2, 3]})
        assert f.intercept == pytest.approx(1) and f.slopes["x"] == pytest.approx(2)
        assert f.s == pytest.approx(0, abs=1e-12) and f.r2 == pytest.approx(1)

    def test_hand_example(self):
        f = ols([1, 2, 2, 3], {"x": [1, 2, 3, 4]})
        assert f.slopes["x"] == pytest.approx(0.6) and f.intercept == pytest.approx(0.5)
        assert f.sse == pytest.approx(0.2) and f.r2 == pytest.approx(0.9)
        assert f.s == pytest.approx(0.31623, abs=1e-5)

    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            X = rng.standard_normal((12, 4))
            y = rng.standard_normal(12)
            A = np.column_stack([np.ones(12), X])
            ref = np.linalg.solve(A.T @ A, A.T @ y)
            f = ols(y, {f"x{i}": X[:, i] for i in range(4)})
            got = np.r_[f.intercept, list(f.slopes.values())]
            np.testing.assert_allclose(got, ref, rtol=1e-6, atol=1e-12)

    def test_invariants(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((12, 4))
        y = X @ [1.0, -2.0, 0.5, 0.0] + rng.standard_normal(12)
        f = ols(y, {f"x{i}": X[:, i] for i in range(4)})
        np.testing.assert_allclose(f.fitted + f.residuals, y, atol=1e-10)
        assert abs(f.residuals.sum()) < 1e-8
        for i in range(4):
            assert abs(f.residuals @ (X[:, i] - X[:, i].mean())) < 1e-8
        assert f.s == pytest.approx(math.sqrt(f.sse / (12 - 4 - 1)))
        assert f.r2 == pytest.approx(1 - f.sse / f.sst)
        assert f.names == ("x0", "x1", "x2", "x3")

    def test_rank_deficient_names_column(self):
        x = np.arange(6.0)
        with pytest.raises(RankDeficient) as exc:
            ols(np.arange(6.0) ** 2, {"a": x, "b": np.sin(x), "c": 2 * x + 1})
        assert set(exc.value.columns) & {"a", "c"}
        assert "b" not in exc.value.columns

    def test_constant_column(self):
        with pytest.raises(RankDeficient) as exc:
            ols([1, 2, 3, 5], {"one": [1, 1, 1, 1]})
        assert exc.value.columns

    def test_too_few(self):
        with pytest.raises(TooFewObservations):
            ols([1, 2, 3], {"a": [1, 2, 3], "b": [0, 1, 0]})

    def test_equation_format(self):
        f = ols([1, 2, 2, 3], {"x": [1, 2, 3, 4]})
        assert f.equation("y") == "y = 0.5 + 0.6 x"
        assert f.summary_line() == "S = 0.316228  R^2 = 90.0%"
