import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from solarstudy import _kernels_py, arma
from solarstudy.arma import (ArmaModel, Candidate, aicc, arma_model, choose_candidate, fit,
                             forecast, gaussian_loglik, hannan_rissanen, refine_mle,
                             select_order, simulate)
from solarstudy.errors import (DegenerateSampleSize, NoConvergedCandidate, NonCausalModel,
                               NonInvertibleModel, OptimizationDiverged, SeriesTooShort,
                               SingularDesign)
from solarstudy.timeseries import difference


def with_n(model, n):
    return ArmaModel(model.p, model.q, model.ar, model.ma, model.mean, model.sigma2,
                     math.nan, math.nan, n)


class TestAicc:
    @pytest.mark.parametrize("ll,p,q,n,expected", [(0, 0, 0, 10, 2.5),
                                                    (-100, 1, 1, 100, 206.25),
                                                    (-10, 2, 0, 50, 20 + 300 / 46)])
    def test_examples(self, ll, p, q, n, expected):
        assert aicc(ll, p, q, n) == pytest.approx(expected, rel=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleSize):
            aicc(0.0, 2, 2, 6)


class TestLoglik:
    def test_white_noise_zeros(self):
        m = with_n(arma_model(), 3)
        assert gaussian_loglik(m, [0, 0, 0]) == pytest.approx(-1.5 * math.log(2 * math.pi))

    def test_white_noise_one_residual(self):
        m = with_n(arma_model(), 3)
        assert gaussian_loglik(m, [1, 0, 0]) == pytest.approx(-1.5 * math.log(2 * math.pi) - 0.5)

    def test_ar1_bivariate_closed_form(self):
        phi, s2 = 0.5, 1.3
        m = with_n(arma_model((phi,), (), 0.0, s2), 2)
        x = np.array([0.7, -0.4])
        var = s2 / (1 - phi ** 2)
        S = np.array([[var, phi * var], [phi * var, var]])
        ref = -0.5 * (np.log(np.linalg.det(S)) + x @ np.linalg.solve(S, x) + 2 * math.log(2 * math.pi))
        assert gaussian_loglik(m, x) == pytest.approx(ref, rel=1e-13)

    def test_mean_is_subtracted(self):
        m0 = with_n(arma_model((0.3,), (0.2,), 0.0), 4)
        m5 = with_n(arma_model((0.3,), (0.2,), 5.0), 4)
        x = np.array([0.1, -0.3, 0.8, 0.2])
        assert gaussian_loglik(m5, x + 5.0) == pytest.approx(gaussian_loglik(m0, x), rel=1e-12)

    def test_non_causal(self):
        with pytest.raises(NonCausalModel):
            gaussian_loglik(with_n(arma_model((1.2,)), 3), [0, 1, 2])

    def test_non_invertible(self):
        with pytest.raises(NonInvertibleModel):
            gaussian_loglik(with_n(arma_model((), (1.0,)), 3), [0, 1, 2])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            gaussian_loglik(with_n(arma_model(), 3), [0, 1])


class TestHannanRissanen:
    def test_white_noise(self):
        x = np.random.default_rng(0).standard_normal(100) + 3
        m = hannan_rissanen(x, 0, 0)
        assert m.ar == () and m.ma == ()
        assert m.mean == pytest.approx(x.mean())
        assert m.sigma2 == pytest.approx(np.var(x))

    def test_ar1(self):
        x = simulate(arma_model((0.8,)), 2000, 1)
        assert abs(hannan_rissanen(x, 1, 0).ar[0] - 0.8) < 0.1

    def test_ma1(self):
        x = simulate(arma_model((), (0.5,)), 2000, 1)
        assert abs(hannan_rissanen(x, 0, 1).ma[0] - 0.5) < 0.1

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            hannan_rissanen(np.arange(23.0), 1, 1)

    def test_singular(self):
        with pytest.raises(SingularDesign):
            hannan_rissanen(np.ones(50), 1, 0)

    def test_aicc_identity(self):
        x = simulate(arma_model((0.5,), (0.3,)), 300, 2)
        m = hannan_rissanen(x, 1, 1)
        assert m.aicc == pytest.approx(aicc(m.loglik, 1, 1, 300), abs=1e-10)


class TestRefine:
    def test_fixed_point(self):
        x = simulate(arma_model((0.6,), (0.3,)), 500, 3)
        once = fit(x, 1, 1)
        twice = refine_mle(once, x)
        np.testing.assert_allclose(np.r_[twice.ar, twice.ma], np.r_[once.ar, once.ma], atol=1e-8)

    def test_arma11_recovery(self):
        x = simulate(arma_model((0.6,), (0.3,)), 2000, 4)
        hr = hannan_rissanen(x, 1, 1)
        m = refine_mle(hr, x)
        assert abs(m.ar[0] - 0.6) < 0.1 and abs(m.ma[0] - 0.3) < 0.1
        assert m.loglik >= hr.loglik - 1e-9

    def test_empty_parameter_space(self):
        x = np.random.default_rng(1).standard_normal(50)
        init = hannan_rissanen(x, 0, 0)
        assert refine_mle(init, x) is init

    @pytest.mark.parametrize("seed", range(5))
    def test_monotone(self, seed):
        x = simulate(arma_model((0.4, -0.2), (0.5,)), 400, seed)
        for p, q in [(1, 1), (2, 1), (2, 2), (3, 1)]:
            init = arma.stabilize(hannan_rissanen(x, p, q), x)
            assert refine_mle(init, x).loglik >= init.loglik - 1e-9

    def test_iteration_cap(self):
        x = simulate(arma_model((0.5, 0.2), (0.4, 0.3)), 400, 9)
        init = arma.stabilize(hannan_rissanen(x, 3, 3), x)
        with pytest.raises(OptimizationDiverged):
            refine_mle(init, x, max_iter=1)

    def test_invertibility_enforced(self):
        x = simulate(arma_model((), (0.95,)), 300, 5)
        m = fit(x, 0, 2)
        assert arma.is_invertible(m.ma)

    def test_without_invertibility_still_causal(self):
        x = simulate(arma_model((0.7,), (0.4,)), 300, 6)
        m = fit(x, 1, 1, enforce_invertibility=False)
        assert arma.is_causal(m.ar)
        assert m.loglik >= fit(x, 1, 1).loglik - 1e-6


class TestSelectOrder:
    def test_single_candidate(self):
        x = np.random.default_rng(0).standard_normal(80)
        m, rep = select_order(x, 0, 0)
        assert m.order == (0, 0) and len(rep.candidates) == 1 and rep.chosen == (0, 0)

    def test_tie_break(self):
        cands = [Candidate(2, 0, 10.0, True), Candidate(0, 2, 10.0, True),
                 Candidate(1, 2, 10.0 + 5e-13, True), Candidate(0, 0, 11.0, True)]
        win, tie = choose_candidate(cands)
        assert (win.p, win.q) == (0, 2) and tie

    def test_tie_prefers_fewer_parameters(self):
        cands = [Candidate(1, 1, 3.0, True), Candidate(1, 0, 3.0, True)]
        assert choose_candidate(cands)[0].q == 0

    def test_no_tie(self):
        win, tie = choose_candidate([Candidate(1, 1, 3.0, True), Candidate(1, 0, 4.0, True)])
        assert (win.p, win.q) == (1, 1) and not tie

    def test_non_converged_ignored(self):
        win, _ = choose_candidate([Candidate(1, 1, math.nan, False), Candidate(0, 0, 9.0, True)])
        assert (win.p, win.q) == (0, 0)

    def test_nothing_converged(self):
        with pytest.raises(NoConvergedCandidate):
            select_order(np.arange(10.0), 2, 2)

    def test_infeasible_candidates_flagged(self):
        x = np.random.default_rng(2).standard_normal(26)
        _, rep = select_order(x, 2, 2)
        flags = {(c.p, c.q): c.converged for c in rep.candidates}
        assert flags[0, 0] and not flags[2, 2]

    def test_report_lists_grid(self):
        x = simulate(arma_model((0.5,)), 300, 0)
        m, rep = select_order(x, 2, 1)
        assert [(c.p, c.q) for c in rep.candidates] == [(p, q) for p in range(3) for q in range(2)]
        best = min(c.aicc for c in rep.candidates if c.converged)
        assert m.aicc == best and rep.chosen == m.order

    def test_serial_equals_concurrent(self):
        x = simulate(arma_model((0.5,), (0.3,)), 300, 1)
        a, ra = select_order(x, 2, 2)
        with ThreadPoolExecutor(3) as ex:
            b, rb = select_order(x, 2, 2, executor=ex)
        assert a == b and ra == rb

    def test_aicc_identity_every_candidate(self):
        x = simulate(arma_model((0.5,), (0.3,)), 300, 1)
        for p in range(3):
            for q in range(3):
                m = fit(x, p, q)
                assert m.aicc == pytest.approx(aicc(m.loglik, p, q, m.n), abs=1e-10)

    def test_pure_python_backend(self, monkeypatch):
        x = simulate(arma_model((0.6,)), 200, 3)
        fast, _ = select_order(x, 1, 1)
        monkeypatch.setattr(arma, "kernels", _kernels_py)
        slow, _ = select_order(x, 1, 1)
        assert slow.order == fast.order
        np.testing.assert_allclose(np.r_[slow.ar, slow.ma], np.r_[fast.ar, fast.ma], atol=1e-4)


class TestForecast:
    def test_white_noise(self):
        x = np.random.default_rng(0).standard_normal(50)
        m = with_n(arma_model((), (), 2.5, 1.7), 50)
        f = forecast(m, x, 4)
        assert f.point.tolist() == [2.5] * 4
        np.testing.assert_allclose(f.mse, 1.7)

    def test_ar1_closed_form(self):
        m = with_n(arma_model((0.5,), (), 0.0, 1.0), 3)
        f = forecast(m, [0.3, -1.0, 2.0], 2)
        np.testing.assert_allclose(f.point, [1.0, 0.5], atol=1e-12)

    def test_ar1_powers_with_mean(self):
        x = simulate(arma_model((0.7,), (), 1.0), 100, 2)
        m = with_n(arma_model((0.7,), (), 1.0), 100)
        f = forecast(m, x, 6)
        expected = 1.0 + 0.7 ** np.arange(1, 7) * (x[-1] - 1.0)
        np.testing.assert_allclose(f.point, expected, atol=1e-10)

    def test_ma1_memory(self):
        x = simulate(arma_model((), (0.6,), 3.0), 80, 2)
        m = with_n(arma_model((), (0.6,), 3.0), 80)
        f = forecast(m, x, 5)
        assert f.point[1:].tolist() == [3.0] * 4

    def test_one_step_matches_innovations(self):
        x = simulate(arma_model((0.5, -0.2), (0.3,)), 150, 1)
        m = fit(x, 2, 1)
        err, _ = arma.kernels.innovations_errors(np.r_[x, 0.0] - m.mean, m.ar, m.ma)
        # appended observation is 0, so its predictor is 0 minus its prediction error
        one_step = -err[-1]
        assert forecast(m, x, 1).point[0] == pytest.approx(one_step, abs=1e-8)

    def test_mse_nondecreasing_ar(self):
        x = simulate(arma_model((0.9, -0.3)), 200, 4)
        m = fit(x, 2, 0)
        assert np.all(np.diff(forecast(m, x, 30).mse) >= -1e-12)

    def test_matches_gaussian_conditioning(self):
        m = with_n(arma_model((0.5, -0.3), (0.4, 0.2, -0.1), 0.3, 2.0), 60)
        x = simulate(m, 60, 1)
        h = 8
        g = arma.kernels.arma_acvf(m.ar, m.ma, 60 + h) * m.sigma2
        i = np.arange(60 + h)
        C = g[np.abs(i[:, None] - i[None, :])]
        S11, S21, S22 = C[:60, :60], C[60:, :60], C[60:, 60:]
        pt = m.mean + S21 @ np.linalg.solve(S11, x - m.mean)
        cov = S22 - S21 @ np.linalg.solve(S11, S21.T)
        f = forecast(m, x, h)
        np.testing.assert_allclose(f.point, pt, atol=1e-12)
        np.testing.assert_allclose(f.mse, np.diag(cov), atol=1e-12)
        L = np.tril(np.ones((h, h)))
        g = forecast(m, x, h, anchor=5.0)
        assert g.scale == "original"
        np.testing.assert_allclose(g.point, 5.0 + np.cumsum(pt), atol=1e-12)
        np.testing.assert_allclose(g.mse, np.diag(L @ cov @ L.T), atol=1e-11)

    def test_integrates_to_levels(self):
        levels = np.cumsum(simulate(arma_model((0.4,)), 200, 8)) + 100
        d = difference(levels, 1)
        m = fit(d.values, 1, 0)
        f = forecast(m, d.values, 3, anchor=levels[-1])
        diff_f = forecast(m, d.values, 3)
        np.testing.assert_allclose(f.point, levels[-1] + np.cumsum(diff_f.point))

    def test_non_causal(self):
        with pytest.raises(NonCausalModel):
            forecast(with_n(arma_model((1.5,)), 5), np.zeros(5), 2)

    def test_bad_horizon(self):
        with pytest.raises(ValueError):
            forecast(with_n(arma_model(), 5), np.zeros(5), 0)


class TestSimulate:
    def test_zero_variance(self):
        x = simulate(arma_model((0.5,), (0.2,), 4.0, 0.0), 20, 1)
        assert x.tolist() == [4.0] * 20

    def test_deterministic(self):
        m = arma_model((0.5,), (0.2,))
        assert np.array_equal(simulate(m, 50, 7), simulate(m, 50, 7))
        assert not np.array_equal(simulate(m, 50, 7), simulate(m, 50, 8))

    def test_white_noise_variance(self):
        x = simulate(arma_model((), (), 0.0, 4.0), 100000, 3)
        assert abs(x.var() / 4.0 - 1) < 0.02


@pytest.mark.slow
@pytest.mark.parametrize("ar,ma", [((0.8,), ()), ((), (0.5,)), ((0.6,), (0.3,))])
def test_estimation_consistency(ar, ma):
    errs = []
    for seed in range(20):
        x = simulate(arma_model(ar, ma), 2000, 100 + seed)
        m = fit(x, len(ar), len(ma))
        errs.append(np.mean(np.abs(np.r_[m.ar, m.ma] - np.r_[ar, ma])))
    assert np.mean(errs) < 0.1
