import json
import math

import numpy as np
import pytest

from lobq import xval
from lobq.xval import (
    ComparisonReport,
    MC_QUANTITIES,
    OracleConfig,
    OracleError,
    mc_compare,
    oracle_dirichlet,
    oracle_survival,
    run_criterion,
)


def erlang_survival(x: int, rate: float, t: float) -> float:
    """P[Erlang(x, rate) > t] via the Poisson-count identity."""
    mu = rate * t
    return math.exp(-mu) * sum(mu**k / math.factorial(k) for k in range(x))


class TestOracleSurvival:
    def test_at_zero(self, params_near_balanced):
        vals = oracle_survival(4, 5, [0.0, 1.0], params_near_balanced)
        assert vals[0] == 1.0

    def test_pure_death_is_erlang(self):
        # lam = 0: the queue only shrinks, depletion after x removals
        ts = np.array([0.1, 0.5, 1.0, 3.0])
        for x in (1, 3, 6):
            got, err = xval._bd_survival_curve(x, 0.0, 2.0, ts, 50, 10_000)
            assert err < 1e-10
            for t, g in zip(ts, got):
                assert g == pytest.approx(erlang_survival(x, 2.0, t), abs=1e-10)

    def test_insufficient_truncation_fails(self, params_near_balanced):
        with pytest.raises((OracleError, ValueError)):
            oracle_survival(4, 5, [5.0], params_near_balanced, OracleConfig(queue_truncation=6))

    def test_budget_guard(self, params_near_balanced):
        with pytest.raises(OracleError):
            oracle_survival(4, 5, [50.0], params_near_balanced,
                            OracleConfig(time_step_budget=100))

    def test_matches_analytic_curve(self, params_near_balanced):
        from lobq.analytics import survival_curve

        ts = np.array([0.0, 0.3, 1.0, 2.0, 7.0])
        exact = oracle_survival(4, 5, ts, params_near_balanced)
        got = survival_curve(4, 5, ts, params_near_balanced)
        assert np.max(np.abs(exact - got)) <= 1e-6


class TestOracleDirichlet:
    def test_symmetric_start(self, params_balanced):
        val, sens = oracle_dirichlet(1, 1, params_balanced, OracleConfig(queue_truncation=150))
        assert val == pytest.approx(0.5, abs=1e-10)

    def test_row_sums(self, params_balanced):
        cfg = OracleConfig(queue_truncation=150)
        for n, p in ((1, 2), (3, 5), (7, 4)):
            a, _ = oracle_dirichlet(n, p, params_balanced, cfg)
            b, _ = oracle_dirichlet(p, n, params_balanced, cfg)
            assert a + b == pytest.approx(1.0, abs=1e-8)

    def test_doubling_sensitivity_small(self, params_balanced):
        cfg = OracleConfig(queue_truncation=200)
        for n, p in ((1, 1), (3, 2), (2, 5), (5, 5), (8, 3)):
            _, sens = oracle_dirichlet(n, p, params_balanced, cfg)
            assert sens < 1e-6


class TestMcCompare:
    def test_registry_complete(self):
        expected = {
            "duration_survival",
            "tail_slope",
            "first_move_probability",
            "p_n",
            "autocovariance",
            "expected_duration",
            "diffusion_vol_balanced",
            "diffusion_vol_unbalanced",
        }
        assert set(MC_QUANTITIES) == expected

    def test_unknown_quantity(self, params_unbalanced, f_symmetric):
        with pytest.raises(KeyError):
            mc_compare("nonsense", params_unbalanced, f_symmetric)

    def test_first_move_runs_and_passes(self, params_unbalanced, f_symmetric):
        cfg = OracleConfig(mc_paths=30_000, mc_seed=5)
        rep = mc_compare("first_move_probability", params_unbalanced, f_symmetric, cfg,
                         bid=2, ask=1)
        assert rep.passed
        assert rep.se is not None and rep.se > 0

    def test_deterministic_reports(self, params_unbalanced, f_symmetric):
        cfg = OracleConfig(mc_paths=20_000, mc_seed=77)
        r1 = mc_compare("first_move_probability", params_unbalanced, f_symmetric, cfg)
        r2 = mc_compare("first_move_probability", params_unbalanced, f_symmetric, cfg)
        assert json.dumps(r1.as_dict(), sort_keys=True) == json.dumps(r2.as_dict(), sort_keys=True)

    def test_expected_duration_band(self, params_unbalanced, f_symmetric):
        cfg = OracleConfig(mc_paths=100_000, mc_seed=9)
        rep = mc_compare("expected_duration", params_unbalanced, f_symmetric, cfg, x=1, y=1)
        assert rep.passed

    def test_report_pass_rules(self):
        rep = ComparisonReport("q", 1.0, 1.05, 0.05, tolerance=0.1, passed=True)
        d = rep.as_dict()
        assert d["passed"] and d["tolerance"] == 0.1
        assert xval._report("q", 1.0, 1.2, 0.2, se=0.05).passed is False
        assert xval._report("q", 1.0, 1.1, 0.1, se=0.05).passed is True


class TestCriteria:
    def test_unknown_criterion(self):
        with pytest.raises(ValueError):
            run_criterion(99)

    def test_criterion_result_serializes(self):
        res = run_criterion(1)
        d = res.as_dict()
        assert d["number"] == 1
        assert isinstance(json.dumps(d), str)

    def test_suite_subset(self):
        suite = xval.run_suite([1])
        assert len(suite.results) == 1
        assert "criterion 1" in suite.table()
