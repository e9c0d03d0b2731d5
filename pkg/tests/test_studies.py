"""
Sweeps, root searches and optimizers.
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from cvmdips.constants import Layout, TpsRule
from cvmdips.data import ProtocolConfig
from cvmdips.errors import DomainError, NoKeyError, UnknownFieldError
from cvmdips.keyrate import secret_key_rate
from cvmdips.studies import (NO_CROSSOVER, Axis, SweepSpec, apply_parameter, crossover, eta_crossover,
                             eta_threshold, max_distance, optimal_variance, optimize_tps, rate_optimal_T_PS,
                             resolve_tps, sweep)


def _k_raw_at(cfg: ProtocolConfig, L: float, layout: Layout = Layout.EXTREME_ASYM) -> float:
    return secret_key_rate(cfg.at_distance(L, layout)).K_raw


class TestAxis:

    def test_range(self):
        axis = Axis.from_range("L_AC", 0, 10, 11)
        assert len(axis) == 11
        assert axis.values[-1] == 10.0

    def test_k_is_integer(self):
        assert Axis("k", (0, 1.0, 2)).values == (0, 1, 2)
        with pytest.raises(DomainError):
            Axis("k", (0.5,))

    @pytest.mark.parametrize("values", [(), (1.0, 1.0), (2.0, 1.0)])
    def test_bad_grid(self, values):
        with pytest.raises(DomainError):
            Axis("V", values)

    def test_unknown_name(self):
        with pytest.raises(UnknownFieldError):
            Axis("T", (1.0,))

    def test_unknown_output(self, caption_cfg):
        with pytest.raises(UnknownFieldError):
            SweepSpec(base=caption_cfg, axis1=Axis("V", (15.0,)), outputs=("rate",))


class TestParameters:

    def test_variance_sets_both_parties(self, caption_cfg):
        cfg = apply_parameter(caption_cfg, "V", 40.0)
        assert (cfg.source.V, cfg.link.V_B) == (40.0, 40.0)

    def test_symmetric_distance(self, caption_cfg):
        cfg = apply_parameter(caption_cfg, "L_AB_symmetric", 12.0)
        assert (cfg.link.L_AC, cfg.link.L_BC) == (6.0, 6.0)

    def test_eps_sets_both_links(self, caption_cfg):
        cfg = apply_parameter(caption_cfg, "eps", 0.05)
        assert (cfg.link.eps_A, cfg.link.eps_B) == (0.05, 0.05)

    def test_tps_rules(self, caption_cfg):
        cfg = replace(caption_cfg, source=replace(caption_cfg.source, k=1))
        assert resolve_tps(cfg, TpsRule.OPTIMAL).source.T_PS == pytest.approx(6 / 7)
        assert resolve_tps(cfg, None) is cfg


class TestSweep:

    def test_row_major_shape(self, caption_cfg):
        spec = SweepSpec(base=caption_cfg, axis1=Axis("L_AC", (0.0, 5.0, 10.0)),
                         axis2=Axis("eta", (0.85, 0.9, 0.95, 1.0)), outputs=("P", "K"))
        result = sweep(spec)
        assert len(result) == 12
        assert result.columns == ["L_AC", "eta", "P", "K", "error"]
        assert result.rows[1][:2] == (0.0, 0.9)
        assert result.rows[4][:2] == (5.0, 0.85)
        assert all(row["error"] == "" for row in result)

    def test_single_point(self, caption_cfg):
        result = sweep(SweepSpec(base=caption_cfg, axis1=Axis("V", (15.0,)), outputs=("K_raw",)))
        assert result.column("K_raw") == [secret_key_rate(caption_cfg).K_raw]

    def test_failed_points_are_kept(self, caption_cfg):
        # k >= 1 with T_PS = 1 cannot herald anything
        result = sweep(SweepSpec(base=caption_cfg, axis1=Axis("k", (0, 1))))
        assert len(result) == 2
        assert result.rows[0][-1] == ""
        assert result.column("K")[1] is None
        assert "Degenerate" in result.rows[1][-1]

    def test_rule_applied_per_point(self, caption_cfg):
        result = sweep(SweepSpec(base=caption_cfg, axis1=Axis("k", (0, 1, 2)), outputs=("P",),
                                 tps_rule=TpsRule.OPTIMAL))
        np.testing.assert_allclose(result.column("P"), [1.0, 0.25, 4 / 27], rtol=1e-9)

    def test_parallel_matches_serial(self, caption_cfg):
        spec = SweepSpec(base=caption_cfg, axis1=Axis.from_range("L_AC", 0, 20, 9), outputs=("K_raw",))
        assert sweep(spec, jobs=2).rows == sweep(spec, jobs=1).rows


class TestMaxDistance:

    def test_root_brackets_the_sign_change(self, caption_cfg):
        tol = 0.01
        root = max_distance(caption_cfg, Layout.EXTREME_ASYM, tol_km=tol)
        assert root > 1.0
        assert _k_raw_at(caption_cfg, root - tol) > 0.0
        assert _k_raw_at(caption_cfg, root + tol) < 0.0

    def test_no_reconciliation(self, caption_cfg):
        assert max_distance(replace(caption_cfg, beta=0.0)) == 0.0

    def test_rule_resolves_transmittance(self, caption_cfg):
        cfg = replace(caption_cfg, source=replace(caption_cfg.source, k=1))
        root = max_distance(cfg, tps_rule=TpsRule.OPTIMAL)
        fixed = resolve_tps(cfg, TpsRule.OPTIMAL)
        assert _k_raw_at(fixed, root - 0.01) > 0.0


class TestThresholds:

    def test_eta_threshold(self, short_link_cfg):
        eta = eta_threshold(short_link_cfg, tol=1e-6)
        assert 0.0 < eta < short_link_cfg.link.eta
        at = replace(short_link_cfg, link=replace(short_link_cfg.link, eta=eta + 1e-5))
        assert secret_key_rate(at).K_raw > 0.0

    def test_eta_threshold_without_key(self, caption_cfg):
        with pytest.raises(NoKeyError):
            eta_threshold(caption_cfg.at_distance(200.0, Layout.EXTREME_ASYM))

    def test_identical_curves_never_cross(self, caption_cfg):
        assert crossover(caption_cfg, caption_cfg) is NO_CROSSOVER
        assert eta_crossover(caption_cfg.at_distance(5.0, Layout.EXTREME_ASYM),
                             caption_cfg.at_distance(5.0, Layout.EXTREME_ASYM)) is NO_CROSSOVER


class TestOptimizers:

    def test_optimal_variance_beats_its_grid(self, short_link_cfg):
        V_star, K_star = optimal_variance(short_link_cfg, (1.5, 500.0))
        assert 1.5 <= V_star <= 500.0
        for V in np.geomspace(1.5, 500.0, 200):
            assert K_star >= secret_key_rate(apply_parameter(short_link_cfg, "V", float(V))).K_raw - 1e-12

    def test_optimal_variance_range(self, short_link_cfg):
        with pytest.raises(DomainError):
            optimal_variance(short_link_cfg, (1.0, 10.0))

    def test_optimal_variance_without_key(self, caption_cfg):
        with pytest.raises(NoKeyError):
            optimal_variance(caption_cfg.at_distance(300.0, Layout.EXTREME_ASYM))

    def test_rate_rule_beats_probability_rule(self, subtracted_cfg):
        cfg = subtracted_cfg.at_distance(5.0, Layout.EXTREME_ASYM)
        by_probability = optimize_tps(cfg, TpsRule.OPTIMAL)
        by_rate = optimize_tps(cfg, TpsRule.RATE)
        np.testing.assert_allclose(by_probability["T_PS"], 6 / 7, rtol=1e-12)
        assert by_rate["K_raw"] >= by_probability["K_raw"] - 1e-9 * abs(by_probability["K_raw"])
        assert 0.0 < by_rate["T_PS"] < 1.0

    def test_rate_rule_without_subtraction(self, caption_cfg):
        assert rate_optimal_T_PS(caption_cfg) == 1.0
        assert math.isclose(optimize_tps(caption_cfg, TpsRule.RATE)["P"], 1.0)
