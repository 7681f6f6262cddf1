"""Inequality check-bench tests.

Core claims:
    - every check is deterministic: rerunning yields an identical report
    - passing reports keep worst_ratio on the correct side of 1
    - witnesses re-evaluate to their recorded values
    - the registry runs any named check and rejects unknown ids
"""

import math

import pytest

from combwalk import estimates as est
from combwalk import kernel as kn
from combwalk.graph import log_comb

FAST_OVERRIDES = {
    "hku1": {"n_grid": (8, 16, 32)},
    "hkbound": {"x_radius": 6, "n_max": 16, "r_max": 8},
    "hku2": {"N_grid": (16, 32)},
    "lower-corollary": {"N_grid": (16, 32)},
    "exit-time": {"N_grid": (16, 32), "r_grid": (1, 4)},
    "hk1d": {"L_grid": (16, 32)},
    "lemma21": {"n_max": 20, "quad_n_max": 120},
    "secmomH-shape": {"N_grid": (16,)},
}


class TestDeterminism:
    @pytest.mark.parametrize("name", sorted(est.ALL_CHECKS))
    def test_rerun_identical(self, name):
        kwargs = FAST_OVERRIDES.get(name, {})
        fn = est.ALL_CHECKS[name]
        if name in ("hk1d", "PZI"):
            a = [r.to_dict() for r in fn(**kwargs)]
            b = [r.to_dict() for r in fn(**kwargs)]
        else:
            a = [r.to_dict() for r in fn(1.0, **kwargs)]
            b = [r.to_dict() for r in fn(1.0, **kwargs)]
        assert a == b


class TestOrientation:
    def test_explicit_ratios(self):
        reports = []
        reports += est.check_hkbound(1.0, x_radius=6, n_max=16, r_max=8)
        reports += est.check_lemma21_and_quadruple(1.0, 20, 120)
        reports += est.check_paley_zygmund()
        for rep in reports:
            if not rep.explicit or not rep.passed:
                continue
            if rep.orientation == "upper":
                assert rep.worst_ratio <= 1.0
            else:
                assert rep.worst_ratio >= 1.0


class TestWitnesses:
    def test_hk1d_witness_reevaluates(self):
        rep = est.check_hk1d(L_grid=(16, 32))[0]
        for wit in rep.witnesses:
            q = kn.kernel_1d(wit["L"], wit["x"], wit["y"], wit["n"])
            assert q == pytest.approx(wit["q"], abs=1e-10)

    def test_hku1_witness_reevaluates(self):
        rep = est.check_hku1(1.0, (8, 16))[0]
        spec = log_comb(1.0)
        for wit in rep.witnesses:
            k = wit["n"] // 2
            series = kn.on_diagonal_series(spec, wit["x"], wit["n"])
            assert series[k] == pytest.approx(wit["lhs"], abs=1e-10)

    def test_lemma21_witness_reevaluates(self):
        rep = est.check_lemma21_and_quadruple(1.0, 20, 120)[0]
        spec = log_comb(1.0)
        wit = rep.witnesses[0]
        lhs = kn.triple_collision_probability(
            spec, (0, 0), (0, 0), (0, 0), wit["n"])
        assert lhs == pytest.approx(wit["lhs"], abs=1e-12)


class TestIndividualChecks:
    def test_hkbound_exact_subgrid(self):
        rep = est.check_hkbound(1.0, x_radius=4, n_max=10, r_max=6,
                                exact_subgrid=True)[0]
        assert rep.passed
        sub = rep.details["exact_subgrid"]
        assert sub["pass"] and sub["max_float_error"] < 1e-12

    def test_pz_battery_passes(self):
        rep = est.check_paley_zygmund()[0]
        assert rep.passed and rep.worst_ratio >= 1.0
        assert rep.details["points_checked"] >= 100

    def test_quadruple_block_ratios(self):
        quad = est.check_lemma21_and_quadruple(1.0, 12, 400)[1]
        for label, ratio in quad.details["block_sum_ratios"].items():
            assert 0.3 < ratio < 1.0, (label, ratio)

    def test_exit_time_empty_points_reported(self):
        reports = est.check_exit_time_bounds(1.0, N_grid=(4,),
                                             r_grid=(1, 2))
        lower = [r for r in reports if r.bound_id == "exit-time-lower"][0]
        assert not lower.per_point
        assert lower.details["empty_grid_points"]

    def test_moment_shape_dual_route(self):
        rep = est.check_moment_shape(1.0, (16,))[0]
        d = rep.details["16"]
        assert d["E_H2"] == pytest.approx(d["E_H2_from_law"], rel=1e-8)

    def test_trend_helpers(self):
        assert est._trend_ok("upper", 0.04)
        assert not est._trend_ok("upper", 0.06)
        assert est._trend_ok("lower", -0.04)
        assert not est._trend_ok("lower", -0.06)
        assert est._trend_ok("lower", None)


class TestRegistry:
    def test_unknown_id(self):
        with pytest.raises(KeyError):
            est.run_checks("bogus")

    def test_single_check_with_override(self):
        reports = est.run_checks("hk1d", overrides={"hk1d":
                                                    {"L_grid": (16, 32)}})
        assert len(reports) == 1
        assert reports[0].grid["L"] == [16, 32]

    def test_alpha_grid_fanout(self):
        reports = est.run_checks("hku1", alpha_grid=(0.5, 1.0),
                                 overrides={"hku1": {"n_grid": (8, 16)}})
        assert [r.grid["alpha"] for r in reports] == [0.5, 1.0]
