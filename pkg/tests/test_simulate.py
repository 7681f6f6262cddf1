"""Monte Carlo engine tests.

Core claims:
    - the jit core and the pure-Python reference produce identical records
    - records are bit-identical across reruns and worker counts
    - counters are monotone in the horizon and mutually consistent
      (H1 <= HN, C >= recorded collision times, sigma = first collision)
    - parity-blocked starts never collide; lone walkers have no collision
      fields
    - custom-height combs reproduce the log comb when heights coincide
    - growth checkpoints and exit-time summaries are sane
"""

import math
import warnings

import numpy as np
import pytest

from combwalk import graph as g
from combwalk.simulate import (
    Estimate,
    SimConfig,
    checkpoint_counts,
    estimate_first_meeting_prob,
    exit_time_stats,
    growth_statistic,
    reference_replica,
    run_replicas,
    simulate_replica,
)

LOG1 = g.log_comb(1.0)


def base_config(**kw):
    args = dict(spec=LOG1, starts=[(0, 0)] * 3, horizon=300, N=16, h=4,
                eps=0.25, replicas=6, master_seed=99)
    args.update(kw)
    return SimConfig(**args)


class TestReferenceEquality:
    @pytest.mark.parametrize("kw", [
        {},
        {"probe_time": 17},
        {"starts": [(0, 0)], "horizon": 800},
        {"starts": [(2, 0), (0, 0), (4, 0), (0, 0)], "horizon": 250},
        {"spec": g.poly_comb(1.0), "starts": [(1, 1), (1, 1), (3, 0)]},
        {"stop_after_exit": True, "N": 4, "horizon": 5000},
    ])
    def test_jit_matches_reference(self, kw):
        cfg = base_config(**kw)
        for rid in (0, 3):
            assert simulate_replica(cfg, rid) == reference_replica(cfg, rid)


class TestDeterminism:
    def test_rerun_identical(self):
        cfg = base_config()
        assert simulate_replica(cfg, 2) == simulate_replica(cfg, 2)

    def test_worker_count_irrelevant(self):
        cfg = base_config(replicas=12)
        assert run_replicas(cfg, jobs=1) == run_replicas(cfg, jobs=5)

    def test_callback_order(self):
        cfg = base_config(replicas=10)
        seen = []
        run_replicas(cfg, jobs=4, callback=lambda r: seen.append(r.replica_id))
        assert seen == list(range(10))

    def test_distinct_replicas_differ(self):
        cfg = base_config(horizon=500)
        assert simulate_replica(cfg, 0) != simulate_replica(cfg, 1)


class TestCounters:
    def test_monotone_in_horizon(self):
        short = base_config(horizon=150)
        full = base_config(horizon=300)
        for rid in range(4):
            a, b = simulate_replica(short, rid), simulate_replica(full, rid)
            assert a.c_total <= b.c_total
            assert a.h1 <= b.h1 and a.h2 <= b.h2 and a.h_n <= b.h_n
            # the stream prefix is shared, so early counters agree
            assert b.collision_times[: len(a.collision_times)][:3] == \
                a.collision_times[:3]

    def test_consistency(self):
        cfg = base_config(replicas=40, horizon=400)
        for rec in run_replicas(cfg, jobs=4):
            assert rec.h1 <= rec.h_n
            assert rec.h_n <= rec.c_total
            assert rec.c_total >= len(rec.collision_times)
            if rec.collision_times:
                assert rec.sigma == min(0, rec.collision_times[0]) or \
                    rec.sigma == rec.collision_times[0] or rec.sigma == 0
            obs = [t for t in rec.theta if t >= 0]
            if obs:
                assert rec.theta_combined == min(obs)

    def test_sigma_zero_on_coincident_starts(self):
        rec = simulate_replica(base_config(), 1)
        assert rec.sigma == 0

    def test_lone_walker_has_no_collisions(self):
        cfg = base_config(starts=[(0, 0)], horizon=400)
        rec = simulate_replica(cfg, 0)
        assert rec.c_total == 0 and rec.sigma == -1
        assert rec.collision_times == ()

    def test_parity_blocked_starts(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = base_config(starts=[(0, 0), (1, 0)], horizon=600)
        for rid in range(3):
            assert simulate_replica(cfg, rid).c_total == 0

    def test_odd_distance_warns(self):
        with pytest.warns(UserWarning):
            base_config(starts=[(0, 0), (1, 0)])


class TestFamilies:
    def test_custom_heights_match_log(self):
        mirrored = g.custom_comb(
            lambda n: g.tooth_height(LOG1, n))
        a = simulate_replica(base_config(), 0)
        b = simulate_replica(base_config(spec=mirrored), 0)
        assert a.collision_times == b.collision_times
        assert (a.c_total, a.h1, a.h2, a.h_n) == \
            (b.c_total, b.h1, b.h2, b.h_n)


class TestEstimates:
    def test_requires_two(self):
        with pytest.raises(ValueError):
            Estimate.from_values([1.0])

    def test_first_meeting_prob(self):
        cfg = base_config(replicas=400, horizon=200)
        est = estimate_first_meeting_prob(cfg, jobs=4)
        assert 0.0 <= est.mean <= 1.0
        assert est.replicas == 400


class TestExperiments:
    def test_checkpoints_monotone(self):
        cfg = base_config(replicas=10, horizon=2000)
        grid, counts, last = checkpoint_counts(cfg, [500, 1000, 2000],
                                               jobs=2)
        assert grid == [500, 1000, 2000]
        assert (np.diff(counts, axis=1) >= 0).all()
        assert (last <= np.array(grid)[None, :]).all()

    def test_growth_statistic(self):
        spec = g.log_comb(0.5)
        cfg = SimConfig(spec=spec, starts=[(0, 0)] * 3, horizon=1,
                        N=16, replicas=8, master_seed=5)
        res = growth_statistic(cfg, [64, 256], jobs=2)
        assert res["counts"].shape == (8, 2)
        denom = max(math.log(64) ** 0.5, math.log(math.log(64)))
        assert res["statistic"][0, 0] == pytest.approx(
            res["counts"][0, 0] / denom)

    def test_growth_rejects_small_grid(self):
        with pytest.raises(ValueError):
            growth_statistic(base_config(), [8, 64])

    def test_growth_median_positive_low_alpha(self):
        spec = g.log_comb(0.5)
        cfg = SimConfig(spec=spec, starts=[(0, 0)] * 3, horizon=1,
                        N=10_000, replicas=100, master_seed=60)
        res = growth_statistic(cfg, [1024, 10_000], jobs=4)
        for N in res["grid"]:
            assert res["quantiles"][N]["median"] > 0

    def test_exit_time_stats(self):
        # the N^4 cap is asymptotic: at N = 16 it sits ~6x above the
        # typical exit time, so allow a stray capped replica
        cfg = base_config(replicas=30, horizon=0)
        out = exit_time_stats(cfg, [16, 32], jobs=2)
        assert set(out) == {16, 32}
        for N, s in out.items():
            assert s["frac_exceeding_cap"] <= 1 / 30 + 1e-12
            assert s["quantiles"][0.5] > 0
        # larger strips take longer to exit
        assert out[32]["quantiles"][0.5] > out[16]["quantiles"][0.5]
