"""Monte Carlo engine for k independent walkers on a comb.

Walkers within one replica are stepped in lockstep by a jit-compiled core;
parallelism is across replicas only.  Each replica owns a counter-based
Philox stream keyed by (master_seed, replica_id), so a RunRecord is
bit-identical for a given key no matter how many workers run or in which
order replicas complete.

Per step the core evaluates the collision event (all walkers on one
vertex) and the region events behind the counting statistics:

    C    collisions at any time n in [1, horizon]
    HN   collisions before any walker first leaves the strip |n| <= h*N
    H1   HN-collisions with n <= T1 on the positive band: backbone in
         (N/2, N], tooth height in [eps log^a(N/2), 2 eps log^a(N/2)]
    H2   HN-collisions with n <= T2 in the annulus N/2 < |backbone| <= 2N

The walk continues to the horizon after the first strip exit; only the
counters freeze, per their definitions.
"""

from __future__ import annotations

import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .graph import CombSpec, Vertex, check_vertex, distance, heights_array
from .kernel import horizon_T1, horizon_T2, log_alpha

__all__ = [
    "SimConfig",
    "RunRecord",
    "Estimate",
    "simulate_replica",
    "reference_replica",
    "run_replicas",
    "estimate_first_meeting_prob",
    "checkpoint_counts",
    "growth_statistic",
    "exit_time_stats",
]

CHUNK_STEPS = 1 << 17  # steps per RNG refill; fixed so streams never realign
COLLISION_CAP = 64

_heights_cache: dict = {}
_heights_lock = threading.Lock()


def _cached_heights(spec: CombSpec, n_max: int):
    key = (spec, n_max)
    with _heights_lock:
        arr = _heights_cache.get(key)
        if arr is None:
            # Evict stale entries so long N-grids do not accumulate arrays.
            for k in [k for k in _heights_cache if k[0] == spec and k[1] < n_max]:
                del _heights_cache[k]
            arr = heights_array(spec, n_max)
            _heights_cache[key] = arr
    return arr


@dataclass(frozen=True)
class SimConfig:
    """Experiment parameters for one batch of replicas."""

    spec: CombSpec
    starts: tuple
    horizon: int
    N: int
    h: int = 4
    eps: float = 0.1
    delta: float = 0.05
    c2: float = 0.5
    replicas: int = 100
    master_seed: int = 0
    collision_cap: int = COLLISION_CAP
    probe_time: int = -1
    stop_after_exit: bool = False

    def __post_init__(self):
        object.__setattr__(self, "starts",
                           tuple(Vertex(*s) for s in self.starts))
        if not self.starts:
            raise ValueError("need at least one walker")
        if self.horizon < 0 or self.N < 1 or self.replicas < 1:
            raise ValueError("horizon, N and replicas must be positive")
        if self.h < 2 or int(self.h) != self.h:
            raise ValueError("strip multiplier h must be an integer >= 2")
        if not (0 <= self.master_seed < 2 ** 64):
            raise ValueError("master_seed must fit in 64 bits")
        for s in self.starts:
            check_vertex(self.spec, s)
        if len(self.starts) >= 2:
            ds = [distance(self.spec, a, b) % 2
                  for i, a in enumerate(self.starts)
                  for b in self.starts[i + 1:]]
            if any(ds):
                warnings.warn("starts at odd mutual distance can never "
                              "collide; proceeding anyway", stacklevel=2)

    @property
    def walkers(self) -> int:
        return len(self.starts)

    def t1(self) -> int:
        return horizon_T1(self.spec, self.N, self.eps, self.c2)

    def t2(self) -> int:
        return horizon_T2(self.spec, self.N, self.delta)

    def height_band(self) -> tuple[float, float]:
        band = log_alpha(self.spec, self.N / 2.0)
        return self.eps * band, 2.0 * self.eps * band


@dataclass(frozen=True)
class RunRecord:
    """Per-replica outcome; all times are step indices, -1 means 'never'."""

    replica_id: int
    sigma: int
    theta: tuple
    theta_combined: int
    collision_times: tuple
    c_total: int
    h1: int
    h2: int
    h_n: int
    probe_hit: int
    last_collision: int
    steps_run: int
    rng_key: tuple


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    replicas: int
    ci95_halfwidth: float

    @staticmethod
    def from_values(values) -> "Estimate":
        values = np.asarray(values, dtype=np.float64)
        n = len(values)
        if n < 2:
            raise ValueError("estimates require at least 2 replicas")
        se = float(values.std(ddof=1) / math.sqrt(n))
        return Estimate(mean=float(values.mean()), std_error=se,
                        replicas=n, ci95_halfwidth=1.96 * se)


@njit(cache=True, nogil=True)
def _run_core(ns, xs, thetas, cols, counters, u, heights, off,
              t_start, horizon, hN, N, T1, T2, vlo, vhi,
              probe_time, stop_after_exit, cap, ngrid, gout, glast,
              gi_start):
    """Advance the replica through one RNG chunk.

    counters layout: [C, H1, H2, HN, sigma, probe_hit, n_recorded,
    last_collision].  Returns (t_reached, grid_cursor, done_flag).
    """
    k = ns.shape[0]
    t = t_start
    gi = gi_start
    pos = 0
    nu = u.shape[0]
    while t < horizon and pos + k <= nu:
        for i in range(k):
            n = ns[i]
            x = xs[i]
            h = heights[n + off]
            r = u[pos]
            pos += 1
            if x == 0:
                if h == 0:
                    if r < 0.5:
                        ns[i] = n - 1
                    else:
                        ns[i] = n + 1
                else:
                    idx = int(r * 3.0)
                    if idx > 2:
                        idx = 2
                    if idx == 0:
                        ns[i] = n - 1
                    elif idx == 1:
                        xs[i] = 1
                    else:
                        ns[i] = n + 1
            else:
                if x < h:
                    if r < 0.5:
                        xs[i] = x - 1
                    else:
                        xs[i] = x + 1
                else:
                    xs[i] = x - 1
        t += 1

        alive = True
        for i in range(k):
            if thetas[i] < 0:
                a = ns[i] if ns[i] >= 0 else -ns[i]
                if a > hN:
                    thetas[i] = t
            if thetas[i] >= 0:
                alive = False

        coll = k >= 2  # a lone walker has no collision events
        for i in range(1, k):
            if ns[i] != ns[0] or xs[i] != xs[0]:
                coll = False
                break
        if coll:
            counters[0] += 1
            counters[7] = t
            if counters[6] < cap:
                cols[counters[6]] = t
                counters[6] += 1
            if counters[4] < 0:
                counters[4] = t
            if alive:
                counters[3] += 1
                if t <= T1 and 2 * ns[0] > N and ns[0] <= N:
                    if vlo <= xs[0] <= vhi:
                        counters[1] += 1
                if t <= T2:
                    a0 = ns[0] if ns[0] >= 0 else -ns[0]
                    if 2 * a0 > N and a0 <= 2 * N:
                        counters[2] += 1
        if t == probe_time:
            counters[5] = 1 if coll else 0
        if gi < ngrid.shape[0] and t == ngrid[gi]:
            gout[gi] = counters[0]
            glast[gi] = counters[7]
            gi += 1
        if stop_after_exit and not alive:
            return t, gi, 1
    done = 1 if t >= horizon else 0
    return t, gi, done


def _replica_rng(config: SimConfig, replica_id: int):
    key = np.array([config.master_seed, replica_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _heights_for(config: SimConfig) -> tuple:
    start_span = max(abs(s.n) for s in config.starts)
    if config.stop_after_exit:
        n_max = config.h * config.N + 2
    else:
        n_max = start_span + config.horizon + 1
    return _cached_heights(config.spec, n_max), n_max


def _run_single(config: SimConfig, replica_id: int, heights, off,
                n_grid=None):
    rng = _replica_rng(config, replica_id)
    k = config.walkers
    ns = np.array([s.n for s in config.starts], dtype=np.int64)
    xs = np.array([s.x for s in config.starts], dtype=np.int64)
    thetas = np.full(k, -1, dtype=np.int64)
    cols = np.zeros(config.collision_cap, dtype=np.int64)
    counters = np.zeros(8, dtype=np.int64)
    counters[4] = -1
    counters[5] = -1 if config.probe_time < 0 else 0
    counters[7] = -1
    if len(set(config.starts)) == 1 and k > 1:
        counters[4] = 0  # sigma = 0 when the walkers start together
    ngrid = (np.asarray(n_grid, dtype=np.int64) if n_grid is not None
             else np.empty(0, dtype=np.int64))
    gout = np.zeros(len(ngrid), dtype=np.int64)
    glast = np.full(len(ngrid), -1, dtype=np.int64)

    t, gi, done = 0, 0, 1 if config.horizon == 0 else 0
    while not done:
        # chunk sizing depends only on (horizon, t): scheduler-independent
        u = rng.random(k * min(CHUNK_STEPS, config.horizon - t))
        t, gi, done = _run_core(
            ns, xs, thetas, cols, counters, u, heights, off,
            t, config.horizon, config.h * config.N, config.N,
            config.t1(), config.t2(), *config.height_band(),
            config.probe_time, config.stop_after_exit,
            config.collision_cap, ngrid, gout, glast, gi,
        )
    theta = tuple(int(v) for v in thetas)
    alive_thetas = [v for v in theta if v >= 0]
    record = RunRecord(
        replica_id=replica_id,
        sigma=int(counters[4]),
        theta=theta,
        theta_combined=min(alive_thetas) if alive_thetas else -1,
        collision_times=tuple(int(v) for v in cols[: counters[6]]),
        c_total=int(counters[0]),
        h1=int(counters[1]),
        h2=int(counters[2]),
        h_n=int(counters[3]),
        probe_hit=int(counters[5]),
        last_collision=int(counters[7]),
        steps_run=t,
        rng_key=(config.master_seed, replica_id),
    )
    return record, gout, glast


def simulate_replica(config: SimConfig, replica_id: int) -> RunRecord:
    """Run one replica; bit-reproducible given (master_seed, replica_id)."""
    heights, off = _heights_for(config)
    record, _, _ = _run_single(config, replica_id, heights, off)
    return record


def reference_replica(config: SimConfig, replica_id: int) -> RunRecord:
    """Pure-Python mirror of the jit core, for cross-validation.

    Consumes the identical RNG stream and must produce an identical record.
    """
    from .graph import neighbors as graph_neighbors

    rng = _replica_rng(config, replica_id)
    k = config.walkers
    pos_list = [Vertex(s.n, s.x) for s in config.starts]
    thetas = [-1] * k
    sigma = -1
    if len(set(pos_list)) == 1 and k > 1:
        sigma = 0
    cols = []
    C = H1 = H2 = HN = 0
    last_col = -1
    probe_hit = -1 if config.probe_time < 0 else 0
    T1, T2 = config.t1(), config.t2()
    vlo, vhi = config.height_band()
    hN = config.h * config.N
    t = 0
    buf = rng.random(k * min(CHUNK_STEPS, config.horizon)) \
        if config.horizon > 0 else np.empty(0)
    chunk_t = 0
    bpos = 0
    while t < config.horizon:
        if bpos + k > len(buf):
            chunk_t = t
            buf = rng.random(k * min(CHUNK_STEPS, config.horizon - chunk_t))
            bpos = 0
        for i in range(k):
            nbrs = graph_neighbors(config.spec, pos_list[i])
            r = buf[bpos]
            bpos += 1
            idx = min(int(r * len(nbrs)), len(nbrs) - 1)
            pos_list[i] = nbrs[idx]
        t += 1
        for i in range(k):
            if thetas[i] < 0 and abs(pos_list[i].n) > hN:
                thetas[i] = t
        alive = all(v < 0 for v in thetas)
        coll = k >= 2 and len(set(pos_list)) == 1
        if coll:
            C += 1
            last_col = t
            if len(cols) < config.collision_cap:
                cols.append(t)
            if sigma < 0:
                sigma = t
            if alive:
                HN += 1
                v = pos_list[0]
                if t <= T1 and 2 * v.n > config.N and v.n <= config.N \
                        and vlo <= v.x <= vhi:
                    H1 += 1
                if t <= T2 and 2 * abs(v.n) > config.N \
                        and abs(v.n) <= 2 * config.N:
                    H2 += 1
        if t == config.probe_time:
            probe_hit = 1 if coll else 0
        if config.stop_after_exit and not alive:
            break
    alive_thetas = [v for v in thetas if v >= 0]
    return RunRecord(
        replica_id=replica_id, sigma=sigma, theta=tuple(thetas),
        theta_combined=min(alive_thetas) if alive_thetas else -1,
        collision_times=tuple(cols), c_total=C, h1=H1, h2=H2, h_n=HN,
        probe_hit=probe_hit, last_collision=last_col, steps_run=t,
        rng_key=(config.master_seed, replica_id),
    )


def run_replicas(config: SimConfig, jobs: int = 1, callback=None):
    """Run all replicas; results ordered (and streamed) by replica_id.

    The callback, when given, is invoked once per record in replica_id
    order regardless of completion order, so streamed output is byte-stable
    across worker counts.
    """
    heights, off = _heights_for(config)
    records: list[RunRecord] = []

    def one(rid):
        return _run_single(config, rid, heights, off)[0]

    if jobs <= 1:
        for rid in range(config.replicas):
            rec = one(rid)
            records.append(rec)
            if callback is not None:
                callback(rec)
    else:
        # executor.map yields in submission order, so the callback streams
        # records by replica_id no matter which worker finishes first
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for rec in pool.map(one, range(config.replicas)):
                records.append(rec)
                if callback is not None:
                    callback(rec)
    return records


def estimate_first_meeting_prob(config: SimConfig, jobs: int = 1) -> Estimate:
    """Fraction of replicas with H1 >= 1, with a normal-approximation CI."""
    recs = run_replicas(config, jobs=jobs)
    return Estimate.from_values([1.0 if r.h1 >= 1 else 0.0 for r in recs])


def checkpoint_counts(config: SimConfig, n_grid, jobs: int = 1):
    """Collision counts and last-collision times at fixed step checkpoints.

    Returns (grid, counts, last) where counts[r, j] is the number of
    collisions of replica r up to step grid[j] and last[r, j] the time of
    the latest collision by then (-1 if none).
    """
    grid = sorted(set(int(v) for v in n_grid))
    if grid and grid[-1] > config.horizon:
        raise ValueError("checkpoints must not exceed the horizon")
    heights, off = _heights_for(config)
    counts = np.zeros((config.replicas, len(grid)), dtype=np.int64)
    last = np.zeros((config.replicas, len(grid)), dtype=np.int64)

    def one(rid):
        _, gout, glast = _run_single(config, rid, heights, off, n_grid=grid)
        return rid, gout, glast

    if jobs <= 1:
        results = [one(rid) for rid in range(config.replicas)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(config.replicas)))
    for rid, gout, glast in results:
        counts[rid] = gout
        last[rid] = glast
    return grid, counts, last


def _growth_denominator(alpha: float, N: int) -> float:
    lg = math.log(N)
    return max(lg ** (1.0 - alpha), math.log(lg), 1e-6)


def growth_statistic(config: SimConfig, N_grid, jobs: int = 1) -> dict:
    """C_N at every grid point from one long run per replica.

    Returns per-replica trajectories of C_N and of the growth statistic
    C_N / max(log^{1-alpha} N, log log N), plus per-N quantiles.
    """
    if config.spec.family in ("log", "poly") and config.spec.alpha > 1:
        warnings.warn("growth statistic is designed for alpha <= 1",
                      stacklevel=2)
    grid = sorted(set(int(N) for N in N_grid))
    if not grid or grid[0] < 16:
        raise ValueError("N grid must contain values >= 16 only")
    cfg = replace(config, horizon=grid[-1], stop_after_exit=False)
    heights, off = _heights_for(cfg)
    counts = np.zeros((cfg.replicas, len(grid)), dtype=np.int64)

    def one(rid):
        _, gout, glast = _run_single(cfg, rid, heights, off, n_grid=grid)
        return rid, gout, glast

    if jobs <= 1:
        results = [one(rid) for rid in range(cfg.replicas)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(cfg.replicas)))
    for rid, gout, _ in results:
        counts[rid] = gout

    alpha = cfg.spec.alpha
    denoms = np.array([_growth_denominator(alpha, N) for N in grid])
    stats = counts / denoms
    quantiles = {
        N: {
            "q25": float(np.quantile(stats[:, j], 0.25)),
            "median": float(np.quantile(stats[:, j], 0.5)),
            "q75": float(np.quantile(stats[:, j], 0.75)),
            "mean_count": float(counts[:, j].mean()),
        }
        for j, N in enumerate(grid)
    }
    return {"grid": grid, "counts": counts, "statistic": stats,
            "quantiles": quantiles}


def exit_time_stats(config: SimConfig, N_grid, jobs: int = 1) -> dict:
    """Empirical distribution of the first strip exit time, per grid N.

    Each replica runs until the first walker leaves |n| <= h*N, capped at
    N^4 steps (exits beyond the cap are counted as exceedances, matching
    the deterministic-time comparison used at full scale).
    """
    out = {}
    for N in sorted(set(int(v) for v in N_grid)):
        cap = min(N ** 4, config.horizon) if config.horizon > 0 else N ** 4
        cfg = replace(config, N=N, horizon=cap, stop_after_exit=True)
        recs = run_replicas(cfg, jobs=jobs)
        thetas = np.array([r.theta_combined for r in recs], dtype=np.float64)
        exceed = float(np.mean(thetas < 0))
        observed = thetas[thetas >= 0]
        scale = N * N * log_alpha(cfg.spec, N)
        out[N] = {
            "replicas": len(recs),
            "frac_exceeding_cap": exceed,
            "cap": cap,
            "quantiles": {
                q: float(np.quantile(observed, q)) if len(observed) else -1.0
                for q in (0.25, 0.5, 0.75, 0.9)
            },
            "median_over_scale": (
                float(np.quantile(observed, 0.5) / scale)
                if len(observed) and scale > 0 else float("nan")
            ),
        }
    return out
