"""Command-line front end.

Subcommands: graph, kernel, resist, simulate, bounds, phase, growth,
moments.  Flags take precedence over the --config file, which takes
precedence over defaults; the config file is the same flat key = value
format the output headers use, so any emitted header replays the run.

Exit codes: 0 success, 1 bound failure or oracle mismatch, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, estimates, kernel as kn, reporting, resistance as rs
from .graph import CombSpec, Strip, Vertex, ball, degree, tooth_height
from .simulate import (
    Estimate,
    SimConfig,
    checkpoint_counts,
    growth_statistic,
    run_replicas,
)

USAGE_ERROR = 2
CHECK_FAILURE = 1


class CliError(Exception):
    """Usage/config problem; maps to exit code 2."""


def _parse_vertex(text) -> Vertex:
    try:
        n, x = (int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise CliError(f"expected a vertex as 'n,x', got {text!r}") from exc
    return Vertex(n, x)


def _parse_floats(text) -> list[float]:
    return [float(v) for v in str(text).split(",") if v != ""]


def _parse_ints(text) -> list[int]:
    return [int(v) for v in str(text).split(",") if v != ""]


def _build_spec(family: str, alpha: float) -> CombSpec:
    if family == "custom":
        raise CliError("the CLI builds log/poly combs; custom height "
                       "functions are a library feature")
    return CombSpec(family=family, alpha=alpha)


class Settings:
    """Flag > config-file > default resolution."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.file = {}
        path = self.args.get("config")
        if path:
            try:
                self.file = reporting.parse_config_file(path)
            except (OSError, ValueError) as exc:
                raise CliError(f"cannot read config file: {exc}") from exc

    def get(self, key, default, cast=str):
        flag = self.args.get(key)
        if flag is not None:
            return flag
        if key in self.file:
            raw = self.file[key]
            try:
                if cast is bool:
                    return str(raw).lower() in ("1", "true", "yes")
                return cast(raw)
            except ValueError as exc:
                raise CliError(f"bad config value {key} = {raw!r}") from exc
        return default


def _sim_settings(st: Settings):
    family = st.get("family", "log")
    alpha = st.get("alpha", 1.0, float)
    spec = _build_spec(family, alpha)
    walkers = st.get("walkers", 3, int)
    starts_text = st.get("starts", None)
    if starts_text:
        starts = tuple(_parse_vertex(v) for v in str(starts_text).split(";"))
    else:
        starts = tuple(Vertex(0, 0) for _ in range(walkers))
    N = st.get("N", 16, int)
    h = st.get("h", 4, int)
    eps = st.get("eps", 0.1, float)
    delta = st.get("delta", 0.05, float)
    seed = st.get("seed", 0, int)
    horizon = st.get("horizon", None, int)
    if horizon is None:
        la = kn.log_alpha(spec, N)
        horizon = int(math.ceil(2.0 * N * N * max(la, 1.0)))
    replicas = st.get("replicas", 100, int)
    try:
        config = SimConfig(spec=spec, starts=starts, horizon=horizon, N=N,
                           h=h, eps=eps, delta=delta, replicas=replicas,
                           master_seed=seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    header = {
        "command": "simulate", "family": family, "alpha": alpha, "N": N,
        "h": h, "eps": eps, "delta": delta, "horizon": horizon,
        "replicas": replicas, "seed": seed, "walkers": len(starts),
        "starts": ";".join(f"{s.n},{s.x}" for s in starts),
    }
    return config, header


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_graph(st: Settings) -> int:
    alpha = st.get("alpha", 1.0, float)
    family = st.get("family", "log")
    spec = _build_spec(family, alpha)
    out = reporting.ensure_outdir(st.get("out", "out"))
    n_max = st.get("n_max", 64, int)
    header = {"command": "graph", "family": family, "alpha": alpha,
              "n_max": n_max}
    rows = [(n, tooth_height(spec, n)) for n in range(-n_max, n_max + 1)]
    reporting.write_csv(os.path.join(out, "heights.csv"),
                        ["n", "height"], rows, header)
    ball_text = st.get("ball", None)
    if ball_text:
        parts = _parse_ints(ball_text)
        if len(parts) != 3:
            raise CliError("--ball expects 'n,x,r'")
        b = ball(spec, (parts[0], parts[1]), parts[2])
        reporting.write_csv(
            os.path.join(out, "ball.csv"), ["n", "x"],
            [(v.n, v.x) for v in b.members],
            {**header, "ball": ball_text, "volume": len(b)})
    print(f"wrote {out}/heights.csv")
    return 0


def cmd_kernel(st: Settings) -> int:
    alpha = st.get("alpha", 1.0, float)
    family = st.get("family", "log")
    spec = _build_spec(family, alpha)
    x = _parse_vertex(st.get("x", "0,0"))
    n = st.get("n", 16, int)
    killed = None
    kill_desc = "none"
    strip_n = st.get("kill_strip", None, int)
    if strip_n is not None:
        killed = Strip(strip_n)
        kill_desc = f"strip:{strip_n}"
    header = {"command": "kernel", "family": family, "alpha": alpha,
              "x": f"{x.n},{x.x}", "n": n, "kill": kill_desc}
    out = reporting.ensure_outdir(st.get("out", "out"))
    if st.get("series", False, bool):
        series = kn.on_diagonal_series(spec, x, n, killed)
        rows = list(enumerate(series))
        path = os.path.join(out, "kernel_series.csv")
        reporting.write_csv(path, ["k", "p_2k_xx"], rows, header)
        print(f"wrote {path}")
        return 0
    y = _parse_vertex(st.get("y", "0,0"))
    header["y"] = f"{y.n},{y.x}"
    win = kn._window_for(spec, [x], n, killed)
    vec = win.propagate(win.unit(x), n)
    j = win.index.get(y)
    value = 0.0 if j is None else float(vec[j] / win.deg[j])
    payload = {
        "value": value,
        "survival_mass": float(vec.sum()),
        "support_size": int(np.count_nonzero(vec)),
    }
    path = os.path.join(out, "kernel.json")
    reporting.write_json(path, payload, header)
    print(json.dumps(payload))
    return 0


def cmd_resist(st: Settings) -> int:
    alpha = st.get("alpha", 1.0, float)
    family = st.get("family", "log")
    spec = _build_spec(family, alpha)
    center = _parse_vertex(st.get("center", "0,0"))
    radius = st.get("radius", 10, int)
    B = ball(spec, center, radius)
    profile = rs.occupation_density(spec, center, B)
    r_boundary = rs.resistance_to_boundary(spec, center, B)
    out = reporting.ensure_outdir(st.get("out", "out"))
    header = {"command": "resist", "family": family, "alpha": alpha,
              "center": f"{center.n},{center.x}", "radius": radius}
    rows = [(v.n, v.x, profile.g[v], degree(spec, v))
            for v in sorted(profile.g)]
    reporting.write_csv(os.path.join(out, "occupation.csv"),
                        ["vertex_n", "vertex_x", "g", "deg"], rows, header)
    payload = {"R_boundary": r_boundary,
               "E_exit": profile.expected_exit_time}
    reporting.write_json(os.path.join(out, "resist.json"), payload, header)
    print(json.dumps(payload))
    return 0


def cmd_simulate(st: Settings) -> int:
    config, header = _sim_settings(st)
    jobs = st.get("jobs", 1, int)
    out = reporting.ensure_outdir(st.get("out", "out"))
    columns = ["replica_id", "sigma", "theta", "C", "H1", "H2", "HN", "seed"]
    records = []

    path = os.path.join(out, "records.csv")
    with reporting.CsvStream(path, columns, header) as stream:
        def emit(rec):
            records.append(rec)
            stream.write_row((
                rec.replica_id, rec.sigma, rec.theta_combined, rec.c_total,
                rec.h1, rec.h2, rec.h_n,
                f"0x{(rec.rng_key[0] << 64) | rec.rng_key[1]:x}"))
        run_replicas(config, jobs=jobs, callback=emit)

    summary = {}
    if config.replicas >= 2:
        for name, vals in (
            ("C", [r.c_total for r in records]),
            ("H1", [r.h1 for r in records]),
            ("H2", [r.h2 for r in records]),
            ("HN", [r.h_n for r in records]),
            ("p_H1_ge_1", [1.0 if r.h1 >= 1 else 0.0 for r in records]),
        ):
            est = Estimate.from_values(vals)
            summary[name] = {"mean": est.mean, "std_error": est.std_error,
                             "replicas": est.replicas,
                             "ci95_halfwidth": est.ci95_halfwidth}
        thetas = [r.theta_combined for r in records if r.theta_combined >= 0]
        summary["theta"] = {
            "observed": len(thetas),
            "median": float(np.median(thetas)) if thetas else -1.0,
        }
    reporting.write_json(os.path.join(out, "summary.json"), summary, header)
    print(f"wrote {path} and {out}/summary.json")
    return 0


def cmd_bounds(st: Settings) -> int:
    which = st.get("bound", "all")
    alphas = st.get("alphas", None)
    alpha_grid = _parse_floats(alphas) if alphas else (0.5, 1.0)
    overrides = {}
    grid_file = st.get("grid_file", None)
    if grid_file:
        try:
            with open(grid_file, encoding="utf-8") as fh:
                overrides = json.load(fh)
            if not isinstance(overrides, dict):
                raise ValueError("grid file must hold a JSON object")
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read grid file: {exc}") from exc
    try:
        reports = estimates.run_checks(which, alpha_grid, overrides)
    except KeyError as exc:
        raise CliError(str(exc)) from exc
    out = reporting.ensure_outdir(st.get("out", "out"))
    header = {"command": "bounds", "bound": which,
              "alphas": ",".join(str(a) for a in alpha_grid)}
    reporting.write_json(os.path.join(out, "bounds_report.json"),
                         {"reports": [r.to_dict() for r in reports]}, header)
    rows = []
    for rep in reports:
        for label, value in rep.per_point.items():
            rows.append((rep.bound_id, f"alpha={rep.grid.get('alpha')};"
                         f"point={label}", "", "", value))
        for wit in rep.witnesses:
            lhs = wit.get("lhs", wit.get("p", wit.get("q", "")))
            rhs = wit.get("rhs", wit.get("rhs_rate", ""))
            ratio = (lhs / rhs if isinstance(lhs, float)
                     and isinstance(rhs, float) and rhs else "")
            rows.append((rep.bound_id, json.dumps(wit, sort_keys=True),
                         lhs, rhs, ratio))
    reporting.write_csv(os.path.join(out, "bounds.csv"),
                        ["bound_id", "grid_point", "lhs", "rhs", "ratio"],
                        rows, header)
    failed = [r.bound_id for r in reports if not r.passed]
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] {rep.bound_id} alpha={rep.grid.get('alpha')} "
              f"worst_ratio={rep.worst_ratio:.6g} "
              f"fitted={rep.fitted_constant:.6g}")
    if failed:
        print(f"FAILED: {sorted(set(failed))}", file=sys.stderr)
        return CHECK_FAILURE
    return 0


def cmd_phase(st: Settings) -> int:
    alphas = _parse_floats(st.get("alphas", "0.5,2.0"))
    horizon = st.get("horizon", 1_000_000, int)
    replicas = st.get("replicas", 200, int)
    walkers = st.get("walkers", 3, int)
    seed = st.get("seed", 0, int)
    jobs = st.get("jobs", 1, int)
    family = st.get("family", "log")
    out = reporting.ensure_outdir(st.get("out", "out"))
    header = {"command": "phase", "family": family,
              "alphas": ",".join(str(a) for a in alphas),
              "horizon": horizon, "replicas": replicas, "walkers": walkers,
              "seed": seed}
    rows = []
    summary = {}
    for alpha in alphas:
        spec = _build_spec(family, alpha)
        config = SimConfig(spec=spec, starts=[(0, 0)] * walkers,
                           horizon=2 * horizon, N=max(16, horizon // 4),
                           replicas=replicas, master_seed=seed)
        grid, counts, last = checkpoint_counts(config, [horizon, 2 * horizon],
                                               jobs=jobs)
        for rid in range(replicas):
            for j, hz in enumerate(grid):
                rows.append((alpha, rid, hz, int(counts[rid, j]),
                             int(last[rid, j])))
        med_t = float(np.median(counts[:, 0]))
        med_2t = float(np.median(counts[:, 1]))
        mean_t = float(counts[:, 0].mean())
        mean_2t = float(counts[:, 1].mean())
        med_last_t = float(np.median(last[:, 0]))
        med_last_2t = float(np.median(last[:, 1]))
        summary[str(alpha)] = {
            "median_count_T": med_t, "median_count_2T": med_2t,
            "mean_count_T": mean_t, "mean_count_2T": mean_2t,
            "mean_increment": mean_2t - mean_t,
            "median_count_diff": med_2t - med_t,
            "median_last_collision_T": med_last_t,
            "median_last_collision_2T": med_last_2t,
            "last_collision_stable": bool(
                med_last_2t - med_last_t <= 0.01 * horizon),
            "median_counts_increase": bool(med_2t > med_t),
        }
    reporting.write_csv(os.path.join(out, "phase.csv"),
                        ["alpha", "replica", "horizon", "collisions",
                         "last_collision"], rows, header)
    reporting.write_json(os.path.join(out, "phase_summary.json"), summary,
                         header)
    print(f"wrote {out}/phase.csv and {out}/phase_summary.json")
    return 0


def cmd_growth(st: Settings) -> int:
    alpha = st.get("alpha", 0.5, float)
    family = st.get("family", "log")
    spec = _build_spec(family, alpha)
    grid = _parse_ints(st.get("N_grid", "64,256,1024,4096,16384"))
    replicas = st.get("replicas", 50, int)
    seed = st.get("seed", 0, int)
    jobs = st.get("jobs", 1, int)
    walkers = st.get("walkers", 3, int)
    out = reporting.ensure_outdir(st.get("out", "out"))
    config = SimConfig(spec=spec, starts=[(0, 0)] * walkers,
                       horizon=max(grid), N=max(16, max(grid)),
                       replicas=replicas, master_seed=seed)
    result = growth_statistic(config, grid, jobs=jobs)
    header = {"command": "growth", "family": family, "alpha": alpha,
              "N_grid": ",".join(str(v) for v in grid),
              "replicas": replicas, "walkers": walkers, "seed": seed}
    rows = []
    for rid in range(replicas):
        for j, N in enumerate(result["grid"]):
            rows.append((alpha, rid, N, int(result["counts"][rid, j]),
                         float(result["statistic"][rid, j])))
    reporting.write_csv(os.path.join(out, "growth.csv"),
                        ["alpha", "replica", "N", "C_N", "statistic"],
                        rows, header)
    reporting.write_json(os.path.join(out, "growth_summary.json"),
                         {"quantiles": {str(k): v for k, v in
                                        result["quantiles"].items()}},
                         header)
    print(f"wrote {out}/growth.csv and {out}/growth_summary.json")
    return 0


def cmd_moments(st: Settings) -> int:
    alpha = st.get("alpha", 1.0, float)
    N = st.get("N", 16, int)
    eps = st.get("eps", 0.25, float)
    delta = st.get("delta", 0.05, float)
    h = st.get("h", 4, int)
    out = reporting.ensure_outdir(st.get("out", "out"))
    reports = estimates.check_moment_shape(alpha, (N,), eps=eps, delta=delta,
                                           h=h)
    header = {"command": "moments", "alpha": alpha, "N": N, "eps": eps,
              "delta": delta, "h": h}
    reporting.write_json(os.path.join(out, "moments.json"),
                         {"reports": [r.to_dict() for r in reports]}, header)
    rep = reports[0]
    print(json.dumps(rep.details.get(str(N), {}), indent=2))
    return 0 if rep.passed else CHECK_FAILURE


# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--family", choices=["log", "poly", "custom"],
                   default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="combwalk",
        description="Comb-graph random walk collisions: exact kernels, "
                    "Monte Carlo, and inequality checks.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="dump tooth heights / ball membership")
    _add_common(p)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--ball", default=None, help="'n,x,r'")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("kernel", help="exact (killed) heat kernel values")
    _add_common(p)
    p.add_argument("--x", default=None, help="'n,x'")
    p.add_argument("--y", default=None, help="'n,x'")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--kill-strip", dest="kill_strip", type=int, default=None)
    p.add_argument("--series", action="store_const", const=True,
                   default=None, help="emit the on-diagonal series CSV")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("resist", help="occupation density and exit time")
    _add_common(p)
    p.add_argument("--center", default=None, help="'n,x'")
    p.add_argument("--radius", type=int, default=None)
    p.set_defaults(func=cmd_resist)

    p = sub.add_parser("simulate", help="Monte Carlo replicas")
    _add_common(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--h", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--walkers", type=int, default=None)
    p.add_argument("--starts", default=None, help="'n,x;n,x;...'")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="run inequality checks")
    _add_common(p)
    p.add_argument("--bound", default=None,
                   help="bound id or 'all' (default)")
    p.add_argument("--alphas", default=None, help="comma list")
    p.add_argument("--grid-file", dest="grid_file", default=None,
                   help="JSON {bound_id: {param: value}} overrides")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("phase", help="collision counts at doubled horizons")
    _add_common(p)
    p.add_argument("--alphas", default=None, help="comma list")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--walkers", type=int, default=None)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("growth", help="C_N growth statistic trajectories")
    _add_common(p)
    p.add_argument("--N-grid", dest="N_grid", default=None,
                   help="comma list of checkpoint times")
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--walkers", type=int, default=None)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("moments", help="H1/H2 moment shape at toy scale")
    _add_common(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--h", type=int, default=None)
    p.set_defaults(func=cmd_moments)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        st = Settings(args)
        return args.func(st)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (kn.EmptyTargetRegion, kn.ResourceLimit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())
