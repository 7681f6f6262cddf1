"""Exact transition densities on comb graphs by sparse vector propagation.

Probability vectors live on an explicitly enumerated finite window of the
(infinite) comb.  Free propagation is exact whenever the window contains
the ball of radius n around the start; killed propagation uses the killed
region itself as the window, so mass stepping outside is absorbed (dropped).

The heat kernel is the degree-normalized transition probability

    p_n(x, y) = P^x(X_n = y) / deg(y),

symmetric in (x, y) by reversibility, and its killed variant additionally
requires the walk to stay inside a region for all of the first n steps.
On top of the kernels this module computes the collision functionals used
by the collision-counting experiments: probabilities that k independent
walkers share a vertex at a fixed time, and first/second moments and the
exact law of the constrained collision count H1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import (
    CombSpec,
    Strip,
    Vertex,
    ball,
    check_vertex,
    neighbors,
    parity,
    tooth_height,
)

__all__ = [
    "EmptyTargetRegion",
    "ResourceLimit",
    "DistVector",
    "KernelValue",
    "Window",
    "delta_mass",
    "step",
    "free_window",
    "region_window",
    "kernel",
    "on_diagonal_series",
    "triple_collision_probability",
    "k_collision_probability",
    "log_alpha",
    "horizon_T1",
    "horizon_T2",
    "h1_sites",
    "annulus_sites",
    "expected_collision_count",
    "expected_H1",
    "expected_H2",
    "second_moment_collision_count",
    "second_moment_H1",
    "second_moment_H2",
    "first_meeting_probability",
    "collision_count_law",
    "h1_law",
    "interval_step",
    "kernel_1d",
    "kernel_1d_free",
    "first_hit_decomposition",
]


class EmptyTargetRegion(ValueError):
    """The requested collision target band contains no vertices."""


class ResourceLimit(RuntimeError):
    """Exact computation refused: estimated cost exceeds the guard."""


# ---------------------------------------------------------------------------
# Sparse distribution vectors (dict-backed, exact-arithmetic capable)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistVector:
    """Finitely supported law of one walker after step_index steps.

    masses maps vertices to probability mass (floats, or Fractions in the
    exact mode).  Total mass is 1 for free propagation and P(tau > n) when
    killed_on is set.
    """

    masses: dict
    step_index: int = 0
    killed_on: object = None

    def total_mass(self):
        return sum(self.masses.values())

    def mass_at(self, v):
        return self.masses.get(Vertex(*v), 0)


def delta_mass(spec: CombSpec, v, killed_on=None, exact: bool = False) -> DistVector:
    """Point mass at v.  With killing, a start outside the region is dead."""
    v = check_vertex(spec, v)
    one = Fraction(1) if exact else 1.0
    if killed_on is not None and not killed_on.contains(v):
        return DistVector({}, 0, killed_on)
    return DistVector({v: one}, 0, killed_on)


def step(spec: CombSpec, d: DistVector) -> DistVector:
    """One synchronous step: mass spreads uniformly over neighbors.

    Mass landing outside d.killed_on (when set) is deleted.  Exact for
    Fraction masses; float masses incur only rounding.
    """
    out = {}
    region = d.killed_on
    for v, m in d.masses.items():
        nbrs = neighbors(spec, v)
        share = m / len(nbrs)
        for u in nbrs:
            if region is not None and not region.contains(u):
                continue
            if u in out:
                out[u] += share
            else:
                out[u] = share
    return DistVector(out, d.step_index + 1, region)


# ---------------------------------------------------------------------------
# Window engine: CSR transition matrix over an enumerated vertex set
# ---------------------------------------------------------------------------

class Window:
    """An enumerated finite vertex set with its one-step transition matrix.

    The matrix T is column-stochastic up to absorption: T[i, j] = 1/deg(v_j)
    when v_i ~ v_j and both are in the window.  Degrees are the true comb
    degrees, so propagation restricted to the window either matches the free
    walk exactly (window contains the reachable ball) or realizes killing on
    the window's vertex set.
    """

    __slots__ = ("spec", "vertices", "index", "deg", "T")

    def __init__(self, spec: CombSpec, vertices: Iterable):
        vs = sorted({Vertex(*v) for v in vertices})
        index = {v: i for i, v in enumerate(vs)}
        deg = np.empty(len(vs), dtype=np.float64)
        rows, cols = [], []
        data = []
        for j, v in enumerate(vs):
            nbrs = neighbors(spec, v)
            deg[j] = len(nbrs)
            w = 1.0 / len(nbrs)
            for u in nbrs:
                i = index.get(u)
                if i is not None:
                    rows.append(i)
                    cols.append(j)
                    data.append(w)
        self.spec = spec
        self.vertices = vs
        self.index = index
        self.deg = deg
        self.T = sp.csr_matrix(
            (np.asarray(data), (np.asarray(rows), np.asarray(cols))),
            shape=(len(vs), len(vs)),
        )

    def __len__(self):
        return len(self.vertices)

    @property
    def nnz(self):
        return self.T.nnz

    def unit(self, v) -> np.ndarray:
        vec = np.zeros(len(self.vertices))
        vec[self.index[Vertex(*v)]] = 1.0
        return vec

    def indices_of(self, vs) -> np.ndarray:
        return np.array([self.index[Vertex(*v)] for v in vs], dtype=np.intp)

    def propagate(self, vec: np.ndarray, steps: int) -> np.ndarray:
        for _ in range(steps):
            vec = self.T @ vec
        return vec

    def iter_propagate(self, vec: np.ndarray, steps: int):
        """Yield (k, vec) for k = 0..steps; vectors must not be mutated."""
        yield 0, vec
        for k in range(1, steps + 1):
            vec = self.T @ vec
            yield k, vec


def free_window(spec: CombSpec, starts, n: int) -> Window:
    """Window containing everything reachable in n steps from the starts."""
    members = set()
    for s in {Vertex(*v) for v in starts}:
        members.update(ball(spec, s, n).members)
    return Window(spec, members)


def region_window(spec: CombSpec, region) -> Window:
    return Window(spec, region.vertices(spec))


def _window_for(spec, starts, n, killed_on):
    if killed_on is None:
        return free_window(spec, starts, n)
    return region_window(spec, killed_on)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelValue:
    value: float
    n: int
    x: Vertex
    y: Vertex
    killed_on: object = None


def kernel(spec: CombSpec, x, y, n: int, killed_on=None) -> KernelValue:
    """Exact p_n(x, y), or its killed variant when killed_on is given."""
    x = check_vertex(spec, x)
    y = check_vertex(spec, y)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if killed_on is not None and (
        not killed_on.contains(x) or not killed_on.contains(y)
    ):
        return KernelValue(0.0, n, x, y, killed_on)
    win = _window_for(spec, [x], n, killed_on)
    vec = win.propagate(win.unit(x), n)
    j = win.index.get(y)
    value = 0.0 if j is None else float(vec[j] / win.deg[j])
    return KernelValue(value, n, x, y, killed_on)


def on_diagonal_series(spec: CombSpec, x, n_max: int, killed_on=None) -> list[float]:
    """[p_0(x,x), p_2(x,x), p_4(x,x), ...] up to step n_max; nonincreasing."""
    x = check_vertex(spec, x)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if killed_on is not None and not killed_on.contains(x):
        return [0.0 for _ in range(n_max // 2 + 1)]
    win = _window_for(spec, [x], n_max, killed_on)
    j = win.index[x]
    d = win.deg[j]
    out = []
    for k, vec in win.iter_propagate(win.unit(x), 2 * (n_max // 2)):
        if k % 2 == 0:
            out.append(float(vec[j] / d))
    return out


def _collision_mass_vectors(spec, starts, n, killed_on):
    """Propagated probability vectors for each start on a shared window."""
    starts = [check_vertex(spec, s) for s in starts]
    win = _window_for(spec, starts, n, killed_on)
    vecs = {}
    for s in set(starts):
        if killed_on is not None and not killed_on.contains(s):
            vecs[s] = np.zeros(len(win))
        else:
            vecs[s] = win.propagate(win.unit(s), n)
    return win, [vecs[s] for s in starts]


def k_collision_probability(spec: CombSpec, starts: Sequence, n: int,
                            killed_on=None) -> float:
    """P(all k walkers share a vertex at time n [, all still alive]).

    Equals sum_w prod_i P^{x_i}(X_n = w), the product taken over walkers.
    For k = 1 this is the survival probability (1 when free).
    """
    if len(starts) == 0:
        raise ValueError("need at least one walker")
    if n == 0:
        ss = {Vertex(*s) for s in starts}
        if killed_on is not None and any(not killed_on.contains(s) for s in ss):
            return 0.0
        return 1.0 if len(ss) == 1 else 0.0
    ps = [parity(s) for s in starts]
    if len(set(ps)) > 1:
        return 0.0
    win, vecs = _collision_mass_vectors(spec, starts, n, killed_on)
    prod = vecs[0].copy()
    for v in vecs[1:]:
        prod *= v
    return float(prod.sum())


def triple_collision_probability(spec: CombSpec, x, y, z, n: int,
                                 killed_on=None) -> float:
    return k_collision_probability(spec, [x, y, z], n, killed_on)


# ---------------------------------------------------------------------------
# Collision-count moments over constrained target bands
# ---------------------------------------------------------------------------

def log_alpha(spec: CombSpec, t: float) -> float:
    """(log t) ** alpha in the comb's log base; 0 for t <= 1."""
    if t <= 1.0:
        return 0.0
    v = math.log(t)
    if spec.log_base != math.e:
        v /= math.log(spec.log_base)
    return v ** spec.alpha


def horizon_T1(spec: CombSpec, N: int, eps: float, c2: float = 0.5) -> int:
    """floor(c2 * (1 - eps) * N^2 * log^alpha N) -- the H1 time horizon."""
    return int(math.floor(c2 * (1.0 - eps) * N * N * log_alpha(spec, N)))


def horizon_T2(spec: CombSpec, N: int, delta: float) -> int:
    """floor(delta * N^2 * log^alpha N) -- the H2 time horizon."""
    return int(math.floor(delta * N * N * log_alpha(spec, N)))


def h1_sites(spec: CombSpec, N: int, eps: float, h: int) -> list[Vertex]:
    """Target band for H1: backbone coordinate in (N/2, N], tooth height in
    [eps * log^alpha(N/2), 2 * eps * log^alpha(N/2)].

    Heights are integers inside the literal real interval; the band can be
    empty, which raises EmptyTargetRegion.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if h < 2:
        raise ValueError("strip multiplier h must be >= 2")
    band = log_alpha(spec, N / 2.0)
    lo, hi = eps * band, 2.0 * eps * band
    sites = []
    for w in range(N // 2 + 1, N + 1):
        if not (N / 2.0 < w <= N):
            continue
        top = tooth_height(spec, w)
        for ell in range(int(math.ceil(lo)), int(math.floor(hi)) + 1):
            if lo <= ell <= hi and ell <= top:
                sites.append(Vertex(w, ell))
    if not sites:
        raise EmptyTargetRegion(
            f"no comb vertex has backbone in ({N // 2}, {N}] and height in "
            f"[{lo:.4g}, {hi:.4g}]"
        )
    return sites


def annulus_sites(spec: CombSpec, N: int) -> list[Vertex]:
    """Vertices of the annulus strip V_2N minus V_{N/2} (any tooth height)."""
    sites = []
    for w in range(-2 * N, 2 * N + 1):
        if abs(w) * 2 <= N:
            continue
        for ell in range(tooth_height(spec, w) + 1):
            sites.append(Vertex(w, ell))
    return sites


def expected_collision_count(spec: CombSpec, starts, sites, t_lo: int,
                             t_hi: int, region) -> float:
    """Expected number of times in [t_lo, t_hi] all walkers share a site.

    Computed exactly as sum_n sum_{w in sites} prod_i P^{x_i}(X_n = w,
    tau > n), with killing on the given region.
    """
    if t_hi < t_lo:
        return 0.0
    starts = [check_vertex(spec, s) for s in starts]
    win = region_window(spec, region)
    sidx = win.indices_of(sites)
    uniq = sorted(set(starts))
    vecs = {s: win.unit(s) for s in uniq}
    total = 0.0
    for n in range(1, t_hi + 1):
        for s in uniq:
            vecs[s] = win.T @ vecs[s]
        if n < t_lo:
            continue
        prod = np.ones(len(sidx))
        for s in starts:
            prod *= vecs[s][sidx]
        total += prod.sum()
    return float(total)


def expected_H1(spec: CombSpec, N: int, eps: float, h: int,
                c_window: tuple[int, int], starts) -> float:
    """First moment of the banded collision count H1 over the time window."""
    sites = h1_sites(spec, N, eps, h)
    t_lo, t_hi = c_window
    return expected_collision_count(spec, starts, sites, t_lo, t_hi,
                                    Strip(h * N))


def expected_H2(spec: CombSpec, N: int, delta: float, h: int, start) -> float:
    """First moment of the annulus collision count H2 from a triple start."""
    t2 = horizon_T2(spec, N, delta)
    sites = annulus_sites(spec, N)
    return expected_collision_count(spec, [start, start, start], sites,
                                    1, t2, Strip(h * N))


_OPS_CAP = 5e9


def _site_return_cumulants(win, sidx, t_max):
    """F[m, i] = P^{w_i,w_i,w_i}(triple collision in the site band at time m).

    One killed propagation per band site; O(len(sidx) * t_max) memory.
    """
    F = np.zeros((t_max + 1, len(sidx)))
    for col, j in enumerate(sidx):
        vec = np.zeros(len(win))
        vec[j] = 1.0
        for m in range(1, t_max + 1):
            vec = win.T @ vec
            F[m, col] = float(np.sum(vec[sidx] ** 3))
    return F


def _guard_ops(est_ops, ops_cap):
    if est_ops > ops_cap:
        raise ResourceLimit(
            f"estimated {est_ops:.2e} flops exceeds cap {ops_cap:.2e}; "
            "use Monte Carlo instead"
        )


def second_moment_collision_count(spec: CombSpec, starts, sites, t_lo: int,
                                  t_hi: int, region,
                                  ops_cap: float = _OPS_CAP) -> float:
    """E[H^2] for the collision count over [t_lo, t_hi], exactly.

    Splits each time pair n < k at the earlier collision: conditional on a
    triple collision at site w at time n, the walkers restart as a fresh
    triple from w, so P(C_n and C_k) factors through the per-site return
    quantities F(k - n, w).  Cost is (|sites| + |starts|) propagations of
    t_hi steps; instances beyond the ops cap raise ResourceLimit.
    """
    if t_hi < t_lo:
        return 0.0
    starts = [check_vertex(spec, s) for s in starts]
    win = region_window(spec, region)
    _guard_ops((len(sites) + 3) * t_hi * max(win.nnz, 1), ops_cap)
    sidx = win.indices_of(sites)

    uniq = sorted(set(starts))
    vecs = {s: win.unit(s) for s in uniq}
    a = np.zeros((t_hi + 1, len(sidx)))
    for n in range(1, t_hi + 1):
        for s in uniq:
            vecs[s] = win.T @ vecs[s]
        if n >= t_lo:
            prod = np.ones(len(sidx))
            for s in starts:
                prod *= vecs[s][sidx]
            a[n] = prod

    F = _site_return_cumulants(win, sidx, t_hi - t_lo)
    G = np.cumsum(F, axis=0)  # G[m, i] = sum_{j<=m} F[j, i]

    first = float(a.sum())
    cross = 0.0
    for n in range(t_lo, t_hi):
        cross += float(a[n] @ G[t_hi - n])
    return first + 2.0 * cross


def second_moment_H1(spec: CombSpec, N: int, eps: float, h: int,
                     c_window: tuple[int, int], starts,
                     ops_cap: float = _OPS_CAP) -> float:
    sites = h1_sites(spec, N, eps, h)
    t_lo, t_hi = c_window
    return second_moment_collision_count(spec, starts, sites, t_lo, t_hi,
                                         Strip(h * N), ops_cap)


def second_moment_H2(spec: CombSpec, N: int, delta: float, h: int, start,
                     ops_cap: float = _OPS_CAP) -> float:
    t2 = horizon_T2(spec, N, delta)
    sites = annulus_sites(spec, N)
    return second_moment_collision_count(spec, [start, start, start], sites,
                                         1, t2, Strip(h * N), ops_cap)


# ---------------------------------------------------------------------------
# Exact law of the banded collision count (toy scale)
# ---------------------------------------------------------------------------

def _renewal_matrices(spec, starts, sites, t_hi, region, ops_cap):
    """a[n, i], B[j, i', i]: arrival products and per-pair return cubes."""
    starts = [check_vertex(spec, s) for s in starts]
    win = region_window(spec, region)
    _guard_ops((len(sites) + 3) * t_hi * max(win.nnz, 1)
               + (t_hi ** 2) * len(sites) ** 2, ops_cap)
    sidx = win.indices_of(sites)

    uniq = sorted(set(starts))
    vecs = {s: win.unit(s) for s in uniq}
    a = np.zeros((t_hi + 1, len(sidx)))
    for n in range(1, t_hi + 1):
        for s in uniq:
            vecs[s] = win.T @ vecs[s]
        prod = np.ones(len(sidx))
        for s in starts:
            prod *= vecs[s][sidx]
        a[n] = prod

    B = np.zeros((t_hi + 1, len(sidx), len(sidx)))
    for row, j in enumerate(sidx):
        vec = np.zeros(len(win))
        vec[j] = 1.0
        for m in range(1, t_hi + 1):
            vec = win.T @ vec
            B[m, row] = vec[sidx] ** 3
    return a, B


def _first_collision_probabilities(a, B, t_hi):
    """f[n, i] = P(first banded collision happens at time n at site i)."""
    f = np.zeros_like(a)
    for n in range(1, t_hi + 1):
        acc = a[n].copy()
        for m in range(1, n):
            acc -= f[m] @ B[n - m]
        f[n] = acc
    return f


def first_meeting_probability(spec: CombSpec, starts, sites, t_hi: int,
                              region, ops_cap: float = _OPS_CAP) -> float:
    """P(at least one banded triple collision in [1, t_hi]), exactly.

    Decomposes at the first collision time/site; exact by the strong Markov
    property since the three walkers restart as a triple from the meeting
    site.
    """
    a, B = _renewal_matrices(spec, starts, sites, t_hi, region, ops_cap)
    f = _first_collision_probabilities(a, B, t_hi)
    return float(f[1:].sum())


def collision_count_law(spec: CombSpec, starts, sites, t_hi: int, region,
                        tol: float = 1e-14,
                        ops_cap: float = _OPS_CAP) -> np.ndarray:
    """Exact distribution [P(H=0), P(H=1), ...] of the constrained count.

    Renewal argument: the k-th collision law is the (k-1)-fold convolution
    of the triple-restart first-collision kernel applied to the law of the
    first collision.  Truncates once the remaining tail mass is below tol.
    """
    a, B = _renewal_matrices(spec, starts, sites, t_hi, region, ops_cap)
    f = _first_collision_probabilities(a, B, t_hi)

    # f0[j, i', i]: from a triple at site i', first banded collision at j, i.
    S = len(sites)
    f0 = np.zeros_like(B)
    for j in range(1, t_hi + 1):
        acc = B[j].copy()
        for i in range(1, j):
            acc -= f0[i] @ B[j - i]
        f0[j] = acc
    # Survivor function: F0cum[t, i] = P(a triple at site i recollides in
    # the band within t steps).
    F0cum = np.cumsum(f0.sum(axis=2), axis=0)

    probs = []
    g = f  # g[n, i] = P(k-th collision at time n, site i)
    total = float(f[1:].sum())
    probs.append(1.0 - total)  # P(H1 = 0)
    k_cap = t_hi + 1
    for _ in range(k_cap):
        mass_k = 0.0
        for n in range(1, t_hi + 1):
            mass_k += float(g[n] @ (1.0 - F0cum[t_hi - n]))
        probs.append(mass_k)
        remaining = total - sum(probs[1:])
        if remaining < tol:
            break
        nxt = np.zeros_like(g)
        for n in range(2, t_hi + 1):
            acc = np.zeros(S)
            for m in range(1, n):
                acc += g[m] @ f0[n - m]
            nxt[n] = acc
        g = nxt
    return np.array(probs)


def h1_law(spec: CombSpec, N: int, eps: float, h: int, t_hi: int, starts,
           tol: float = 1e-14, ops_cap: float = _OPS_CAP) -> np.ndarray:
    """Exact law of the banded collision count H1 over [1, t_hi]."""
    sites = h1_sites(spec, N, eps, h)
    return collision_count_law(spec, starts, sites, t_hi, Strip(h * N),
                               tol, ops_cap)


# ---------------------------------------------------------------------------
# 1D interval kernels (killed at both endpoints)
# ---------------------------------------------------------------------------

def interval_step(vec):
    out = np.zeros_like(vec)
    out[1:-1] = 0.5 * (vec[:-2] + vec[2:])
    out[0] = out[-1] = 0.0
    return out


def kernel_1d(L: int, x: int, y: int, n: int) -> float:
    """Killed interval kernel q^L_n(x, y) on {0..L}, absorbing at {0, L}.

    Interior vertices have degree 2; the kernel at an absorbed endpoint is
    defined as 0.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    if not (0 <= x <= L and 0 <= y <= L):
        raise ValueError("x, y must lie in {0..L}")
    if y == 0 or y == L:
        return 0.0
    vec = np.zeros(L + 1)
    if x == 0 or x == L:
        return 0.0
    vec[x] = 1.0
    for _ in range(n):
        vec = interval_step(vec)
    return float(vec[y] / 2.0)


def kernel_1d_free(x: int, y: int, n: int) -> float:
    """Free 1D kernel p_n(x, y) = P(S_n = y - x) / 2 on Z."""
    k = y - x
    if (k - n) % 2 != 0 or abs(k) > n:
        return 0.0
    j = (n + k) // 2
    return math.comb(n, j) * 0.5 ** n / 2.0


# ---------------------------------------------------------------------------
# First-passage decomposition of the killed kernel
# ---------------------------------------------------------------------------

def first_hit_decomposition(spec: CombSpec, x, y, n: int, killed_on) -> float:
    """RHS of the killed-kernel first-hit identity:

        p_n^B(x, y) = sum_k P^x(tau_B > n-2k, first hit of y at n-2k)
                      * p^B_{2k}(y, y).

    Computed with a taboo propagation that records and removes mass on
    arrival at y; used to cross-validate the direct killed kernel.
    """
    x = check_vertex(spec, x)
    y = check_vertex(spec, y)
    win = region_window(spec, killed_on)
    jy = win.index[y]
    hit = np.zeros(n + 1)
    vec = win.unit(x)
    if x == y:
        hit[0] = 1.0
        vec[jy] = 0.0
    for m in range(1, n + 1):
        vec = win.T @ vec
        hit[m] = vec[jy]
        vec[jy] = 0.0
    diag = on_diagonal_series(spec, y, max(n, 1), killed_on)
    total = 0.0
    for k in range(0, n // 2 + 1):
        m = n - 2 * k
        total += hit[m] * diag[k]
    return float(total)
