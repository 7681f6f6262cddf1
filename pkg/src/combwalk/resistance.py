"""Electrical-network quantities on finite windows of the comb.

Every edge carries unit conductance.  For a finite vertex set B, the
complement is fused into a single grounded node, which leaves the interior
Laplacian L_B with diag(L_B) = full comb degree and off-diagonal -1 for
edges inside B.  Then, with G = L_B^{-1},

    R(x, B^c)        = G[x, x]           (unit current injected at x)
    R_{B^c}(x, y)    = G[x,x] + G[y,y] - 2 G[x,y]

and the occupation density of the walk started at x and killed on exiting
B satisfies  2 g(y) = R(x, B^c) + R(y, B^c) - R_{B^c}(x, y),  so that the
expected exit time is sum_y g(y) deg(y).  The same exit time also solves
the Dirichlet system m = 1 + (mean of m over neighbors) on B, m = 0 off B,
which this module keeps as an independent cross-check route.

The comb is a tree, so the pairwise effective resistance equals the graph
distance; the Laplacian solve is retained as an oracle for that identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import CombSpec, Vertex, check_vertex, degree, distance, neighbors
from .kernel import ResourceLimit

__all__ = [
    "ExitProfile",
    "pair_resistance",
    "pair_resistance_solve",
    "resistance_to_boundary",
    "fused_pair_resistance",
    "occupation_density",
    "expected_exit_time_direct",
    "expected_exit_times",
]

_DENSE_CUTOFF = 600
_INVERSE_CAP = 4096


def _as_vertex_list(spec, B) -> list[Vertex]:
    if hasattr(B, "vertices"):
        vs = B.vertices(spec)
    else:
        vs = list(B)
    return sorted({Vertex(*v) for v in vs})


def _interior_laplacian(spec, vs):
    """Laplacian rows/cols for B with the fused complement eliminated.

    Also returns the total conductance to the boundary, used to reject
    regions with no boundary edge (unbounded resistance).
    """
    index = {v: i for i, v in enumerate(vs)}
    n = len(vs)
    rows, cols, data = [], [], []
    boundary = 0
    for j, v in enumerate(vs):
        nbrs = neighbors(spec, v)
        rows.append(j)
        cols.append(j)
        data.append(float(len(nbrs)))
        for u in nbrs:
            i = index.get(u)
            if i is None:
                boundary += 1
            else:
                rows.append(i)
                cols.append(j)
                data.append(-1.0)
    L = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return L, index, boundary


def _solve(L, b):
    if L.shape[0] <= _DENSE_CUTOFF:
        return np.linalg.solve(L.toarray(), b)
    return spla.spsolve(L.tocsc(), b)


def pair_resistance(spec: CombSpec, u, v) -> float:
    """Effective resistance between two vertices; on a tree this is the
    graph distance exactly.  R(x, x) = 0 by convention."""
    u = check_vertex(spec, u)
    v = check_vertex(spec, v)
    if u == v:
        return 0.0
    return float(distance(spec, u, v))


def pair_resistance_solve(spec: CombSpec, u, v, window) -> float:
    """Pairwise resistance via a Laplacian solve on the induced subgraph.

    The window must contain u and v; degrees are the induced ones, so on a
    tree window the result equals distance(u, v) up to solver tolerance.
    """
    u = check_vertex(spec, u)
    v = check_vertex(spec, v)
    vs = _as_vertex_list(spec, window)
    index = {w: i for i, w in enumerate(vs)}
    if u not in index or v not in index:
        raise ValueError("window must contain both vertices")
    if u == v:
        return 0.0
    n = len(vs)
    rows, cols, data = [], [], []
    for j, w in enumerate(vs):
        d = 0
        for nb in neighbors(spec, w):
            i = index.get(nb)
            if i is not None:
                d += 1
                rows.append(i)
                cols.append(j)
                data.append(-1.0)
        rows.append(j)
        cols.append(j)
        data.append(float(d))
    L = sp.csr_matrix((data, (rows, cols)), shape=(n, n)).tolil()
    # Pin the potential at u to ground the singular system.
    iu, iv = index[u], index[v]
    L[iu, :] = 0.0
    L[iu, iu] = 1.0
    b = np.zeros(n)
    b[iv] = -1.0  # extract unit current at v, inject at grounded u
    pot = _solve(sp.csr_matrix(L), b)
    return float(pot[iu] - pot[iv])


def resistance_to_boundary(spec: CombSpec, x, B) -> float:
    """Effective resistance R(x, B^c) between x and the fused complement."""
    x = check_vertex(spec, x)
    vs = _as_vertex_list(spec, B)
    L, index, boundary = _interior_laplacian(spec, vs)
    if x not in index:
        raise ValueError("x must belong to B")
    if boundary == 0:
        raise ValueError("B has no boundary edge: resistance is unbounded")
    b = np.zeros(len(vs))
    b[index[x]] = 1.0
    pot = _solve(L, b)
    return float(pot[index[x]])


def fused_pair_resistance(spec: CombSpec, x, y, B) -> float:
    """R_{B^c}(x, y): resistance between x and y with B^c fused to one node.

    Never exceeds the tree distance between x and y.
    """
    x = check_vertex(spec, x)
    y = check_vertex(spec, y)
    if x == y:
        return 0.0
    vs = _as_vertex_list(spec, B)
    L, index, boundary = _interior_laplacian(spec, vs)
    if x not in index or y not in index:
        raise ValueError("x and y must belong to B")
    if boundary == 0:
        raise ValueError("B has no boundary edge: resistance is unbounded")
    b = np.zeros(len(vs))
    b[index[x]] = 1.0
    b[index[y]] = -1.0
    pot = _solve(L, b)
    return float(pot[index[x]] - pot[index[y]])


@dataclass(frozen=True)
class ExitProfile:
    """Occupation densities g over B and the resulting expected exit time."""

    g: dict
    expected_exit_time: float


def occupation_density(spec: CombSpec, x, B) -> ExitProfile:
    """Occupation density of the walk from x killed on exiting B.

    Evaluates, for every y in B, the three-resistance identity
    2 g(y) = R(x, B^c) + R(y, B^c) - R_{B^c}(x, y), all three terms read
    from the inverse of the interior Laplacian.
    """
    x = check_vertex(spec, x)
    vs = _as_vertex_list(spec, B)
    if len(vs) > _INVERSE_CAP:
        raise ResourceLimit(
            f"occupation density needs the dense Laplacian inverse; "
            f"|B| = {len(vs)} exceeds {_INVERSE_CAP}"
        )
    L, index, boundary = _interior_laplacian(spec, vs)
    if x not in index:
        raise ValueError("x must belong to B")
    if boundary == 0:
        raise ValueError("B has no boundary edge: exit time is infinite")
    G = np.linalg.inv(L.toarray())
    ix = index[x]
    r_x = G[ix, ix]
    g = {}
    expected = 0.0
    for y, iy in index.items():
        r_y = G[iy, iy]
        r_fused = r_x + r_y - 2.0 * G[ix, iy]
        gy = 0.5 * (r_x + r_y - r_fused)
        g[y] = gy
        expected += gy * degree(spec, y)
    return ExitProfile(g=g, expected_exit_time=float(expected))


def expected_exit_times(spec: CombSpec, B):
    """Expected exit time of B from every start, via the Dirichlet system.

    Solves m(v) = 1 + mean over neighbors of m (m = 0 outside B) and
    returns (vertices, m) with entries aligned.
    """
    vs = _as_vertex_list(spec, B)
    index = {v: i for i, v in enumerate(vs)}
    n = len(vs)
    rows, cols, data = [], [], []
    boundary = 0
    for j, v in enumerate(vs):
        nbrs = neighbors(spec, v)
        rows.append(j)
        cols.append(j)
        data.append(1.0)
        w = 1.0 / len(nbrs)
        for u in nbrs:
            i = index.get(u)
            if i is None:
                boundary += 1
            else:
                rows.append(j)
                cols.append(i)
                data.append(-w)
    if boundary == 0:
        raise ValueError("B has no boundary edge: exit time is infinite")
    A = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    if n <= _DENSE_CUTOFF:
        m = np.linalg.solve(A.toarray(), np.ones(n))
    else:
        m = spla.spsolve(A.tocsc(), np.ones(n))
    return vs, m


def expected_exit_time_direct(spec: CombSpec, x, B) -> float:
    """E^x(exit time of B) from the Dirichlet linear system."""
    x = check_vertex(spec, x)
    vs, m = expected_exit_times(spec, B)
    index = {v: i for i, v in enumerate(vs)}
    if x not in index:
        raise ValueError("x must belong to B")
    return float(m[index[x]])
