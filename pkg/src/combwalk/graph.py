"""Comb graphs over the integer line with truncated teeth.

A comb here is Z (the backbone, at height 0) with a vertical path (the
tooth) attached at each integer n.  The tooth at n is truncated at a
family-dependent height:

    log family    floor( ln(max(|n|,1)) ** alpha )
    poly family   floor( |n| ** alpha )
    custom        any user-supplied nonnegative integer height function

The graph is infinite and never materialized: every query (degree,
neighbors, distance, balls, volumes) is computed on demand from the
CombSpec.  Vertices are (n, x) pairs with 0 <= x <= tooth_height(n);
x = 0 is the backbone vertex at n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

__all__ = [
    "CombSpec",
    "Vertex",
    "Ball",
    "Strip",
    "InadmissibleVertex",
    "log_comb",
    "poly_comb",
    "custom_comb",
    "tooth_height",
    "is_admissible",
    "check_vertex",
    "degree",
    "neighbors",
    "distance",
    "ball",
    "volume",
    "volume_witness_lower_bound",
    "parity",
    "strip_vertices",
    "heights_array",
]


class InadmissibleVertex(ValueError):
    """Raised when a vertex does not belong to the comb."""


class Vertex(NamedTuple):
    """A comb vertex: backbone coordinate n, height x on the tooth at n."""

    n: int
    x: int


@dataclass(frozen=True)
class CombSpec:
    """Parameterization of one comb graph.

    family is "log", "poly" or "custom".  For "custom", ``height`` maps a
    backbone coordinate to a nonnegative integer tooth height.  log_base
    defaults to the natural logarithm; it is exposed for experiments only.
    """

    family: str = "log"
    alpha: float = 1.0
    height: Callable[[int], int] | None = None
    log_base: float = math.e

    def __post_init__(self):
        if self.family not in ("log", "poly", "custom"):
            raise ValueError(f"unknown comb family {self.family!r}")
        if self.family in ("log", "poly") and not self.alpha > 0:
            raise ValueError("alpha must be positive for log/poly combs")
        if self.family == "custom" and self.height is None:
            raise ValueError("custom family requires a height function")
        if not self.log_base > 1:
            raise ValueError("log_base must exceed 1")


def log_comb(alpha: float = 1.0, log_base: float = math.e) -> CombSpec:
    return CombSpec(family="log", alpha=alpha, log_base=log_base)


def poly_comb(alpha: float = 1.0) -> CombSpec:
    return CombSpec(family="poly", alpha=alpha)


def custom_comb(height: Callable[[int], int]) -> CombSpec:
    return CombSpec(family="custom", height=height)


def tooth_height(spec: CombSpec, n: int) -> int:
    """Height of the tooth at backbone coordinate n (0 means no tooth)."""
    if spec.family == "log":
        a = abs(n)
        if a <= 1:
            return 0
        v = math.log(a)
        if spec.log_base != math.e:
            v /= math.log(spec.log_base)
        return int(math.floor(v ** spec.alpha))
    if spec.family == "poly":
        return int(math.floor(abs(n) ** spec.alpha))
    h = spec.height(n)
    if h < 0:
        raise ValueError(f"custom height({n}) = {h} is negative")
    return int(h)


def is_admissible(spec: CombSpec, v) -> bool:
    n, x = v
    return 0 <= x <= tooth_height(spec, n)


def check_vertex(spec: CombSpec, v) -> Vertex:
    v = Vertex(*v)
    if not is_admissible(spec, v):
        raise InadmissibleVertex(f"{tuple(v)} is not a vertex of this comb")
    return v


def parity(v) -> int:
    """Parity class (n + x) mod 2; flips at every walk step."""
    n, x = v
    return (n + x) & 1


def neighbors(spec: CombSpec, v) -> list[Vertex]:
    """Adjacent vertices, in canonical order (by n, then x)."""
    n, x = check_vertex(spec, v)
    h = tooth_height(spec, n)
    if x == 0:
        out = [Vertex(n - 1, 0)]
        if h >= 1:
            out.append(Vertex(n, 1))
        out.append(Vertex(n + 1, 0))
        return out
    out = [Vertex(n, x - 1)]
    if x < h:
        out.append(Vertex(n, x + 1))
    return out


def degree(spec: CombSpec, v) -> int:
    return len(neighbors(spec, v))


def distance(spec: CombSpec, u, v) -> int:
    """Shortest-path distance; the comb is a tree so the path is forced."""
    u = check_vertex(spec, u)
    v = check_vertex(spec, v)
    if u.n == v.n:
        return abs(u.x - v.x)
    return u.x + abs(u.n - v.n) + v.x


@dataclass(frozen=True)
class Ball:
    """Closed metric ball: members = { y : d(center, y) <= radius }."""

    center: Vertex
    radius: int
    members: tuple = ()
    _member_set: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __len__(self):
        return len(self.members)

    def contains(self, v) -> bool:
        return Vertex(*v) in self._member_set

    def vertices(self, spec=None):
        return list(self.members)


def ball(spec: CombSpec, center, r: int) -> Ball:
    """Enumerate B(center, r) exactly via the closed-form tree distance."""
    c = check_vertex(spec, center)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    members = []
    # On the center's own tooth the distance is purely vertical.
    h0 = tooth_height(spec, c.n)
    for z in range(max(0, c.x - r), min(h0, c.x + r) + 1):
        members.append(Vertex(c.n, z))
    # Other teeth are reachable only through the backbone at cost x + |dn|.
    span = r - c.x
    for m in range(c.n - span, c.n + span + 1):
        if m == c.n:
            continue
        budget = span - abs(m - c.n)
        top = min(tooth_height(spec, m), budget)
        for z in range(0, top + 1):
            members.append(Vertex(m, z))
    members.sort()
    return Ball(center=c, radius=r, members=tuple(members),
                _member_set=frozenset(members))


def volume(spec: CombSpec, center, r: int) -> int:
    """|B(center, r)| without materializing the ball."""
    c = check_vertex(spec, center)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    h0 = tooth_height(spec, c.n)
    count = min(h0, c.x + r) - max(0, c.x - r) + 1
    span = r - c.x
    for m in range(c.n - span, c.n + span + 1):
        if m == c.n:
            continue
        budget = span - abs(m - c.n)
        count += min(tooth_height(spec, m), budget) + 1
    return count


def volume_witness_lower_bound(spec: CombSpec, x, r: int) -> int:
    """Tooth-sum witness for the ball volume from a nonnegative start.

    For x = (n, u) with n >= 0 and r >= u, sums over the teeth strictly to
    the right of n the number of their vertices that provably lie in
    B(x, r):  sum_{y=n+1}^{n+r-u}  min( tooth_height(y), r - u - y + n ).
    Always a lower bound on volume(x, r).
    """
    v = check_vertex(spec, x)
    if v.n < 0 or r < v.x:
        raise ValueError("requires x.n >= 0 and r >= x.x")
    span = r - v.x
    total = 0
    for y in range(v.n + 1, v.n + span + 1):
        total += min(tooth_height(spec, y), span - (y - v.n))
    return total


@dataclass(frozen=True)
class Strip:
    """The strip of all comb vertices with |n| <= N."""

    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("strip half-width must be nonnegative")

    def contains(self, v) -> bool:
        return abs(v[0]) <= self.N

    def vertices(self, spec: CombSpec) -> list[Vertex]:
        return list(strip_vertices(spec, self.N))


def strip_vertices(spec: CombSpec, N: int) -> Iterator[Vertex]:
    """All vertices with |n| <= N, in canonical order."""
    for n in range(-N, N + 1):
        for x in range(tooth_height(spec, n) + 1):
            yield Vertex(n, x)


def heights_array(spec: CombSpec, n_max: int):
    """Tooth heights for -n_max <= n <= n_max as an int64 array.

    Index i holds tooth_height(i - n_max), so asymmetric custom height
    functions are represented faithfully.  Built by looping tooth_height so
    that simulation code sees exactly the same floor semantics as the
    per-vertex queries.
    """
    import numpy as np

    out = np.empty(2 * n_max + 1, dtype=np.int64)
    for n in range(-n_max, n_max + 1):
        out[n + n_max] = tooth_height(spec, n)
    return out
