"""Incremental Bowyer-Watson Delaunay triangulation.

The convex hull is closed with *ghost* triangles that share a single vertex
at infinity, so no bounding super-triangle is needed and hull edges come out
right.  Orientation and in-circle tests use a floating-point filter and fall
back to exact rational arithmetic when the filter cannot decide the sign.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

GHOST = -1

# Shewchuk's static error bounds for the plain float evaluation
_EPS = 2.0 ** -53
_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def orient2d(a, b, c) -> int:
    """Sign of twice the signed area of ``abc``: +1 counter-clockwise."""
    l = (a[0] - c[0]) * (b[1] - c[1])
    r = (a[1] - c[1]) * (b[0] - c[0])
    det = l - r
    bound = _ORIENT_BOUND * (abs(l) + abs(r))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


def incircle(a, b, c, d) -> int:
    """+1 if ``d`` lies strictly inside the circle through counter-clockwise
    ``a, b, c``; -1 outside; 0 co-circular."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    bc = bdx * cdy - cdx * bdy
    ca = cdx * ady - adx * cdy
    ab = adx * bdy - bdx * ady
    det = alift * bc + blift * ca + clift * ab
    permanent = (
        (abs(bdx * cdy) + abs(cdx * bdy)) * alift
        + (abs(cdx * ady) + abs(adx * cdy)) * blift
        + (abs(adx * bdy) + abs(bdx * ady)) * clift
    )
    bound = _INCIRCLE_BOUND * permanent
    if det > bound:
        return 1
    if -det > bound:
        return -1
    fa = [Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])]
    adx, ady = fa[0] - fa[6], fa[1] - fa[7]
    bdx, bdy = fa[2] - fa[6], fa[3] - fa[7]
    cdx, cdy = fa[4] - fa[6], fa[5] - fa[7]
    exact = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
             + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
             + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return (exact > 0) - (exact < 0)


def circumcircle(a, b, c) -> tuple[float, float, float]:
    """Centre and radius of the circle through three points."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return ux, uy, float(np.hypot(ax - ux, ay - uy))


@dataclass(frozen=True, eq=False)
class Triangulation:
    points: np.ndarray
    triangles: np.ndarray  # (T, 3) counter-clockwise vertex ids
    neighbors: tuple[tuple[int, ...], ...]
    hull: tuple[int, ...]  # vertices on the convex hull, unordered

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i, nb in enumerate(self.neighbors) for j in nb if i < j}

    def degree(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=np.int64)


def _hilbert_key(x: int, y: int, order: int) -> int:
    d = 0
    s = 1 << (order - 1)
    while s > 0:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x, y = s - 1 - x, s - 1 - y
            x, y = y, x
        s >>= 1
    return d


def _insertion_order(pts: np.ndarray) -> list[int]:
    lo = pts.min(axis=0)
    span = float(np.max(pts.max(axis=0) - lo)) or 1.0
    order = 16
    q = np.floor((pts - lo) / span * ((1 << order) - 1)).astype(np.int64)
    keys = [_hilbert_key(int(x), int(y), order) for x, y in q]
    return sorted(range(len(pts)), key=keys.__getitem__)


class _Builder:
    def __init__(self, pts: list[tuple[float, float]]):
        self.p = pts
        self.tris: dict[int, tuple[int, int, int]] = {}
        self.edge: dict[tuple[int, int], int] = {}
        self.next_id = 0
        self.last = -1

    def add(self, a: int, b: int, c: int) -> int:
        t = self.next_id
        self.next_id += 1
        self.tris[t] = (a, b, c)
        self.edge[(a, b)] = t
        self.edge[(b, c)] = t
        self.edge[(c, a)] = t
        if c != GHOST:
            self.last = t
        return t

    def remove(self, t: int) -> None:
        a, b, c = self.tris.pop(t)
        for e in ((a, b), (b, c), (c, a)):
            if self.edge.get(e) == t:
                del self.edge[e]

    def in_conflict(self, t: int, q: int) -> bool:
        a, b, c = self.tris[t]
        p = self.p
        if c != GHOST:
            return incircle(p[a], p[b], p[c], p[q]) > 0
        # ghost: open half-plane outside the hull edge a->b, plus the open edge itself
        o = orient2d(p[a], p[b], p[q])
        if o > 0:
            return True
        if o < 0:
            return False
        pa, pb, pq = p[a], p[b], p[q]
        return (min(pa[0], pb[0]) <= pq[0] <= max(pa[0], pb[0])
                and min(pa[1], pb[1]) <= pq[1] <= max(pa[1], pb[1]))

    def locate(self, q: int) -> int:
        """Visibility walk from the last created real triangle."""
        p = self.p
        t = self.last if self.last in self.tris else next(k for k, v in self.tris.items() if v[2] != GHOST)
        for _ in range(4 * len(self.tris) + 16):
            a, b, c = self.tris[t]
            if c == GHOST:
                return t
            for e0, e1 in ((a, b), (b, c), (c, a)):
                if orient2d(p[e0], p[e1], p[q]) < 0:
                    t = self.edge[(e1, e0)]
                    break
            else:
                return t
        # walk failed to terminate; fall back to a scan
        return next(k for k in self.tris if self.in_conflict(k, q))

    def insert(self, q: int) -> None:
        seed = self.locate(q)
        if not self.in_conflict(seed, q):
            seed = next(k for k in self.tris if self.in_conflict(k, q))
        cavity = {seed}
        stack = [seed]
        while stack:
            t = stack.pop()
            a, b, c = self.tris[t]
            for e0, e1 in ((a, b), (b, c), (c, a)):
                nb = self.edge.get((e1, e0))
                if nb is not None and nb not in cavity and self.in_conflict(nb, q):
                    cavity.add(nb)
                    stack.append(nb)
        boundary = []
        for t in cavity:
            a, b, c = self.tris[t]
            for e0, e1 in ((a, b), (b, c), (c, a)):
                if self.edge.get((e1, e0)) not in cavity:
                    boundary.append((e0, e1))
        for t in cavity:
            self.remove(t)
        for e0, e1 in boundary:
            if e1 == GHOST:
                self.add(q, e0, GHOST)
            elif e0 == GHOST:
                self.add(e1, q, GHOST)
            else:
                self.add(e0, e1, q)


def delaunay(points) -> Triangulation:
    """Delaunay triangulation of distinct 2-d points.

    Fewer than three points, or all points collinear, give no triangles; in
    the collinear case consecutive points along the line are still reported
    as neighbours.  Exact duplicates raise ``ValueError``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if len({(float(x), float(y)) for x, y in pts}) != n:
        raise ValueError("duplicate points")
    empty = np.zeros((0, 3), dtype=np.int64)
    if n < 3:
        nb = tuple(tuple(j for j in range(n) if j != i) for i in range(n)) if n == 2 else tuple(() for _ in range(n))
        return Triangulation(pts, empty, nb, tuple(range(n)))

    plist = [(float(x), float(y)) for x, y in pts]
    order = _insertion_order(pts)
    i0, i1 = order[0], order[1]
    k = next((k for k in range(2, n) if orient2d(plist[i0], plist[i1], plist[order[k]]) != 0), None)
    if k is None:
        line = sorted(range(n), key=lambda i: plist[i])
        nb = [[] for _ in range(n)]
        for a, b in zip(line, line[1:]):
            nb[a].append(b)
            nb[b].append(a)
        return Triangulation(pts, empty, tuple(tuple(sorted(x)) for x in nb), tuple(range(n)))

    i2 = order[k]
    if orient2d(plist[i0], plist[i1], plist[i2]) < 0:
        i1, i2 = i2, i1
    bld = _Builder(plist)
    bld.add(i0, i1, i2)
    bld.add(i1, i0, GHOST)
    bld.add(i2, i1, GHOST)
    bld.add(i0, i2, GHOST)
    for q in order[2:]:
        if q != i1 and q != i2:
            bld.insert(q)

    real = [t for t in bld.tris.values() if t[2] != GHOST]
    nb_sets: list[set[int]] = [set() for _ in range(n)]
    hull: set[int] = set()
    for a, b, c in bld.tris.values():
        if c == GHOST:
            hull.update((a, b))
            nb_sets[a].add(b)
            nb_sets[b].add(a)
        else:
            nb_sets[a].update((b, c))
            nb_sets[b].update((a, c))
            nb_sets[c].update((a, b))
    return Triangulation(
        pts,
        np.array(real, dtype=np.int64).reshape(-1, 3),
        tuple(tuple(sorted(s)) for s in nb_sets),
        tuple(sorted(hull)),
    )


def empty_circumcircle_violations(tri: Triangulation, rel_tol: float = 1e-9) -> list[tuple[int, int]]:
    """(triangle index, point index) pairs where a point lies inside a
    triangle's circumcircle by more than ``rel_tol`` times the radius."""
    bad = []
    pts = tri.points
    for k, (a, b, c) in enumerate(tri.triangles):
        ux, uy, r = circumcircle(pts[a], pts[b], pts[c])
        d = np.hypot(pts[:, 0] - ux, pts[:, 1] - uy)
        inside = np.flatnonzero(d < r * (1.0 - rel_tol))
        bad.extend((k, int(i)) for i in inside if i not in (a, b, c))
    return bad
