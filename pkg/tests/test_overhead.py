import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import Delaunay as ScipyDelaunay

from gibbscell.overhead import (
    OverheadParams,
    delaunay,
    hetero_overhead,
    macro_overhead,
    monte_carlo_overhead,
    sample_ppp,
)
from gibbscell.overhead.delaunay import circumcircle, empty_circumcircle_violations, incircle, orient2d


# -- analytic ------------------------------------------------------------------

def test_macro_reference_values():
    rep = macro_overhead(OverheadParams(lambda_m=1.0, lambda_u=10.0, tau=1.0))
    assert rep.uplink == 60.0
    assert rep.backhaul == 120.0
    assert rep.second_moment_users == pytest.approx(138.0)
    assert rep.uplink_bound == pytest.approx(math.sqrt(138 * 37.7742))
    assert rep.uplink_bound == pytest.approx(72.2, abs=0.05)
    assert rep.uplink_bound >= rep.uplink


def test_macro_scales_with_tau_and_density():
    a = macro_overhead(OverheadParams(lambda_m=2.0, lambda_u=20.0, tau=0.5))
    assert a.uplink == 30.0 and a.backhaul == 60.0


def test_no_users():
    rep = macro_overhead(OverheadParams(lambda_m=1.0, lambda_u=0.0))
    assert rep.uplink == 0.0 and rep.uplink_bound == 0.0 and rep.backhaul == 0.0


def test_zero_macro_intensity():
    with pytest.raises(ValueError):
        macro_overhead(OverheadParams(lambda_m=0.0, lambda_u=10.0))


def test_param_validation():
    with pytest.raises(ValueError):
        OverheadParams(lambda_m=1.0, lambda_u=-1.0)
    with pytest.raises(ValueError):
        OverheadParams(lambda_m=1.0, lambda_u=1.0, tau=0.0)


def test_hetero_reference_values():
    rho = math.sqrt(1.0 / (10.0 * math.pi))  # lambda_u * pi * rho^2 = 1
    with pytest.warns(UserWarning, match="sparse"):
        p = OverheadParams(lambda_m=1.0, lambda_u=10.0, lambda_s=3.0, rho=rho, tau=1.0)
    rep = hetero_overhead(p)
    assert rep.small_cell_users == pytest.approx(1.0)
    assert rep.macro_cell_users == pytest.approx(7.0)
    assert rep.small_neighbors_of_macro == pytest.approx(21.0)
    assert rep.uplink_macro == pytest.approx(63.0)
    assert rep.uplink_small == pytest.approx(70.0)
    assert rep.backhaul_macro_small == pytest.approx(133.0)
    assert rep.backhaul_macro_macro == pytest.approx(126.0)


def test_hetero_reductions():
    base = macro_overhead(OverheadParams(lambda_m=1.0, lambda_u=10.0, tau=2.0))
    no_small = hetero_overhead(OverheadParams(lambda_m=1.0, lambda_u=10.0, lambda_s=0.0, rho=0.1, tau=2.0))
    assert no_small.uplink_macro == base.uplink
    assert no_small.backhaul_macro_macro == base.backhaul
    assert no_small.macro_cell_users == 10.0
    no_radius = hetero_overhead(OverheadParams(lambda_m=1.0, lambda_u=10.0, lambda_s=5.0, rho=0.0, tau=2.0))
    assert no_radius.small_cell_users == 0.0
    assert no_radius.uplink_macro == base.uplink


def test_hetero_overfull_small_cells():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = OverheadParams(lambda_m=1.0, lambda_u=10.0, lambda_s=20.0, rho=0.2)
    with pytest.raises(ValueError, match="negative"):
        hetero_overhead(p)


# -- point process -------------------------------------------------------------

def test_ppp_empty():
    assert sample_ppp(0.0, (10.0, 10.0), np.random.default_rng(0)).shape == (0, 2)


def test_ppp_count_statistics():
    rng = np.random.default_rng(0)
    counts = np.array([len(sample_ppp(1.0, (10.0, 10.0), rng)) for _ in range(10_000)])
    assert counts.mean() == pytest.approx(100.0, rel=0.01)
    assert counts.var() == pytest.approx(counts.mean(), rel=0.05)


def test_ppp_positions_in_window():
    pts = sample_ppp(5.0, (3.0, 2.0), np.random.default_rng(1))
    assert np.all((pts >= 0) & (pts <= [3.0, 2.0]))


# -- predicates and triangulation ---------------------------------------------

def test_predicates_exact_on_degenerate_input():
    assert orient2d((0.5, 0.5), (12.0, 12.0), (24.0, 24.0)) == 0
    assert orient2d((0.0, 0.0), (1.0, 0.0), (0.5, 1e-300)) == 1
    # nearly collinear points where naive floating point can misjudge
    a, b = (0.5, 0.5), (12.0, 12.0)
    c = (24.000000000000004, 24.0)
    assert orient2d(a, b, c) == -1
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.5, 0.5)) == 1
    assert incircle((0, 0), (1, 0), (0, 1), (2.0, 2.0)) == -1


def test_three_points():
    tri = delaunay([(0, 0), (1, 0), (0, 1)])
    assert len(tri.triangles) == 1
    assert all(len(nb) == 2 for nb in tri.neighbors)


def test_square_either_diagonal():
    tri = delaunay([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert len(tri.edges) in (4, 5)
    assert len(tri.edges) == 5  # a triangulation always adds one diagonal
    assert empty_circumcircle_violations(tri) == []


def test_small_inputs():
    assert delaunay([]).edges == set()
    assert delaunay([(0, 0)]).edges == set()
    assert len(delaunay([(0, 0), (1, 1)]).triangles) == 0
    with pytest.raises(ValueError, match="duplicate"):
        delaunay([(0, 0), (1, 1), (0, 0)])


def test_collinear_points():
    tri = delaunay([(2, 2), (0, 0), (1, 1), (3, 3)])
    assert len(tri.triangles) == 0
    assert tri.edges == {(1, 2), (0, 2), (0, 3)}


def test_grid_is_valid():
    xs, ys = np.meshgrid(np.arange(10.0), np.arange(10.0))
    tri = delaunay(np.column_stack([xs.ravel(), ys.ravel()]))
    assert len(tri.triangles) == 162
    assert empty_circumcircle_violations(tri) == []


def test_triangles_counter_clockwise():
    pts = np.random.default_rng(3).uniform(size=(200, 2))
    tri = delaunay(pts)
    for a, b, c in tri.triangles:
        assert orient2d(pts[a], pts[b], pts[c]) == 1


def test_adjacency_symmetric():
    tri = delaunay(np.random.default_rng(4).uniform(size=(300, 2)))
    for i, nb in enumerate(tri.neighbors):
        for j in nb:
            assert i in tri.neighbors[j]


def test_matches_scipy():
    rng = np.random.default_rng(5)
    for n in (4, 20, 500):
        pts = rng.uniform(size=(n, 2))
        ours = delaunay(pts).edges
        ref = set()
        for s in ScipyDelaunay(pts).simplices:
            for i, j in ((0, 1), (1, 2), (0, 2)):
                ref.add((min(s[i], s[j]), max(s[i], s[j])))
        assert ours == ref


def test_euler_relation():
    pts = np.random.default_rng(6).uniform(size=(400, 2))
    tri = delaunay(pts)
    h = len(tri.hull)
    assert len(tri.triangles) == 2 * 400 - 2 - h
    assert len(tri.edges) == 3 * 400 - 3 - h


def test_circumcircle():
    ux, uy, r = circumcircle((0, 0), (2, 0), (0, 2))
    assert (ux, uy) == pytest.approx((1, 1))
    assert r == pytest.approx(math.sqrt(2))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 120), grid=st.booleans())
def test_property_empty_circumcircle(seed, n, grid):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, 2))
    if grid:
        pts = np.unique(np.round(pts * 6) / 6, axis=0)  # many co-circular quadruples
        if len(pts) < 3:
            return
    tri = delaunay(pts)
    assert empty_circumcircle_violations(tri) == []


# -- Voronoi duality -----------------------------------------------------------

def clip(poly, a, b):
    """Part of polygon ``poly`` with ``a . x <= b``."""
    out = []
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        fp, fq = a @ p - b, a @ q - b
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            out.append(p + (q - p) * fp / (fp - fq))
    return out


def voronoi_neighbours(pts, pad=1e3):
    """Brute force: clip a big box by every bisector half-plane, then two
    sites are neighbours when the cell of one has an edge on their bisector."""
    lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
    box = [np.array(v) for v in ((lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1]))]
    pairs = set()
    for i, p in enumerate(pts):
        cell = box
        for j, q in enumerate(pts):
            if j != i:
                cell = clip(cell, q - p, (q @ q - p @ p) / 2)
        for j, q in enumerate(pts):
            if j == i:
                continue
            a, b = q - p, (q @ q - p @ p) / 2
            scale = np.linalg.norm(a) * (np.abs(pts).max() + pad)
            on = [v for v in cell if abs(a @ v - b) <= 1e-9 * scale]
            if len(on) >= 2 and max(np.linalg.norm(u - v) for u in on for v in on) > 1e-9:
                pairs.add((min(i, j), max(i, j)))
    return pairs


def test_voronoi_duality():
    rng = np.random.default_rng(7)
    for _ in range(20):
        pts = rng.uniform(size=(20, 2))
        assert delaunay(pts).edges == voronoi_neighbours(pts)


# -- Monte Carlo ---------------------------------------------------------------

def test_monte_carlo_small_run():
    params = OverheadParams(lambda_m=1.0, lambda_u=10.0, window=(30.0, 30.0))
    rep = monte_carlo_overhead(params, 5, np.random.default_rng(0))
    assert rep.n_nuclei > 1000
    assert rep.mean_neighbors == pytest.approx(6.0, abs=0.15)
    assert rep.mean_users == pytest.approx(10.0, rel=0.1)
    assert rep.analytic_uplink == 60.0
    assert len(rep.uplink_per_replication) == 5
    assert 0.0 <= rep.bound_holds_fraction <= 1.0


def test_monte_carlo_without_interior():
    params = OverheadParams(lambda_m=1.0, lambda_u=10.0, window=(3.0, 3.0))
    with pytest.raises(ValueError, match="margin"):
        monte_carlo_overhead(params, 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        monte_carlo_overhead(OverheadParams(lambda_m=1.0, lambda_u=1.0), 0, np.random.default_rng(0))
