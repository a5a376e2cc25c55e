import numpy as np
import pytest

from fermatwave import (IndexField, PathPolyline, connect, minimize_path,
                        optical_time, path_time, path_time_gradient,
                        polyline_sup_distance, resample_polyline)
from fermatwave.errors import UsageError
from fermatwave.oracles import fit_order


def test_path_time_straight_homogeneous():
    f = IndexField.homogeneous(1.0, [-2, -2], [2, 2])
    p = PathPolyline(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    assert path_time(f, p) == pytest.approx(2.0, abs=1e-15)


def test_triangle_detour_strictly_longer():
    f = IndexField.homogeneous(1.0, [-2, -2], [2, 2])
    chord = PathPolyline(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    detour = PathPolyline(np.array([[0.0, 0.0], [1.0, 0.7], [2.0, 0.0]]))
    assert path_time(f, detour) > path_time(f, chord)


def test_path_time_refinement_order():
    # fixed smooth geometric curve, segment count doubled: O(M^-2) error
    f = IndexField.parabolic_grin(1.4, 0.2, 0, [-4, -2], [4, 2])

    def arc(m):
        t = np.linspace(0, 1, m)
        return PathPolyline(np.column_stack([-3 + 6 * t, 0.8 * np.sin(np.pi * t)]))

    dense = path_time(f, arc(12801))
    ms = [100, 200, 400]
    errs = [abs(path_time(f, arc(m + 1)) - dense) for m in ms]
    assert fit_order([1.0 / m for m in ms], errs) >= 1.9


def test_gradient_matches_finite_difference(rng):
    f = IndexField.parabolic_grin(1.3, 0.22, 0, [-4, -2], [4, 2])
    v = np.column_stack([np.linspace(-3, 3, 9), 0.3 * rng.standard_normal(9)])
    v[0, 1] = v[-1, 1] = 0.0
    p = PathPolyline(v)
    g = path_time_gradient(f, p)
    h = 1e-7
    for j in (1, 4, 7):
        for ax in (0, 1):
            vp = v.copy(); vp[j, ax] += h
            vm = v.copy(); vm[j, ax] -= h
            fd = (path_time(f, PathPolyline(vp)) - path_time(f, PathPolyline(vm))) / (2 * h)
            assert g[j - 1, ax] == pytest.approx(fd, rel=2e-7, abs=1e-9)


def test_minimize_homogeneous_zigzag_collapses_to_chord(rng):
    f = IndexField.homogeneous(1.2, [-2, -6], [14, 6])
    x_i = np.array([0.0, 0.0])
    x_f = np.array([12.0, 0.0])
    m = 31
    v = PathPolyline.chord(x_i, x_f, m).vertices.copy()
    v[1:-1, 1] += 0.5 * (-1.0) ** np.arange(1, m - 1)   # zigzag
    out = minimize_path(f, x_i, x_f, m, init=PathPolyline(v))
    # collinearity with the chord: transverse coordinate ~ 0
    assert np.max(np.abs(out.vertices[:, 1])) < 1e-8


def test_minimize_matches_connect_in_stratified_medium():
    f = IndexField.linear_stratified(1.0, 0.05, 1, [-1, -3, -1], [11, 3, 1])
    x_i = np.array([0.0, -1.0, 0.0])
    x_f = np.array([10.0, 1.0, 0.0])
    ray = connect(f, x_i, x_f, ds=2e-3, tol_factor=1e-8)
    t_ray = optical_time(ray)
    path = minimize_path(f, x_i, x_f, 101)
    t_path = path_time(f, path)
    assert abs(t_path - t_ray) / t_ray < 1e-5
    dist = polyline_sup_distance(path.vertices, ray.x)
    h_eff = max(10.0 / 100, 2e-3)
    assert dist < 3 * h_eff


def test_line_search_iterates_monotone():
    f = IndexField.linear_stratified(1.0, 0.08, 1, [-1, -3], [11, 3])
    hist = []
    minimize_path(f, np.array([0.0, -1.0]), np.array([10.0, 1.0]), 41, history=hist)
    assert all(b <= a + 1e-15 for a, b in zip(hist, hist[1:]))


def test_scaling_invariance_of_minimizer():
    kappa = 3.7
    f1 = IndexField.linear_stratified(1.0, 0.06, 1, [-1, -3], [11, 3])
    f2 = IndexField.linear_stratified(kappa * 1.0, kappa * 0.06, 1, [-1, -3], [11, 3])
    x_i = np.array([0.0, -1.0])
    x_f = np.array([10.0, 1.0])
    p1 = minimize_path(f1, x_i, x_f, 61)
    p2 = minimize_path(f2, x_i, x_f, 61)
    assert np.max(np.abs(p1.vertices - p2.vertices)) < 1e-6
    assert path_time(f2, p2) == pytest.approx(kappa * path_time(f1, p1), rel=1e-10)


def test_first_order_optimality_at_convergence():
    f = IndexField.linear_stratified(1.0, 0.05, 1, [-1, -3], [11, 3])
    p = minimize_path(f, np.array([0.0, -1.0]), np.array([10.0, 1.0]), 41)
    g = path_time_gradient(f, p)
    assert np.max(np.abs(g)) < 1e-10 * f.max_index()


def test_degenerate_endpoints():
    f = IndexField.homogeneous(1.5, [-1, -1], [1, 1])
    p = minimize_path(f, np.array([0.3, 0.3]), np.array([0.3, 0.3]), 11)
    assert path_time(f, p) == 0.0


def test_endpoints_never_move():
    f = IndexField.linear_stratified(1.0, 0.05, 1, [-1, -3], [11, 3])
    x_i = np.array([0.0, -1.0])
    x_f = np.array([10.0, 1.0])
    p = minimize_path(f, x_i, x_f, 21)
    np.testing.assert_array_equal(p.vertices[0], x_i)
    np.testing.assert_array_equal(p.vertices[-1], x_f)


def test_resample_preserves_endpoints_and_shape():
    p = PathPolyline(np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 0.0]]))
    q = resample_polyline(p, 13)
    assert q.m == 13
    np.testing.assert_array_equal(q.vertices[0], p.vertices[0])
    np.testing.assert_array_equal(q.vertices[-1], p.vertices[-1])
    assert polyline_sup_distance(q.vertices, p.vertices) < 1e-12


def test_invalid_polylines():
    with pytest.raises(UsageError):
        PathPolyline(np.array([[0.0, 0.0]]))
    with pytest.raises(UsageError):
        PathPolyline(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]))
    f = IndexField.homogeneous(1.0, [-1, -1], [1, 1])
    with pytest.raises(UsageError):
        minimize_path(f, np.array([0.0, 0.0]), np.array([0.5, 0.0]), 2)
