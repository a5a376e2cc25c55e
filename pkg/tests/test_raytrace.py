import numpy as np
import pytest

from fermatwave import (GeodesicSolution, IndexField, PathPolyline, RayState,
                        christoffel, connect, eval_grad, eval_index,
                        geodesic_residual, optical_time, path_time,
                        ray_acceleration, step_ray, trace_ray)
from fermatwave.errors import ConvergenceError, UsageError
from fermatwave.oracles import fit_order


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


# ----------------------------------------------------------- acceleration

def test_acceleration_parallel_gradient_vanishes(strat3d):
    t = np.array([0.0, 1.0, 0.0])   # along grad n
    a = ray_acceleration(strat3d, [0, 0, 0], t)
    assert np.max(np.abs(a)) < 1e-15


def test_acceleration_perpendicular_gradient(strat3d):
    x = np.array([0.0, 1.0, 0.0])
    t = np.array([1.0, 0.0, 0.0])   # perpendicular to grad n
    a = ray_acceleration(strat3d, x, t)
    expected = eval_grad(strat3d, x) / eval_index(strat3d, x)
    np.testing.assert_allclose(a, expected, atol=1e-15)


def test_acceleration_homogeneous_zero(hom3d):
    a = ray_acceleration(hom3d, [0.1, 0.2, 0.3], unit([1, 2, 3]))
    assert np.all(a == 0)


def test_acceleration_requires_unit_tangent(hom3d):
    with pytest.raises(UsageError):
        ray_acceleration(hom3d, [0, 0, 0], [0, 0, 2.0])


# ------------------------------------------------------------------ stepping

def test_step_straight_line(hom3d):
    st = RayState.launch([0, 0, 0], [0, 0, 1])
    out = step_ray(hom3d, st, 1.0)
    np.testing.assert_allclose(out.x, [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(out.t_hat, [0, 0, 1], atol=1e-15)


def test_step_time_increment_constant_index():
    f = IndexField.homogeneous(2.0, [-5, -5, -5], [5, 5, 5])
    st = RayState.launch([0, 0, 0], [1, 0, 0])
    out = step_ray(f, st, 0.5, c=1.0)
    assert out.t_opt == pytest.approx(1.0, abs=1e-15)


def test_step_local_order(grin3d):
    # step vs two half steps: local error O(ds^5), fitted order >= 4.5
    st = RayState.launch([0.5, 0.0, 0.0], unit([0.02, 0.0, 1.0]))
    errs, steps = [], [0.2, 0.1, 0.05, 0.025]
    for ds in steps:
        full = step_ray(grin3d, st, ds)
        half = step_ray(grin3d, step_ray(grin3d, st, ds / 2), ds / 2)
        errs.append(np.linalg.norm(full.x - half.x) + np.linalg.norm(full.t_hat - half.t_hat))
    assert fit_order(steps, errs) >= 4.5


# ------------------------------------------------------------------- tracing

def test_trace_homogeneous_collinear(hom3d):
    st = RayState.launch([0, 0, 0], unit([1, 1, 1]))
    sol = trace_ray(hom3d, st, 4.0, 0.05)
    d = unit([1, 1, 1])
    dev = sol.x - np.outer(sol.s, d)
    assert np.max(np.linalg.norm(dev, axis=1)) < 1e-12 * max(sol.s[-1], 1.0)


def test_trace_snell_invariant(strat3d):
    # d n/dx = 0 along x: n * t_x conserved to < 1e-9 over s=10 at ds=1e-3
    st = RayState.launch([0, -2.0, 0], unit([1.0, 0.8, 0.0]))
    sol = trace_ray(strat3d, st, 10.0, 1e-3)
    n = eval_index(strat3d, sol.x)
    inv = n * sol.t_hat[:, 0]
    assert np.max(np.abs(inv - inv[0])) < 1e-9


def test_trace_unit_tangent_drift(strat3d):
    st = RayState.launch([0, -2.0, 0], unit([1.0, 0.5, 0.2]))
    sol = trace_ray(strat3d, st, 10.0, 1e-3)
    norms = np.linalg.norm(sol.t_hat, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-9


def test_trace_grin_period(grin2d):
    # paraxial ray in a parabolic profile oscillates with period 2 pi / alpha
    alpha = grin2d.alpha
    st = RayState.launch([0.0, 0.02], [1.0, 0.0])
    sol = trace_ray(grin2d, st, 3.1 * 2 * np.pi / alpha, 2e-3)
    y = sol.x[:, 1]
    sgn = np.sign(y)
    cross = np.where(np.diff(sgn) != 0)[0]
    t_cross = []
    for i in cross:
        f = y[i] / (y[i] - y[i + 1])
        t_cross.append(sol.s[i] + f * (sol.s[i + 1] - sol.s[i]))
    periods = 2 * np.diff(t_cross)
    assert abs(np.mean(periods) - 2 * np.pi / alpha) / (2 * np.pi / alpha) < 1e-3


def test_trace_reversibility(strat3d):
    st = RayState.launch([0, -2.0, 0], unit([1.0, 0.7, 0.0]))
    fwd = trace_ray(strat3d, st, 6.0, 1e-3)
    back_start = RayState.launch(fwd.final.x, -fwd.final.t_hat)
    back = trace_ray(strat3d, back_start, fwd.final.s, 1e-3)
    assert np.linalg.norm(back.final.x - st.x) < 1e-8


def test_trace_domain_exit_flagged():
    f = IndexField.homogeneous(1.0, [-1, -1, -1], [1, 1, 1])
    st = RayState.launch([0, 0, 0], [0, 0, 1])
    sol = trace_ray(f, st, 5.0, 0.3)
    assert sol.exited
    assert sol.final.x[2] == pytest.approx(1.0, abs=1e-12)


# --------------------------------------------------------------- christoffel

def test_christoffel_homogeneous_zero(hom3d):
    t = christoffel(hom3d, [0.3, 0.1, -0.2])
    assert np.all(t.gamma == 0)


def test_christoffel_linear_2d_value():
    g = 0.2
    f = IndexField.linear_stratified(1.0, g, 1, [-2, -2], [2, 2])
    t = christoffel(f, [0.0, 0.0])
    n = 1.0
    # axis 0 = x, axis 1 = y: Gamma^y_xx = -g/n
    assert t.gamma[1, 0, 0] == pytest.approx(-g / n, abs=1e-15)


def test_christoffel_symmetry(rng):
    f = IndexField.parabolic_grin(1.3, 0.2, 2, [-2, -2, -5], [2, 2, 5])
    for _ in range(20):
        x = rng.uniform(-1.5, 1.5, size=3)
        gam = christoffel(f, x).gamma
        np.testing.assert_array_equal(gam, np.swapaxes(gam, 1, 2))


# ---------------------------------------------------------- geodesic residual

def test_geodesic_residual_straight(hom3d):
    st = RayState.launch([0, 0, 0], unit([1, 0, 1]))
    sol = trace_ray(hom3d, st, 2.0, 0.05)
    assert geodesic_residual(hom3d, sol) < 1e-10


def test_geodesic_residual_refinement(grin2d):
    errs, steps = [], [0.04, 0.02, 0.01]
    for ds in steps:
        st = RayState.launch([0.0, 0.3], [1.0, 0.0])
        sol = trace_ray(grin2d, st, 8.0, ds)
        errs.append(geodesic_residual(grin2d, sol))
    assert fit_order(steps, errs) >= 2.0


def test_geodesic_residual_detects_kink(hom3d):
    st = RayState.launch([0, 0, 0], unit([0, 0, 1]))
    sol = trace_ray(hom3d, st, 2.0, 0.1)
    sol.x[len(sol) // 2] += np.array([0.05, 0.0, 0.0])
    assert geodesic_residual(hom3d, sol) > 1e-2


def test_geodesic_residual_needs_samples(hom3d):
    st = RayState.launch([0, 0, 0], [0, 0, 1])
    sol = trace_ray(hom3d, st, 0.2, 0.1)
    with pytest.raises(UsageError):
        geodesic_residual(hom3d, sol)


# ------------------------------------------------------------------ connect

def test_connect_homogeneous_chord(hom3d):
    sol = connect(hom3d, [0, 0, 0], [1, 2, 2], ds=0.02)
    assert np.linalg.norm(sol.final.x - [1, 2, 2]) < 1e-6 * 3.0
    assert optical_time(sol) == pytest.approx(1.5 * 3.0, rel=1e-9)


def test_connect_symmetric_stratified():
    # equal-height endpoints in a mirror-symmetric profile: symmetric path
    f = IndexField.from_grid(
        1.0 + 0.1 * np.cosh(np.linspace(-1, 1, 41))[None, :] * np.ones((41, 1)),
        spacing=0.25, origin=[-5, -5])
    sol = connect(f, [-4.0, -2.0], [4.0, -2.0], ds=0.005, tol_factor=1e-9)
    y = sol.x[:, 1]
    assert abs(y[0] - y[-1]) < 1e-7
    xs = np.linspace(-3.5, 3.5, 281)   # interior, inside both sample ranges
    y_fwd = np.interp(xs, sol.x[:, 0], y)
    y_mir = np.interp(-xs[::-1], sol.x[:, 0], y)[::-1]
    assert np.max(np.abs(y_fwd - y_mir)) < 1e-8


def test_connect_snell_across_smooth_interface():
    # two half-spaces joined by a tanh ramp much narrower than the lever
    # arms (but resolved by the sample grid): n1 sin t1 = n2 sin t2
    n1, n2, w = 1.0, 1.5, 0.15
    ny = 601
    prof = (n1 + n2) / 2 + (n2 - n1) / 2 * np.tanh(np.linspace(-3, 3, ny) / w)
    vals = np.repeat(prof[None, :], ny, axis=0)
    f = IndexField.from_grid(vals, spacing=0.01, origin=[-3, -3])
    sol = connect(f, [-1.5, -1.5], [1.8, 1.5], ds=4e-3, tol_factor=1e-5)
    t_in = sol.t_hat[5]
    t_out = sol.t_hat[-5]
    s1 = abs(t_in[0])   # sin of angle to the interface normal (y axis)
    s2 = abs(t_out[0])
    assert abs(n1 * s1 - n2 * s2) / (n1 * s1) < 5e-3


def test_connect_reports_best_on_failure(strat3d):
    # the straight chord misses in a stratified medium; zero iterations
    # cannot fix it, and the error must carry the best miss found
    with pytest.raises(ConvergenceError) as exc:
        connect(strat3d, [0, -2, 0], [4.0, -1.0, 0.5], ds=0.05, max_iter=0)
    assert exc.value.residual is not None and exc.value.residual > 0


# -------------------------------------------------------------- optical time

def test_optical_time_constant_medium(hom3d):
    st = RayState.launch([0, 0, 0], [1, 0, 0])
    sol = trace_ray(hom3d, st, 2.0, 0.1)
    assert optical_time(sol) == pytest.approx(3.0, rel=1e-12)


def test_optical_time_scales_with_index(rng):
    kappa = 1.7
    f1 = IndexField.parabolic_grin(1.3, 0.2, 0, [-10, -2], [10, 2])
    f2 = IndexField.parabolic_grin(1.3 * kappa, 0.2, 0, [-10, -2], [10, 2])
    st = RayState.launch([-5, 0.5], [1, 0])
    sol = trace_ray(f1, st, 8.0, 0.01)
    t1 = optical_time(sol)
    t2 = optical_time(sol, field=f2)
    assert t2 == pytest.approx(kappa * t1, rel=1e-13)


def test_optical_time_matches_path_time_on_polyline(grin2d):
    st = RayState.launch([0.0, 0.4], [1.0, 0.0])
    sol = trace_ray(grin2d, st, 5.0, 0.05)
    poly = PathPolyline(sol.x)
    seg = np.linalg.norm(np.diff(sol.x, axis=0), axis=1)
    chord_sol = GeodesicSolution(x=sol.x, t_hat=sol.t_hat,
                                 s=np.concatenate([[0], np.cumsum(seg)]),
                                 t_opt=sol.t_opt, ds=sol.ds, field=grin2d, c=1.0)
    assert optical_time(chord_sol) == pytest.approx(path_time(grin2d, poly), rel=1e-12)
