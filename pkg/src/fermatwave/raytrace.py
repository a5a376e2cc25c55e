"""Ray tracing in gradient-index media.

The ray equation in arc length s,

    d2x/ds2 = (1/n) [ grad n - (grad n . t) t ],      t = dx/ds, |t| = 1,

is integrated with fixed-step RK4 and per-step tangent renormalization.
The right-hand side acts like a steering force: it vanishes when grad n
is parallel to the tangent and equals grad n / n when perpendicular.

The same trajectories are geodesics of the conformally flat metric
g_ij = (n/c)^2 delta_ij with affine parameter sbar, d(sbar) = (n/c) ds
(sbar coincides with accumulated optical time).  `christoffel` and
`geodesic_residual` make that equivalence numerically checkable.

Optical time is accumulated with the composite midpoint rule, matching
the O(ds^2) global bias of the integrator.  All operations are pure;
independent rays can be traced concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, DomainExitError, UsageError
from .medium import IndexField, eval_grad, eval_index, index_and_grad

__all__ = [
    "RayState",
    "GeodesicSolution",
    "ChristoffelTensor",
    "ray_acceleration",
    "step_ray",
    "trace_ray",
    "christoffel",
    "geodesic_residual",
    "connect",
    "optical_time",
]

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class RayState:
    """Position, unit tangent, arc length and accumulated optical time."""

    x: np.ndarray
    t_hat: np.ndarray
    s: float = 0.0
    t_opt: float = 0.0

    @classmethod
    def launch(cls, x, direction):
        x = np.asarray(x, dtype=float)
        d = np.asarray(direction, dtype=float)
        nrm = np.linalg.norm(d)
        if nrm == 0:
            raise UsageError("launch direction must be nonzero")
        return cls(x=x, t_hat=d / nrm)


@dataclass
class GeodesicSolution:
    """Sampled ray path: arrays indexed by sample, one row per state."""

    x: np.ndarray        # (m, d)
    t_hat: np.ndarray    # (m, d)
    s: np.ndarray        # (m,)
    t_opt: np.ndarray    # (m,)
    ds: float
    field: IndexField = None
    c: float = 1.0
    exited: bool = False

    def __len__(self):
        return self.s.size

    def state(self, i) -> RayState:
        return RayState(self.x[i], self.t_hat[i], float(self.s[i]), float(self.t_opt[i]))

    @property
    def final(self) -> RayState:
        return self.state(-1)


@dataclass(frozen=True)
class ChristoffelTensor:
    """Gamma^i_jk of the optical metric at a point; symmetric in (j, k)."""

    x: np.ndarray
    gamma: np.ndarray    # (d, d, d)


def ray_acceleration(field: IndexField, x, t_hat):
    """Curvature term (1/n)[grad n - (grad n . t) t] for unit tangent t."""
    t_hat = np.asarray(t_hat, dtype=float)
    if abs(np.linalg.norm(t_hat) - 1.0) > _UNIT_TOL:
        raise UsageError(f"tangent is not unit length: |t|={np.linalg.norm(t_hat)}")
    n, gn = index_and_grad(field, x)
    return (gn - np.dot(gn, t_hat) * t_hat) / n


def _rhs(field, x, t):
    n, gn = index_and_grad(field, x)
    return t, (gn - np.dot(gn, t) * t) / n


def step_ray(field: IndexField, state: RayState, ds: float, c: float = 1.0) -> RayState:
    """One RK4 step of (x, t); tangent renormalized, t_opt by midpoint rule.

    Raises DomainExitError carrying the box intersection if the step
    leaves the field's domain.
    """
    if ds <= 0:
        raise UsageError("ds must be positive")
    x0, t0 = state.x, state.t_hat
    try:
        k1x, k1t = _rhs(field, x0, t0)
        k2x, k2t = _rhs(field, x0 + 0.5 * ds * k1x, t0 + 0.5 * ds * k1t)
        k3x, k3t = _rhs(field, x0 + 0.5 * ds * k2x, t0 + 0.5 * ds * k2t)
        k4x, k4t = _rhs(field, x0 + ds * k3x, t0 + ds * k3t)
        x1 = x0 + (ds / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        t1 = t0 + (ds / 6.0) * (k1t + 2 * k2t + 2 * k3t + k4t)
    except DomainError:
        x1 = x0 + ds * t0  # stencil left the box: locate the boundary crossing
        raise _exit_error(field, state, x1, ds, c)
    t1 = t1 / np.linalg.norm(t1)
    if not field.contains(x1):
        raise _exit_error(field, state, x1, ds, c)
    n_mid = eval_index(field, 0.5 * (x0 + x1))
    return RayState(x=x1, t_hat=t1, s=state.s + ds, t_opt=state.t_opt + n_mid * ds / c)


def _exit_error(field, state, x1, ds, c):
    # fraction of the chord x0 -> x1 that stays inside the box
    x0 = state.x
    frac = 1.0
    for i in range(x0.size):
        dxi = x1[i] - x0[i]
        if dxi > 0:
            frac = min(frac, (field.hi[i] - x0[i]) / dxi)
        elif dxi < 0:
            frac = min(frac, (field.lo[i] - x0[i]) / dxi)
    frac = max(frac, 0.0)
    x_exit = x0 + frac * (x1 - x0)
    s_exit = state.s + frac * ds
    return DomainExitError(f"ray left the domain near {x_exit}",
                           x_exit=x_exit, s_exit=s_exit, t_exit=state.t_hat.copy())


def trace_ray(field: IndexField, init: RayState, s_max: float, ds: float,
              c: float = 1.0) -> GeodesicSolution:
    """Trace up to arc length s_max (or domain exit; final sample flagged)."""
    if s_max <= 0 or ds <= 0:
        raise UsageError("s_max and ds must be positive")
    nsteps = int(np.ceil(s_max / ds - 1e-12))
    xs, ts, ss, topts = [init.x], [init.t_hat], [init.s], [init.t_opt]
    state = init
    exited = False
    for k in range(nsteps):
        step = min(ds, s_max - k * ds)
        try:
            state = step_ray(field, state, step, c)
        except DomainExitError as exc:
            n_mid = eval_index(field, 0.5 * (state.x + exc.x_exit))
            ds_last = exc.s_exit - state.s
            xs.append(exc.x_exit)
            ts.append(state.t_hat)
            ss.append(exc.s_exit)
            topts.append(state.t_opt + n_mid * ds_last / c)
            exited = True
            break
        xs.append(state.x)
        ts.append(state.t_hat)
        ss.append(state.s)
        topts.append(state.t_opt)
    return GeodesicSolution(x=np.array(xs), t_hat=np.array(ts), s=np.array(ss),
                            t_opt=np.array(topts), ds=ds, field=field, c=c,
                            exited=exited)


def christoffel(field: IndexField, x) -> ChristoffelTensor:
    """Gamma^i_jk = (1/n)(d^i_j dn/dx^k + d^i_k dn/dx^j - d_jk dn/dx^i)."""
    x = np.asarray(x, dtype=float)
    n = eval_index(field, x)
    gn = eval_grad(field, x)
    d = x.size
    eye = np.eye(d)
    gamma = (eye[:, :, None] * gn[None, None, :]
             + eye[:, None, :] * gn[None, :, None]
             - eye[None, :, :] * gn[:, None, None]) / n
    return ChristoffelTensor(x=x, gamma=gamma)


def geodesic_residual(field: IndexField, sol: GeodesicSolution) -> float:
    """Max-norm defect of the geodesic equation along a sampled path.

    Uses the affine parameter sbar accumulated as (n/c) ds from the
    samples themselves; both derivatives come from nonuniform central
    differences, so the result is O(ds^2) for a converged trace and
    order-one for a path that is not a geodesic.
    """
    m = len(sol)
    if m < 5:
        raise UsageError("geodesic residual needs at least 5 samples")
    x = sol.x
    ds_seg = np.diff(sol.s)
    n_mid = eval_index(field, 0.5 * (x[:-1] + x[1:]))
    sbar = np.concatenate([[0.0], np.cumsum(n_mid * ds_seg / sol.c)])
    worst = 0.0
    for i in range(1, m - 1):
        h1 = sbar[i] - sbar[i - 1]
        h2 = sbar[i + 1] - sbar[i]
        # first and second derivative on a nonuniform 3-point stencil
        dx = (x[i + 1] * h1 ** 2 - x[i - 1] * h2 ** 2
              + x[i] * (h2 ** 2 - h1 ** 2)) / (h1 * h2 * (h1 + h2))
        d2x = 2.0 * (h1 * x[i + 1] + h2 * x[i - 1] - (h1 + h2) * x[i]) / (h1 * h2 * (h1 + h2))
        gam = christoffel(field, x[i]).gamma
        res = d2x + np.einsum("ijk,j,k->i", gam, dx, dx)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def optical_time(sol: GeodesicSolution, field: IndexField = None, c: float = None) -> float:
    """Composite midpoint quadrature of integral n ds / c over the samples."""
    if len(sol) == 0:
        raise UsageError("empty solution")
    field = field if field is not None else sol.field
    c = c if c is not None else sol.c
    if len(sol) == 1:
        return 0.0
    ds_seg = np.diff(sol.s)
    n_mid = eval_index(field, 0.5 * (sol.x[:-1] + sol.x[1:]))
    return float(np.sum(n_mid * ds_seg) / c)


def _direction_basis(chord_dir):
    """Orthonormal vectors spanning the plane transverse to the chord."""
    d = chord_dir.size
    basis = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        v = e - np.dot(e, chord_dir) * chord_dir
        for b in basis:
            v -= np.dot(v, b) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            basis.append(v / nrm)
        if len(basis) == d - 1:
            break
    return basis


def _closest_approach(sol: GeodesicSolution, target):
    """(miss vector, arc length) at the path point nearest to target."""
    p0 = sol.x[:-1]
    seg = np.diff(sol.x, axis=0)
    ss = np.sum(seg * seg, axis=1)
    t = np.clip(np.einsum("ij,ij->i", target - p0, seg) / np.where(ss > 0, ss, 1.0),
                0.0, 1.0)
    proj = p0 + t[:, None] * seg
    d2 = np.sum((proj - target) ** 2, axis=1)
    k = int(np.argmin(d2))
    s_star = sol.s[k] + t[k] * (sol.s[k + 1] - sol.s[k])
    return proj[k] - target, float(s_star)


def connect(field: IndexField, x_i, x_f, ds: float, c: float = 1.0,
            init_direction=None, max_iter: int = 30, tol_factor: float = 1e-6,
            length_factor: float = 2.5) -> GeodesicSolution:
    """Two-point ray by single shooting with a finite-difference Newton.

    The launch direction is parametrized as a transverse tilt of the
    chord (smooth for mild refraction); the residual is the transverse
    miss at the traced ray's closest approach to the target, which stays
    well defined even when a trial ray exits the domain.  The chord is
    the initial guess, so the returned ray lies in the chord's homotopy
    class; other stationary paths are reachable only through
    `init_direction`.
    """
    x_i = np.asarray(x_i, dtype=float)
    x_f = np.asarray(x_f, dtype=float)
    d = x_i.size
    dist = np.linalg.norm(x_f - x_i)
    if dist == 0:
        raise UsageError("endpoints coincide; no ray to shoot")
    tol = tol_factor * dist
    chord = (x_f - x_i) / dist
    if init_direction is not None:
        chord = np.asarray(init_direction, dtype=float)
        chord = chord / np.linalg.norm(chord)
    basis = _direction_basis(chord)
    s_cap = length_factor * dist

    def shoot(u):
        tilt = chord + sum(u[j] * basis[j] for j in range(d - 1))
        t0 = tilt / np.linalg.norm(tilt)
        sol = trace_ray(field, RayState.launch(x_i, t0), s_cap, ds, c)
        miss, s_star = _closest_approach(sol, x_f)
        trans = np.array([np.dot(miss, b) for b in basis])
        return miss, trans, s_star, sol

    def finish(u, s_star):
        tilt = chord + sum(u[j] * basis[j] for j in range(d - 1))
        t0 = tilt / np.linalg.norm(tilt)
        return trace_ray(field, RayState.launch(x_i, t0), s_star, ds, c)

    if d == 1:
        return trace_ray(field, RayState.launch(x_i, chord), dist, ds, c)

    def fd_jacobian(u, trans):
        jac = np.empty((d - 1, d - 1))
        hstep = 1e-7
        for j in range(d - 1):
            up = u.copy()
            up[j] += hstep
            _, tp, _, _ = shoot(up)
            jac[:, j] = (tp - trans) / hstep
        return jac

    u = np.zeros(d - 1)
    miss, trans, s_star, _ = shoot(u)
    best_u, best_s, best_miss = u.copy(), s_star, np.linalg.norm(miss)
    jac = None
    for it in range(max_iter):
        mnorm = np.linalg.norm(miss)
        if mnorm < best_miss:
            best_u, best_s, best_miss = u.copy(), s_star, mnorm
        if mnorm <= tol:
            return finish(u, s_star)
        if jac is None:
            jac = fd_jacobian(u, trans)
        try:
            delta = np.linalg.solve(jac, -trans)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("shooting Jacobian is singular",
                                   best=finish(best_u, best_s),
                                   residual=best_miss) from exc
        step_cap = 0.5   # tilt units; keeps the Newton update sane
        scale = min(1.0, step_cap / max(np.max(np.abs(delta)), 1e-300))
        tnorm = np.linalg.norm(trans)
        for attempt in range(7):
            u_new = u + scale * delta
            miss_n, trans_n, s_n, _ = shoot(u_new)
            if np.linalg.norm(trans_n) <= max(0.9 * tnorm, tol) or attempt == 6:
                break
            scale *= 0.5
        # Broyden rank-1 update keeps the Jacobian current without extra traces
        s_vec = u_new - u
        denom = float(np.dot(s_vec, s_vec))
        if denom > 0:
            jac = jac + np.outer((trans_n - trans) - jac @ s_vec, s_vec) / denom
        if np.linalg.norm(trans_n) > tnorm:
            jac = None   # stalled: rebuild by finite differences next round
        u, miss, trans, s_star = u_new, miss_n, trans_n, s_n
    if np.linalg.norm(miss) <= tol:
        return finish(u, s_star)
    raise ConvergenceError(f"shooting did not converge: best miss {best_miss:.3e} "
                           f"(tolerance {tol:.3e})",
                           best=finish(best_u, best_s) if max_iter > 0 else None,
                           residual=best_miss, iterations=max_iter)
