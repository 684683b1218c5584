"""Newton solution of ``u = K[V e^u]``, branch continuation and a radial shooting oracle."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, gmres

from ._poly import gauss_legendre
from .exceptions import (ConfigurationError, FoldError, NoSolutionError,
                         NonConvergenceError, StallError)
from .fields import CurvatureFn, Field
from .greens import GreenKernel

log = logging.getLogger(__name__)


def _check_grid(k, f):
    if isinstance(f, Field):
        if f.grid is not k.grid:
            raise ConfigurationError("field and kernel live on different grids")
        return f.values
    f = np.asarray(f, dtype=float)
    if f.shape[0] != k.grid.size:
        raise ConfigurationError("sample count does not match the kernel grid")
    return f


def apply_green(k: GreenKernel, f) -> Field:
    """Potential ``x -> int G(x, y) f(y) dy`` sampled on the kernel grid."""
    return Field(k.grid, k.apply(_check_grid(k, f)))


_DENSE_CACHE = {}


def dense_matrix(k: GreenKernel):
    key = id(k)
    hit = _DENSE_CACHE.get(key)
    if hit is None or hit[0] is not k:
        _DENSE_CACHE.clear()
        hit = (k, k.matrix)
        _DENSE_CACHE[key] = hit
    return hit[1]


@dataclass
class NewtonConfig:
    tol: float = 1e-10
    max_iters: int = 50
    max_halvings: int = 30
    dense_limit: int = 6000
    fold_rcond: float = 1e-12
    exp_bound: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SolutionField:
    u: Field
    V: CurvatureFn
    total_mass: float
    exp_integral: float
    sup_u: float
    newton_iters: int
    residual_inf: float


def _fixed_point_residual(k, Vv, u):
    return u - k.apply(Vv * np.exp(u))


def fixed_point_residual(k: GreenKernel, V: CurvatureFn, u) -> np.ndarray:
    """``F(u) = u - K[V e^u]`` at the nodes."""
    return _fixed_point_residual(k, V.values, np.asarray(_check_grid(k, u), dtype=float))


def jacobian_apply(k: GreenKernel, V: CurvatureFn, u, v) -> np.ndarray:
    """Action of ``I - K diag(V e^u)`` on ``v``."""
    u = np.asarray(_check_grid(k, u), dtype=float)
    v = np.asarray(v, dtype=float)
    return v - k.apply(V.values * np.exp(u) * v)


def _summarise(k, V, u, iters, res):
    grid = k.grid
    e = np.exp(u)
    center = np.array([[grid.center.real, grid.center.imag]])
    u_center = float(k.evaluate(V.values * e, center)[0])
    return SolutionField(
        u=Field(grid, u), V=V,
        total_mass=grid.integrate(V.values * e),
        exp_integral=grid.integrate(e),
        sup_u=max(float(u.max()), u_center),
        newton_iters=iters, residual_inf=res)


def _newton_step(k, Vv, u, F, cfg):
    n = k.grid.size
    d = Vv * np.exp(u)
    if n <= cfg.dense_limit:
        J = np.eye(n) - dense_matrix(k) * d[None, :]
        lu, piv = sla.lu_factor(J, check_finite=False)
        diag = np.abs(np.diag(lu))
        if diag.min() <= cfg.fold_rcond * diag.max():
            raise FoldError("Jacobian numerically singular (fold)", residual=float(np.abs(F).max()))
        return -sla.lu_solve((lu, piv), F, check_finite=False)
    op = LinearOperator((n, n), matvec=lambda v: v - k.apply(d * v), dtype=float)
    step, info = gmres(op, -F, rtol=1e-13, atol=0.0, restart=200, maxiter=20)
    if info != 0:
        log.warning("GMRES did not reach its tolerance (info=%s)", info)
    return step


def newton_solve(k: GreenKernel, V: CurvatureFn, u0=None, cfg: NewtonConfig = None) -> SolutionField:
    """Solve ``F(u) = u - K[V e^u] = 0`` by damped Newton iteration.

    Grids up to ``cfg.dense_limit`` nodes use a dense LU factorisation of
    ``I - K diag(V e^u)``; larger ones use GMRES on the same operator.
    """
    cfg = cfg or NewtonConfig()
    if cfg.tol <= 0:
        raise ConfigurationError("tolerance must be positive")
    if V.grid is not k.grid:
        raise ConfigurationError("curvature and kernel live on different grids")
    Vv = V.values
    u = np.zeros(k.grid.size) if u0 is None else np.array(_check_grid(k, u0), dtype=float)
    F = _fixed_point_residual(k, Vv, u)
    res = float(np.abs(F).max())
    for it in range(1, cfg.max_iters + 1):
        if res < cfg.tol:
            return _summarise(k, V, u, it, res)
        step = _newton_step(k, Vv, u, F, cfg)
        t = 1.0
        for _ in range(cfg.max_halvings):
            trial = u + t * step
            with np.errstate(over="ignore", invalid="ignore"):
                Ft = _fixed_point_residual(k, Vv, trial)
                rt = float(np.abs(Ft).max())
            if np.isfinite(rt) and (rt < res or rt < cfg.tol):
                break
            t *= 0.5
        else:
            raise NonConvergenceError("damped Newton could not reduce the residual", residual=res)
        u, F, res = trial, Ft, rt
    if res < cfg.tol:
        return _summarise(k, V, u, cfg.max_iters, res)
    raise NonConvergenceError(f"Newton did not converge in {cfg.max_iters} iterations", residual=res)


@dataclass(frozen=True, eq=False)
class PDEResidual:
    field: Field
    sup: float
    l1: float


def residual_pde(u: Field, V, source=None) -> PDEResidual:
    """Pointwise ``-Lap u - V e^u`` using spectral polar differentiation.

    ``source`` replaces ``V e^u`` by a given nodal array when supplied.
    """
    lap = u.laplacian()
    if source is None:
        Vv = V.values if isinstance(V, CurvatureFn) else np.asarray(V, dtype=float)
        source = Vv * np.exp(u.values)
    r = -lap - np.asarray(source, dtype=float)
    return PDEResidual(Field(u.grid, r), float(np.abs(r).max()), u.grid.integrate(np.abs(r)))


# ---------------------------------------------------------------------------
# radial shooting


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial solution of ``u'' + u'/r = -lam e^u`` with ``u(1) = 0``."""

    lam: float
    u0: float
    branch: str
    sol: object = field(repr=False)
    r0: float = field(repr=False, default=0.0)

    def u(self, r):
        r = np.asarray(r, dtype=float)
        return self._eval(r)[0]

    def du(self, r):
        r = np.asarray(r, dtype=float)
        y = self._eval(r)
        return np.divide(y[1], r, out=np.zeros_like(y[1]), where=r > 0)

    def _eval(self, r):
        rr = np.maximum(r, self.r0)
        y = self.sol(rr)
        small = r < self.r0
        if np.any(small):
            c = self.lam * np.exp(self.u0)
            y = np.array(y, dtype=float)
            y[0] = np.where(small, self.u0 - c * r**2 / 4.0, y[0])
            y[1] = np.where(small, -c * r**2 / 2.0, y[1])
        return y

    def mass(self, rho=1.0, n=24):
        """``lam * int_{B(0, rho)} e^u`` by graded Gauss quadrature."""
        scale = 1.0 / np.sqrt(self.lam * np.exp(self.u0))
        edges = [0.0]
        e = min(scale / 8.0, rho / 2.0)
        while e < rho:
            edges.append(e)
            e *= 1.5
        edges.append(rho)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            r, w = gauss_legendre(n, a, b)
            total += np.sum(w * r * np.exp(self.u(r)))
        return 2.0 * np.pi * self.lam * total


def _shoot(lam, a, rtol=1e-12):
    c = lam * np.exp(a)
    r0 = min(1e-4 / np.sqrt(1.0 + c), 1e-6)

    def rhs(r, y):
        eu = np.exp(y[0])
        return [y[1] / r, -lam * r * eu, y[3] / r, -lam * r * eu * y[2]]

    y0 = [a - c * r0**2 / 4.0, -c * r0**2 / 2.0, 1.0 - c * r0**2 / 4.0, -c * r0**2 / 2.0]
    sol = solve_ivp(rhs, (r0, 1.0), y0, method="DOP853", rtol=rtol, atol=1e-14, dense_output=True)
    if not sol.success:
        raise NonConvergenceError(f"radial ODE integration failed: {sol.message}", stage="shoot")
    return sol, r0


def radial_shoot(lam, rtol=1e-12, a_max=80.0):
    """All radial solutions for constant ``V = lam``, ordered lower branch first.

    The boundary value ``u(1)`` is a function of the central value ``a = u(0)``
    with a single maximum; the maximiser is located as the root of the
    variational (sensitivity) solution ``du(1)/da`` and each branch is then
    bracketed on its side of it.
    """
    if not lam > 0:
        raise NoSolutionError("lambda must be positive")
    if lam > 2.0:
        raise NoSolutionError(f"no radial solution beyond the fold (lambda = {lam} > 2)")

    def end(a):
        return _shoot(lam, a, rtol)[0].y[:, -1]

    g = lambda a: end(a)[0]
    dg = lambda a: end(a)[2]
    lo, hi = 0.0, 1.0
    while dg(hi) > 0:
        lo, hi = hi, hi * 2.0
        if hi > a_max:
            raise NoSolutionError("could not bracket the maximum of u(1; a)")
    a_star = brentq(dg, lo, hi, xtol=1e-14, rtol=1e-15)
    g_star = g(a_star)
    fold_tol = 1e-9
    if g_star < -fold_tol:
        raise NoSolutionError(f"no radial solution for lambda = {lam} (max u(1) = {g_star:.3g})")

    def make(a, branch):
        sol, r0 = _shoot(lam, a, rtol)
        return RadialProfile(lam, a, branch, sol.sol, r0)

    if abs(g_star) <= fold_tol:
        return [make(a_star, "fold")]
    out = [make(brentq(g, 0.0, a_star, xtol=1e-14, rtol=1e-15), "lower")]
    top = a_star + 1.0
    while g(top) > 0:
        top = a_star + 2.0 * (top - a_star)
        if top > a_max:
            return out
    out.append(make(brentq(g, a_star, top, xtol=1e-14, rtol=1e-15), "upper"))
    return out


# ---------------------------------------------------------------------------
# pseudo-arclength continuation


@dataclass
class ContinuationConfig:
    lam0: float = 0.1
    ds0: float = 0.05
    ds_min: float = 1e-7
    ds_max: float = 0.4
    max_steps: int = 500
    sup_stop: float = 2.0 * np.log(101.0)
    lam_min: float = 1e-4
    tol: float = 1e-10
    corrector_iters: int = 12
    mass_bound: Optional[float] = None
    exp_bound: Optional[float] = None
    locate_fold: bool = True


@dataclass(frozen=True, eq=False)
class ContinuationStep:
    lam: float
    solution: SolutionField
    dlam_ds: float


@dataclass
class ContinuationRun:
    steps: List[ContinuationStep]
    fold_estimate: Optional[float]
    termination: str


class _Bordered:
    """Dense bordered Newton machinery for ``F(u, lam) = u - K[lam V0 e^u]``."""

    def __init__(self, k, V0):
        self.k = k
        self.V0 = V0.values
        self.M = dense_matrix(k)
        self.w = k.grid.weights / k.grid.weights.sum()

    def F(self, u, lam):
        return u - self.M @ (lam * self.V0 * np.exp(u))

    def jac(self, u, lam):
        e = self.V0 * np.exp(u)
        Ju = np.eye(len(u)) - self.M * (lam * e)[None, :]
        Fl = -(self.M @ e)
        return Ju, Fl

    def dot(self, x, y):
        return float(np.dot(self.w, x[:-1] * y[:-1]) + x[-1] * y[-1])

    def normalise(self, t):
        return t / np.sqrt(self.dot(t, t))

    def tangent(self, u, lam, prev):
        Ju, Fl = self.jac(u, lam)
        n = len(u)
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = Ju
        A[:n, n] = Fl
        A[n, :n] = self.w * prev[:-1]
        A[n, n] = prev[-1]
        rhs = np.zeros(n + 1)
        rhs[n] = 1.0
        t = self.normalise(np.linalg.solve(A, rhs))
        return t if self.dot(t, prev) > 0 else -t

    def correct(self, x_pred, t, tol, iters):
        x = x_pred.copy()
        n = len(x) - 1
        for it in range(1, iters + 1):
            u, lam = x[:-1], x[-1]
            F = self.F(u, lam)
            g = self.dot(t, x - x_pred)
            if max(np.abs(F).max(), abs(g)) < tol:
                return x, it
            Ju, Fl = self.jac(u, lam)
            A = np.zeros((n + 1, n + 1))
            A[:n, :n] = Ju
            A[:n, n] = Fl
            A[n, :n] = self.w * t[:-1]
            A[n, n] = t[-1]
            dx = np.linalg.solve(A, -np.concatenate([F, [g]]))
            x = x + dx
            if not np.all(np.isfinite(x)):
                return None, it
        u, lam = x[:-1], x[-1]
        if np.abs(self.F(u, lam)).max() < tol:
            return x, iters
        return None, iters


def continue_branch(k: GreenKernel, V0: CurvatureFn, cfg: ContinuationConfig = None) -> ContinuationRun:
    """Pseudo-arclength continuation of ``u = K[lam V0 e^u]`` in ``(u, lam)``.

    Starts from the minimal solution at ``cfg.lam0`` (zero initial guess),
    follows the branch through turning points and stops once ``sup u``
    reaches ``cfg.sup_stop``.
    """
    cfg = cfg or ContinuationConfig()
    if k.grid.size > NewtonConfig().dense_limit:
        raise ConfigurationError("continuation uses dense bordered solves; use a coarser grid")
    B = _Bordered(k, V0)
    first = newton_solve(k, V0.scaled(cfg.lam0), None, NewtonConfig(tol=cfg.tol))
    x = np.concatenate([first.u.values, [cfg.lam0]])
    t = B.tangent(x[:-1], x[-1], np.concatenate([np.zeros(len(x) - 1), [1.0]]))
    steps = [ContinuationStep(cfg.lam0, first, t[-1])]
    ds = cfg.ds0
    fold = None
    termination = "max_steps"

    def record(xn, tn, iters):
        u, lam = xn[:-1], xn[-1]
        sol = _summarise(k, V0.scaled(lam), u, iters, float(np.abs(B.F(u, lam)).max()))
        return ContinuationStep(float(lam), sol, float(tn[-1]))

    while len(steps) < cfg.max_steps:
        xn, iters = B.correct(x + ds * t, t, cfg.tol, cfg.corrector_iters)
        if xn is None or xn[-1] <= 0:
            ds *= 0.5
            if ds < cfg.ds_min:
                raise StallError(f"continuation stalled at lambda = {x[-1]:.6g}", stage="continuation")
            continue
        tn = B.tangent(xn[:-1], xn[-1], t)
        step = record(xn, tn, iters)
        if fold is None and t[-1] > 0 >= tn[-1] and cfg.locate_fold:
            fold = _locate_fold(B, x, t, ds, cfg)
        steps.append(step)
        x, t = xn, tn
        ds = min(ds * (1.3 if iters <= 4 else 0.8), cfg.ds_max)
        sol = step.solution
        if sol.sup_u >= cfg.sup_stop:
            termination = "sup_reached"
            break
        if x[-1] < cfg.lam_min:
            termination = "lambda_min"
            break
        if cfg.mass_bound is not None and sol.total_mass > cfg.mass_bound:
            termination = "mass_bound"
            break
        if cfg.exp_bound is not None and sol.exp_integral > cfg.exp_bound:
            termination = "exp_bound"
            break
    return ContinuationRun(steps, fold, termination)


def _locate_fold(B, x, t, ds, cfg):
    """Bisect the arclength from ``x`` until the lambda-component of the tangent vanishes."""
    lo, hi = 0.0, ds
    best = x[-1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        xm, _ = B.correct(x + mid * t, t, cfg.tol, cfg.corrector_iters)
        if xm is None:
            hi = mid
            continue
        tm = B.tangent(xm[:-1], xm[-1], t)
        best = xm[-1]
        if tm[-1] > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return float(best)
