"""Greedy extraction of concentration points and the local diagnostics around them."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import cKDTree

from ._poly import gauss_legendre
from .analytic import EIGHT_PI
from .exceptions import DomainError, RunawayError
from .fields import CurvatureFn, Field
from .geometry import as_point, boundary_distance

FOUR_PI = 0.5 * EIGHT_PI


def _v_at(V, pts):
    if V is None:
        return np.ones(len(pts))
    if isinstance(V, CurvatureFn):
        return V.at(pts)
    if callable(V):
        return np.asarray(V(pts), dtype=float)
    return np.full(len(pts), float(V))


def _ray_exit(center, direction, domain):
    """Distance from ``center`` along unit ``direction`` (rows) to the domain boundary."""
    cd = direction @ center
    t = -cd + np.sqrt(np.maximum(cd**2 - center @ center + 1.0, 0.0))
    if domain.kind == "half":
        with np.errstate(divide="ignore", invalid="ignore"):
            t_flat = np.where(direction[:, 0] < 0, -center[0] / direction[:, 0], np.inf)
        t = np.minimum(t, t_flat)
    return np.maximum(t, 0.0)


def _graded_unit(n_per, levels=10):
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1, dtype=float)])
    parts = [gauss_legendre(n_per, a, b) for a, b in zip(edges[:-1], edges[1:])]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _kink_angles(c, radius):
    """Angles where the circle of ``radius`` about ``c`` crosses the unit circle."""
    rc = np.hypot(*c)
    if rc == 0.0:
        return []
    k = (1.0 - rc**2 - radius**2) / (2.0 * radius * rc)
    if not -1.0 < k < 1.0:
        return []
    phi, a = np.arctan2(c[1], c[0]), np.arccos(k)
    return [phi - a, phi + a]


def ball_rule(center, radius, domain, n_per=16, n_theta=128):
    """Polar quadrature of ``B(center, radius)`` intersected with ``domain``.

    Rays are cut where they leave the domain and the radial variable is
    graded towards ``center``, where concentrated densities live. When the
    ball is clipped by the circle the angle is split at the crossing points
    and integrated by Gauss-Legendre on each arc.
    """
    c = as_point(center)
    kinks = _kink_angles(c, radius) if domain.kind != "half" else []
    if kinks:
        a, b = kinks
        half = n_theta // 2
        t1, w1 = gauss_legendre(half, a, b)
        t2, w2 = gauss_legendre(half, b, a + 2.0 * np.pi)
        th, tw = np.concatenate([t1, t2]), np.concatenate([w1, w2])
    else:
        th = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
        tw = np.full(n_theta, 2.0 * np.pi / n_theta)
    e = np.stack([np.cos(th), np.sin(th)], axis=1)
    t_max = np.minimum(radius, _ray_exit(c, e, domain))
    tau, wt = _graded_unit(n_per)
    t = t_max[:, None] * tau[None, :]
    pts = c[None, None, :] + t[:, :, None] * e[:, None, :]
    w = tw[:, None] * t_max[:, None] ** 2 * (tau * wt)[None, :]
    return pts.reshape(-1, 2), w.ravel()


def local_mass(u: Field, V, center, radius, n_per=16, n_theta=128) -> float:
    """``int_{B(center, radius) & domain} V e^u``."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    if not u.grid.domain.contains(as_point(center)):
        raise DomainError("center must lie in the domain")
    pts, w = ball_rule(center, radius, u.grid.domain, n_per, n_theta)
    return float(np.sum(w * _v_at(V, pts) * np.exp(u.at(pts))))


def annulus_sup(u: Field, center, r_inner, r_outer, n_rad=16, n_theta=128) -> float:
    """Max of ``u`` over grid nodes in the annulus plus a polar sample including both bounding circles."""
    if not 0.0 <= r_inner < r_outer:
        raise DomainError("need 0 <= r_inner < r_outer")
    c = as_point(center)
    dom = u.grid.domain
    d = np.hypot(*(u.grid.nodes - c).T)
    node_sel = (d >= r_inner) & (d <= r_outer)
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rr = np.linspace(r_inner, r_outer, n_rad)
    pts = c + (rr[:, None, None] * np.stack([np.cos(th), np.sin(th)], axis=1)[None]).reshape(-1, 2)
    pts = pts[dom.contains(pts)]
    vals = []
    if node_sel.any():
        vals.append(u.values[node_sel].max())
    if len(pts):
        vals.append(u.at(pts).max())
    if not vals:
        raise DomainError("annulus does not meet the domain")
    return float(max(vals))


def li_shafrir_probe(u: Field, x_star, V=None) -> float:
    """``sup (u(x) + 2 log |x - x_star|)``, with ``log V(x)`` added when ``V`` is given.

    The node maximum is refined by a 1-D search along the ray from
    ``x_star`` through the best candidate.
    """
    xs = as_point(x_star)
    dom = u.grid.domain
    if not dom.contains(xs):
        raise DomainError("x_star must lie in the domain")
    bpts = u.grid.boundary_quadrature()[0]
    pts = np.vstack([u.grid.nodes, bpts])
    vals = np.concatenate([u.values, u.at(bpts)])

    def g(p, uv):
        d = np.hypot(*(p - xs).T)
        with np.errstate(divide="ignore"):
            out = uv + 2.0 * np.log(d)
            if V is not None:
                out = out + np.log(_v_at(V, p))
        return out

    score = g(pts, vals)
    i = int(np.argmax(score))
    best = float(score[i])
    direction = pts[i] - xs
    dist = np.hypot(*direction)
    if dist == 0:
        return best
    e = direction / dist
    t_max = float(_ray_exit(xs, e[None, :], dom)[0])

    def neg(t):
        p = (xs + t * e)[None, :]
        return -float(g(p, u.at(p))[0])

    # log-spaced scan first: optima may sit far below the first probe of a bounded search
    ts = t_max * np.logspace(-8, 0, 161)
    scan = np.array([-neg(t) for t in ts])
    j = int(np.argmax(scan))
    lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, len(ts) - 1)]
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    return float(max(best, -res.fun, scan[j]))


@dataclass(frozen=True)
class QuantizationResult:
    m: int
    deviation: float
    below_threshold: bool


def quantization_check(mass, tol=1e-9) -> QuantizationResult:
    """Nearest ``m >= 1`` with ``|mass - 8 pi m|`` and a flag for ``mass < 4 pi``."""
    if not mass > 0:
        raise DomainError("mass must be positive")
    m = max(1, int(np.rint(mass / EIGHT_PI)))
    return QuantizationResult(m, abs(mass - EIGHT_PI * m), mass <= FOUR_PI - tol)


@dataclass(frozen=True, eq=False)
class BlowupPoint:
    x: np.ndarray
    delta: float
    sup_u: float
    local_mass: Dict[float, float]
    boundary_distance: float

    @property
    def diag_2log(self):
        return self.sup_u + 2.0 * np.log(self.delta)

    @property
    def diag_4log(self):
        return self.sup_u + 4.0 * np.log(self.delta)

    @property
    def comparability(self):
        """``d(x, boundary) / delta``; bounded by ``2 + 1/epsilon`` in theory."""
        return self.boundary_distance / self.delta


@dataclass(frozen=True, eq=False)
class ExtractionReport:
    points: List[BlowupPoint]
    epsilon: float
    threshold: float
    residual_sup: float
    quantization: List[QuantizationResult]
    excised: List[Tuple[np.ndarray, float]] = field(repr=False)
    sensitivity: Optional[Dict[float, int]] = None

    @property
    def bounded(self):
        return self.residual_sup <= self.threshold

    def __len__(self):
        return len(self.points)


def _outside(pts, balls):
    ok = np.ones(len(pts), dtype=bool)
    for c, rad in balls:
        ok &= np.hypot(*(pts - c).T) >= rad
    return ok


def _local_maxima(u: Field, k=8):
    nodes = u.grid.nodes
    _, idx = cKDTree(nodes).query(nodes, k=k + 1)
    return np.all(u.values[:, None] >= u.values[idx[:, 1:]], axis=1)


def _refine_max(u: Field, x0, balls):
    if not u.has_closed_form:
        return x0, float(u.at(x0[None, :])[0])
    dom = u.grid.domain

    def neg(p):
        p = p[None, :]
        if not dom.contains(p)[0] or not _outside(p, balls)[0]:
            return np.inf
        return -float(u.at(p)[0])

    f0 = neg(x0)
    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000,
                            "initial_simplex": x0 + np.array([[0, 0], [1e-3, 0], [0, 1e-3]])})
    if res.fun <= f0:
        return res.x, -float(res.fun)
    return x0, -f0


def extract_blowups(u: Field, V, epsilon=0.1, threshold=5.0, max_points=16,
                    mass_fractions=(0.25, 0.5, 1.0), sensitivity=True) -> ExtractionReport:
    """Greedy extraction of concentration points of ``u``.

    Repeatedly takes the largest local maximum of ``u`` outside the balls
    ``B(x^j, delta^j epsilon)`` already excised, where ``delta`` is the
    distance to the boundary and to those balls, until the running maximum
    drops to ``threshold``.
    """
    if not 0.0 < epsilon < 0.5:
        raise DomainError("epsilon must lie in (0, 1/2)")
    if not np.isfinite(threshold):
        raise DomainError("threshold must be finite")
    nodes = u.grid.nodes
    is_max = _local_maxima(u)
    balls, points = [], []
    while True:
        cand = np.flatnonzero(is_max & _outside(nodes, balls))
        if len(cand) == 0:
            break
        i = cand[np.argmax(u.values[cand])]  # argmax returns the first (smallest index) tie
        if u.values[i] <= threshold:
            break
        if len(points) >= max_points:
            raise RunawayError(f"more than {max_points} extractions; threshold {threshold} too low?")
        x, sup = _refine_max(u, nodes[i].copy(), balls)
        bd = float(boundary_distance(x, u.grid.domain))
        delta = min([bd] + [np.hypot(*(x - c)) - rad for c, rad in balls])
        if delta <= 0:
            raise RunawayError("selected maximum sits on an excised ball")
        masses = {float(f * epsilon): local_mass(u, V, x, f * epsilon * delta) for f in mass_fractions}
        points.append(BlowupPoint(x, float(delta), sup, masses, bd))
        balls.append((x, delta * epsilon))
    rest = _outside(nodes, balls)
    residual = float(u.values[rest].max()) if rest.any() else -np.inf
    quant = [quantization_check(p.local_mass[float(epsilon)]) for p in points]
    sens = None
    if sensitivity:
        sens = {}
        for t in (threshold - 1.0, threshold + 1.0):
            try:
                sens[t] = len(extract_blowups(u, V, epsilon, t, max_points, (1.0,), False))
            except RunawayError:
                sens[t] = -1
    return ExtractionReport(points, epsilon, threshold, residual, quant, balls, sens)
