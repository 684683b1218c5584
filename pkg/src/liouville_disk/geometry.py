"""Disk domains, polar quadrature grids, Moebius maps and mediatrices.

Points are handled as float arrays of shape ``(2,)`` (or ``(n, 2)`` for
batches); internally many formulas use the complex view ``x1 + i x2``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._poly import PanelRule, gauss_legendre, trig_matrix, trig_derivative
from .exceptions import DegenerateInputError, DomainError

FULL = "full"
HALF = "half"


def as_point(p):
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise DomainError(f"expected a finite 2-vector, got {p!r}")
    return p


def as_points(p):
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p.reshape(1, 2)
    if p.ndim != 2 or p.shape[1] != 2:
        raise DomainError(f"expected an (n, 2) array of points, got shape {p.shape}")
    return p


def to_complex(p):
    p = np.asarray(p, dtype=float)
    return p[..., 0] + 1j * p[..., 1]


def from_complex(z):
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


@dataclass(frozen=True)
class DiskDomain:
    """Unit disk (``kind="full"``) or right half disk ``{|x| <= 1, x1 >= 0}``."""

    kind: str = FULL
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in (FULL, HALF):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.radius != 1.0:
            raise DomainError("only the unit radius is supported")

    @property
    def area(self):
        return np.pi if self.kind == FULL else 0.5 * np.pi

    def contains(self, points, strict=False, tol=1e-12):
        p = as_points(points)
        r = np.hypot(p[:, 0], p[:, 1])
        if strict:
            ok = r < 1.0
            if self.kind == HALF:
                ok &= p[:, 0] > 0.0
        else:
            ok = r <= 1.0 + tol
            if self.kind == HALF:
                ok &= p[:, 0] >= -tol
        return ok


UNIT_DISK = DiskDomain(FULL)
HALF_DISK = DiskDomain(HALF)


def boundary_distance(p, d=UNIT_DISK):
    """Distance from ``p`` to the boundary of ``d``."""
    p = as_point(p)
    if not d.contains(p)[0]:
        raise DomainError(f"point {p} lies outside the {d.kind} disk")
    dist = 1.0 - float(np.hypot(*p))
    if d.kind == HALF:
        # the flat side is the segment {0} x [-1, 1]; its nearest point is (0, clip(x2))
        seg = np.hypot(p[0], p[1] - np.clip(p[1], -1.0, 1.0))
        dist = min(dist, float(seg))
    return max(dist, 0.0)


def mobius(a, z):
    """Disk automorphism ``(z - a) / (1 - conj(a) z)``; accepts batches of ``z``."""
    ac = complex(*as_point(a))
    if abs(ac) >= 1.0:
        raise DomainError(f"Moebius parameter must satisfy |a| < 1, got |a| = {abs(ac)}")
    zs = as_points(z)
    zc = to_complex(zs)
    if np.any(np.abs(zc) > 1.0 + 1e-12):
        raise DomainError("mobius is defined on the closed unit disk")
    w = (zc - ac) / (1.0 - np.conj(ac) * zc)
    out = from_complex(w)
    return out[0] if np.asarray(z).ndim == 1 else out


def inverse_mobius(a, w):
    """Inverse of :func:`mobius`: ``(w + a) / (1 + conj(a) w)``."""
    ac = complex(*as_point(a))
    return mobius(-np.array([ac.real, ac.imag]), w)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor polar quadrature grid, optionally transported by a Moebius map.

    The base grid lives in coordinates ``w = r e^{i theta}``; the physical
    nodes are ``x = (w + a) / (1 + conj(a) w)`` where ``a`` is the focus
    (``a = 0`` gives the plain polar grid). Nodes are stored radius-major,
    i.e. node ``k`` sits on ring ``k // n_theta`` and ray ``k % n_theta``.
    """

    domain: DiskDomain
    radial: PanelRule
    theta: np.ndarray
    theta_weights: np.ndarray
    n_r: int
    n_theta: int
    focus: Optional[np.ndarray] = None
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    jacobian: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = self.radial.nodes
        w = (r[:, None] * np.exp(1j * self.theta)[None, :]).ravel()
        a = self.center
        x = (w + a) / (1.0 + np.conj(a) * w)
        jac = ((1.0 - abs(a) ** 2) ** 2 / np.abs(1.0 + np.conj(a) * w) ** 4)
        base = (self.radial.weights * r)[:, None] * self.theta_weights[None, :]
        object.__setattr__(self, "nodes", from_complex(x))
        object.__setattr__(self, "weights", base.ravel() * jac)
        object.__setattr__(self, "jacobian", jac)

    @property
    def center(self):
        if self.focus is None:
            return 0j
        return complex(self.focus[0], self.focus[1])

    @property
    def periodic(self):
        return self.domain.kind == FULL

    @property
    def shape(self):
        return (len(self.radial), self.n_theta)

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def base_radius(self):
        return np.repeat(self.radial.nodes, self.n_theta)

    @property
    def base_theta(self):
        return np.tile(self.theta, len(self.radial))

    def integrate(self, values):
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def to_base(self, points):
        """Complex base coordinates ``w`` of physical points."""
        x = to_complex(as_points(points))
        a = self.center
        return (x - a) / (1.0 - np.conj(a) * x)

    def _dxdw(self, w):
        a = self.center
        return (1.0 - abs(a) ** 2) / (1.0 + np.conj(a) * w) ** 2

    def _angular_matrix(self, theta, derivative=0):
        if self.periodic:
            return trig_matrix(self.n_theta, theta, derivative)
        ang = PanelRule([-0.5 * np.pi, 0.5 * np.pi], self.n_theta)
        M = ang.interp_matrix(theta)
        if derivative:
            D = ang.diff_matrix()
            M = M @ np.linalg.matrix_power(D, derivative)
        return M

    def interp_matrix(self, points, gradient=False):
        """Dense rows evaluating the spectral interpolant at ``points``.

        With ``gradient=True`` returns ``(value_rows, dx1_rows, dx2_rows)``.
        """
        w = self.to_base(points)
        r = np.abs(w)
        r = np.where(r < 1e-13, 1e-13, r)
        th = np.angle(w)
        if self.periodic:
            th = np.mod(th, 2.0 * np.pi)
        R = self.radial.interp_matrix(r)
        T = self._angular_matrix(th)
        val = (R[:, :, None] * T[:, None, :]).reshape(len(r), -1)
        if not gradient:
            return val
        dR = self.radial.interp_matrix(r, derivative=True)
        dT = self._angular_matrix(th, derivative=1)
        ur = (dR[:, :, None] * T[:, None, :]).reshape(len(r), -1)
        ut = (R[:, :, None] * dT[:, None, :]).reshape(len(r), -1) / r[:, None]
        c, s = np.cos(th)[:, None], np.sin(th)[:, None]
        gw = (c * ur - s * ut) + 1j * (s * ur + c * ut)
        gx = gw * np.conj(1.0 / self._dxdw(w))[:, None]
        return val, gx.real, gx.imag

    def evaluate(self, values, points, gradient=False, chunk=4096):
        """Interpolant of nodal ``values`` (and optionally its gradient) at ``points``.

        Uses the tensor structure so memory stays linear in the point count.
        """
        U = np.asarray(values, dtype=float).reshape(self.shape)
        pts = as_points(points)
        val = np.empty(len(pts))
        grad = np.empty((len(pts), 2)) if gradient else None
        for i in range(0, len(pts), chunk):
            w = self.to_base(pts[i:i + chunk])
            r = np.maximum(np.abs(w), 1e-13)
            th = np.angle(w)
            if self.periodic:
                th = np.mod(th, 2.0 * np.pi)
            RU = self.radial.interp_matrix(r) @ U
            T = self._angular_matrix(th)
            val[i:i + chunk] = np.einsum("pj,pj->p", RU, T)
            if gradient:
                ur = np.einsum("pj,pj->p", self.radial.interp_matrix(r, derivative=True) @ U, T)
                ut = np.einsum("pj,pj->p", RU, self._angular_matrix(th, derivative=1)) / r
                c, s = np.cos(th), np.sin(th)
                gw = (c * ur - s * ut) + 1j * (s * ur + c * ut)
                gx = gw * np.conj(1.0 / self._dxdw(w))
                grad[i:i + chunk] = np.stack([gx.real, gx.imag], axis=1)
        return (val, grad) if gradient else val

    def nodal_derivatives(self, values):
        """Spectral gradient and Laplacian of nodal ``values`` in physical coordinates."""
        U = np.asarray(values, dtype=float).reshape(self.shape)
        r = self.radial.nodes[:, None]
        D = self.radial.diff_matrix()
        ur = D @ U
        urr = D @ ur
        if self.periodic:
            ut = trig_derivative(U, axis=1, order=1)
            utt = trig_derivative(U, axis=1, order=2)
        else:
            ang = PanelRule([-0.5 * np.pi, 0.5 * np.pi], self.n_theta)
            Dt = ang.diff_matrix()
            ut = U @ Dt.T
            utt = ut @ Dt.T
        th = self.theta[None, :]
        c, s = np.cos(th), np.sin(th)
        gw = (c * ur - s * ut / r) + 1j * (s * ur + c * ut / r)
        lap_w = urr + ur / r + utt / r**2
        w = (self.radial.nodes[:, None] * np.exp(1j * self.theta)[None, :])
        dxdw = self._dxdw(w)
        gx = gw * np.conj(1.0 / dxdw)
        lap_x = lap_w / np.abs(dxdw) ** 2
        grad = np.stack([gx.real.ravel(), gx.imag.ravel()], axis=1)
        return grad, lap_x.ravel()

    def boundary_quadrature(self):
        """Points, arc-length weights and outward normals on the domain boundary."""
        if self.periodic:
            w = np.exp(1j * self.theta)
            x = (w + self.center) / (1.0 + np.conj(self.center) * w)
            wts = self.theta_weights * np.abs(self._dxdw(w))
            pts = from_complex(x)
            normals = pts / np.hypot(pts[:, 0], pts[:, 1])[:, None]
            return pts, wts, normals
        arc = from_complex(np.exp(1j * self.theta))
        s, ws = gauss_legendre(self.n_r, -1.0, 1.0)
        flat = np.stack([np.zeros_like(s), s], axis=1)
        pts = np.vstack([arc, flat])
        wts = np.concatenate([self.theta_weights, ws])
        normals = np.vstack([arc, np.tile([-1.0, 0.0], (len(s), 1))])
        return pts, wts, normals

    def ball_mask(self, center, radius):
        c = as_point(center)
        return np.hypot(self.nodes[:, 0] - c[0], self.nodes[:, 1] - c[1]) < radius


def _radial_edges(levels):
    return np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1, dtype=float)])


def build_grid(d=UNIT_DISK, n_r=64, n_theta=128, focus=None, levels=8):
    """Gauss-Legendre (radius) x trapezoid (angle) quadrature on ``d``.

    With a ``focus`` the radial variable is split into ``levels + 1``
    panels graded geometrically (ratio 2) toward the origin, each carrying
    ``n_r`` Gauss nodes, and the grid is then transported by the disk
    automorphism sending 0 to ``focus``.
    """
    if n_r < 4 or n_theta < 8:
        raise DomainError(f"grid too small: n_r={n_r} (>= 4), n_theta={n_theta} (>= 8)")
    if n_theta % 2:
        raise DomainError("n_theta must be even")
    if focus is not None:
        focus = as_point(focus)
        if not d.contains(focus, strict=(d.kind == FULL))[0]:
            raise DomainError(f"focus {focus} lies outside the domain")
        if d.kind == HALF and np.any(focus != 0.0):
            raise DomainError("half-disk grids only refine toward the origin")
    edges = _radial_edges(levels) if focus is not None else [0.0, 1.0]
    radial = PanelRule(edges, n_r)
    if d.kind == FULL:
        theta = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
        tw = np.full(n_theta, 2.0 * np.pi / n_theta)
    else:
        theta, tw = gauss_legendre(n_theta, -0.5 * np.pi, 0.5 * np.pi)
    return QuadratureGrid(d, radial, theta, tw, n_r, n_theta, focus)


@dataclass(frozen=True, eq=False)
class Mediatrix:
    """Perpendicular bisector of ``a, b`` clipped to the domain, with line weights."""

    a: np.ndarray
    b: np.ndarray
    polyline: np.ndarray
    weights: np.ndarray
    normal: np.ndarray
    endpoints: np.ndarray

    def length(self):
        return float(self.weights.sum())


def _chord_limits(mid, direction, d):
    # solve |mid + t dir| = 1
    bq = float(np.dot(mid, direction))
    cq = float(np.dot(mid, mid)) - 1.0
    disc = bq * bq - cq
    if disc <= 0:
        raise DegenerateInputError("bisector misses the disk")
    root = np.sqrt(disc)
    lo, hi = -bq - root, -bq + root
    if d.kind == HALF:
        # clip by x1 >= 0
        if abs(direction[0]) < 1e-15:
            if mid[0] < 0:
                raise DegenerateInputError("bisector misses the half disk")
        else:
            t0 = -mid[0] / direction[0]
            if direction[0] > 0:
                lo = max(lo, t0)
            else:
                hi = min(hi, t0)
        if lo >= hi:
            raise DegenerateInputError("bisector misses the half disk")
    return lo, hi


def mediatrix_of(a, b, d=UNIT_DISK, n_per_segment=4, n_segments=64):
    """Sample the set ``{|x - a| = |x - b|}`` inside ``d``.

    Segments are graded so that they are shortest near the foot of the
    bisector (the point closest to ``a`` and ``b``); each segment carries
    ``n_per_segment`` Gauss points.
    """
    a, b = as_point(a), as_point(b)
    if np.allclose(a, b, rtol=0.0, atol=1e-15):
        raise DegenerateInputError("mediatrix of coincident points is undefined")
    if not (d.contains(a)[0] and d.contains(b)[0]):
        raise DomainError("mediatrix endpoints must lie inside the domain")
    mid = 0.5 * (a + b)
    normal = (b - a) / np.linalg.norm(b - a)
    direction = np.array([-normal[1], normal[0]])
    lo, hi = _chord_limits(mid, direction, d)
    h = 0.5 * np.linalg.norm(b - a)
    # density ~ 1 / distance to a (equivalently b): grade in asinh(t / h)
    s_lo, s_hi = np.arcsinh(lo / h), np.arcsinh(hi / h)
    if s_lo < 0.0 < s_hi:
        k_lo = max(1, int(round(n_segments * -s_lo / (s_hi - s_lo))))
        knots = np.concatenate([np.linspace(s_lo, 0.0, k_lo + 1),
                                np.linspace(0.0, s_hi, n_segments - k_lo + 1)[1:]])
    else:
        knots = np.linspace(s_lo, s_hi, n_segments + 1)
    t_knots = h * np.sinh(knots)
    t_knots[0], t_knots[-1] = lo, hi
    ts, ws = [], []
    for t0, t1 in zip(t_knots[:-1], t_knots[1:]):
        x, w = gauss_legendre(n_per_segment, t0, t1)
        ts.append(x)
        ws.append(w)
    t = np.concatenate(ts)
    pts = mid[None, :] + t[:, None] * direction[None, :]
    ends = mid[None, :] + np.array([lo, hi])[:, None] * direction[None, :]
    return Mediatrix(a, b, pts, np.concatenate(ws), normal, ends)
