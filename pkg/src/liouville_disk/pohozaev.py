"""Pohozaev (Rellich) identity terms on the disk, its half and mediatrix splits.

With ``X = x - p`` and ``n = 2`` the Rellich identity reads

    int <X, grad u> (-Lap u) = -oint <X, grad u> d_nu u + 1/2 oint <X, nu> |grad u|^2,

and for ``-Lap u = V e^u`` the left side splits, via the divergence
theorem applied to ``e^u - 1``, into a Hoelder part, a boundary part and
a volume part.
"""

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ._poly import gauss_legendre
from .blowup import _graded_unit, _ray_exit, _v_at
from .exceptions import ConfigurationError, DegenerateInputError, DomainError
from .fields import CurvatureFn, Field
from .geometry import UNIT_DISK, DiskDomain, Mediatrix, as_point, mediatrix_of

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# regions and their quadratures


@dataclass(frozen=True, eq=False)
class Region:
    """``domain`` intersected with the half plane ``<x - m, n> <= 0`` when ``cut`` is set.

    ``anchor`` is an interior point the region is star-shaped about; the
    volume rule is polar around it and graded towards it.
    """

    domain: DiskDomain
    anchor: np.ndarray
    cut: Optional[Mediatrix] = None

    def inside(self, pts, tol=1e-12):
        ok = self.domain.contains(pts, tol=tol)
        if self.cut is not None:
            ok &= (pts - self._m) @ self._n <= tol
        return ok

    @property
    def _m(self):
        return 0.5 * (self.cut.a + self.cut.b)

    @property
    def _n(self):
        return self.cut.normal if self._sign > 0 else -self.cut.normal

    @property
    def _sign(self):
        # +1 when the anchor lies on the ``a`` side of the cut
        return 1.0 if (self.anchor - 0.5 * (self.cut.a + self.cut.b)) @ self.cut.normal <= 0 else -1.0

    def corners(self):
        pts = []
        if self.domain.kind == "half":
            pts += [np.array([0.0, -1.0]), np.array([0.0, 1.0])]
        if self.cut is not None:
            pts += list(self.cut.endpoints)
        pts = [p for p in pts if self.inside(p[None, :], tol=1e-9)[0]]
        return np.array(pts).reshape(-1, 2)

    def ray_exit(self, e):
        t = _ray_exit(self.anchor, e, self.domain)
        if self.cut is not None:
            en = e @ self._n
            gap = (self._m - self.anchor) @ self._n
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.minimum(t, np.where(en > 0, gap / en, np.inf))
        return t

    def volume_rule(self, n_per=16, n_ang=96):
        """Nodes and weights covering the region."""
        if not self.inside(self.anchor[None, :])[0]:
            raise DomainError("anchor must lie inside the region")
        c = self.corners()
        if len(c) == 0:
            th = _TWO_PI * (np.arange(2 * n_ang) + 0.5) / (2 * n_ang)
            wth = np.full(len(th), _TWO_PI / len(th))
        else:
            ang = np.sort(np.mod(np.arctan2(c[:, 1] - self.anchor[1], c[:, 0] - self.anchor[0]), _TWO_PI))
            ang = np.concatenate([ang, [ang[0] + _TWO_PI]])
            parts = [gauss_legendre(n_ang, a, b) for a, b in zip(ang[:-1], ang[1:]) if b - a > 1e-12]
            th = np.concatenate([p[0] for p in parts])
            wth = np.concatenate([p[1] for p in parts])
        e = np.stack([np.cos(th), np.sin(th)], axis=1)
        t_max = self.ray_exit(e)
        tau, wt = _graded_unit(n_per)
        t = t_max[:, None] * tau[None, :]
        pts = self.anchor[None, None, :] + t[:, :, None] * e[:, None, :]
        w = wth[:, None] * t_max[:, None] ** 2 * (tau * wt)[None, :]
        return pts.reshape(-1, 2), w.ravel()

    def boundary_rule(self, n_per=16, panels=24):
        """``{label: (points, weights, outward normals)}`` for each boundary piece."""
        out = {}
        c = self.corners()
        # circular arc
        on_circle = c[np.abs(np.hypot(c[:, 0], c[:, 1]) - 1.0) < 1e-9] if len(c) else c
        if len(on_circle) == 0:
            th = _TWO_PI * (np.arange(n_per * panels) + 0.5) / (n_per * panels)
            w = np.full(len(th), _TWO_PI / len(th))
        else:
            ang = np.sort(np.mod(np.arctan2(on_circle[:, 1], on_circle[:, 0]), _TWO_PI))
            ang = np.concatenate([ang, [ang[0] + _TWO_PI]])
            ths, ws = [], []
            for a, b in zip(ang[:-1], ang[1:]):
                mid = 0.5 * (a + b)
                if b - a < 1e-12 or not self.inside(np.array([[np.cos(mid), np.sin(mid)]]))[0]:
                    continue
                k = max(2, int(np.ceil(panels * (b - a) / _TWO_PI)))
                for lo, hi in zip(np.linspace(a, b, k + 1)[:-1], np.linspace(a, b, k + 1)[1:]):
                    x, wx = gauss_legendre(n_per, lo, hi)
                    ths.append(x)
                    ws.append(wx)
            th, w = np.concatenate(ths), np.concatenate(ws)
        pts = np.stack([np.cos(th), np.sin(th)], axis=1)
        out["arc"] = (pts, w, pts.copy())
        # flat side of the half disk
        if self.domain.kind == "half":
            ys = np.sort(np.concatenate([[-1.0, 1.0], c[np.abs(c[:, 0]) < 1e-9, 1]]))
            ss, ws = [], []
            for a, b in zip(ys[:-1], ys[1:]):
                if b - a < 1e-12 or not self.inside(np.array([[0.0, 0.5 * (a + b)]]))[0]:
                    continue
                k = max(2, int(np.ceil(panels * (b - a) / 4.0)))
                for lo, hi in zip(np.linspace(a, b, k + 1)[:-1], np.linspace(a, b, k + 1)[1:]):
                    x, wx = gauss_legendre(n_per, lo, hi)
                    ss.append(x)
                    ws.append(wx)
            if ss:
                s = np.concatenate(ss)
                fp = np.stack([np.zeros_like(s), s], axis=1)
                out["flat"] = (fp, np.concatenate(ws), np.tile([-1.0, 0.0], (len(s), 1)))
        if self.cut is not None:
            m = self.cut
            out["interface"] = (m.polyline, m.weights, np.tile(self._n, (len(m.weights), 1)))
        return out


def _default_anchor(d):
    return np.array([0.0, 0.0]) if d.kind == "full" else np.array([0.5, 0.0])


def _u_and_grad(u: Field, pts, analytic):
    if analytic and u.has_closed_form and u.grad is not None:
        return u.at(pts), u.gradient_at(pts)
    return u.grid.evaluate(u.values, pts, gradient=True)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class PohozaevReport:
    """Terms of the Pohozaev identity on one region.

    ``residual = interior - boundary_A`` checks the Rellich identity;
    ``reduction_residual = interior - (holder + boundary_B + volume_term)``
    checks the divergence reduction. ``boundary_B`` and ``volume_term`` use
    the density ``e^u - 1``, which vanishes where ``u = 0``.
    """

    pivot: tuple
    interior: float
    boundary_A: float
    boundary_B: float
    volume_term: float
    holder: float
    residual: float
    reduction_residual: float
    pieces: Dict[str, float] = field(default_factory=dict)


def _terms(u, V, pivot, ref, region, analytic, n_per, n_ang):
    p = as_point(pivot)
    vq = float(_v_at(V, as_point(ref)[None, :])[0])
    pts, w = region.volume_rule(n_per, n_ang)
    uv, g = _u_and_grad(u, pts, analytic)
    Vv = _v_at(V, pts)
    Xg = np.einsum("ij,ij->i", pts - p, g)
    eu = np.exp(uv)
    interior = float(np.sum(w * Xg * Vv * eu))
    holder = float(np.sum(w * Xg * (Vv - vq) * eu))
    volume = float(-2.0 * vq * np.sum(w * np.expm1(uv)))
    A = B = 0.0
    pieces = {}
    for label, (bp, bw, nu) in region.boundary_rule().items():
        ub, gb = _u_and_grad(u, bp, analytic)
        X = bp - p
        Xg_b = np.einsum("ij,ij->i", X, gb)
        Xn = np.einsum("ij,ij->i", X, nu)
        a_piece = float(np.sum(bw * (-Xg_b * np.einsum("ij,ij->i", nu, gb) + 0.5 * Xn * (gb**2).sum(axis=1))))
        pieces[label] = a_piece
        A += a_piece
        B += float(vq * np.sum(bw * Xn * np.expm1(ub)))
    return PohozaevReport(tuple(float(x) for x in p), interior, A, B, volume, holder,
                          interior - A, interior - (holder + B + volume), pieces)


def pohozaev_terms(u: Field, V, pivot=(0.0, 0.0), d: DiskDomain = None, analytic=True,
                   ref=None, anchor=None, n_per=16, n_ang=96) -> PohozaevReport:
    """Pohozaev terms of ``u`` on the whole domain ``d`` about ``pivot``.

    ``ref`` is the point where ``V`` is frozen for the boundary and volume
    terms (defaults to ``pivot``). Gradients come from the closed form
    when ``analytic`` and available, otherwise from the grid interpolant.
    """
    d = d or u.grid.domain
    p = as_point(pivot)
    if not np.all(np.isfinite(p)):
        raise DomainError("pivot must be finite")
    region = Region(d, _default_anchor(d) if anchor is None else as_point(anchor))
    return _terms(u, V, p, p if ref is None else ref, region, analytic, n_per, n_ang)


@dataclass(frozen=True)
class DivergenceReduction:
    """``int <X, grad e^u> = oint <X, nu> e^u - 2 int e^u`` evaluated both ways."""

    boundary: float
    volume: float
    direct: float

    @property
    def reduced(self):
        return self.boundary + self.volume


def divergence_reduction(u: Field, pivot=(0.0, 0.0), d: DiskDomain = None, analytic=True,
                         n_per=16, n_ang=96) -> DivergenceReduction:
    d = d or u.grid.domain
    p = as_point(pivot)
    region = Region(d, _default_anchor(d))
    pts, w = region.volume_rule(n_per, n_ang)
    uv, g = _u_and_grad(u, pts, analytic)
    direct = float(np.sum(w * np.einsum("ij,ij->i", pts - p, g) * np.exp(uv)))
    volume = float(-2.0 * np.sum(w * np.exp(uv)))
    bnd = 0.0
    for bp, bw, nu in region.boundary_rule().values():
        ub, _ = _u_and_grad(u, bp, analytic)
        bnd += float(np.sum(bw * np.einsum("ij,ij->i", bp - p, nu) * np.exp(ub)))
    return DivergenceReduction(bnd, volume, direct)


# ---------------------------------------------------------------------------
# two-point split


@dataclass(frozen=True, eq=False)
class DomainSplit:
    """Partition of the domain by the mediatrix of ``a`` and ``b``."""

    a: np.ndarray
    b: np.ndarray
    omega1: Region
    omega2: Region
    interface: Mediatrix

    def rules(self, n_per=16, n_ang=96):
        return self.omega1.volume_rule(n_per, n_ang), self.omega2.volume_rule(n_per, n_ang)


def split_domain(a, b, d: DiskDomain = UNIT_DISK, n_per_segment=8, n_segments=48) -> DomainSplit:
    a, b = as_point(a), as_point(b)
    if np.allclose(a, b, rtol=0.0, atol=1e-15):
        raise DegenerateInputError("split points coincide")
    med = mediatrix_of(a, b, d, n_per_segment, n_segments)
    return DomainSplit(a, b, Region(d, a, med), Region(d, b, med), med)


@dataclass(frozen=True)
class SplitReport:
    first: PohozaevReport
    second: PohozaevReport
    interface_first: float
    interface_second: float
    interface_sum: float
    combined_residual: float


def projection_pivot(p):
    """Pivot ``(0, p_2)`` on the vertical axis through the origin."""
    return np.array([0.0, as_point(p)[1]])


def split_report(u: Field, V, a, b, d: DiskDomain = None, analytic=True, pivot=projection_pivot,
                 n_per=16, n_ang=96) -> SplitReport:
    """Pohozaev terms on both sides of the mediatrix of ``a`` and ``b``.

    Each side uses its own pivot (``pivot(a)`` resp. ``pivot(b)``) and
    freezes ``V`` at its own point. The interface contributions of the two
    sides add up to a single line integral involving only the pivot
    difference, which is what the combined residual uses.
    """
    d = d or u.grid.domain
    split = split_domain(a, b, d)
    pa, pb = pivot(split.a), pivot(split.b)
    r1 = _terms(u, V, pa, split.a, split.omega1, analytic, n_per, n_ang)
    r2 = _terms(u, V, pb, split.b, split.omega2, analytic, n_per, n_ang)
    m = split.interface
    ub, gb = _u_and_grad(u, m.polyline, analytic)
    dp = pa - pb
    n = m.normal
    isum = float(np.sum(m.weights * ((gb @ dp) * (gb @ n) - 0.5 * (dp @ n) * (gb**2).sum(axis=1))))
    outer = sum(v for k, v in r1.pieces.items() if k != "interface") + \
        sum(v for k, v in r2.pieces.items() if k != "interface")
    combined = (r1.interior + r2.interior) - (outer + isum)
    return SplitReport(r1, r2, r1.pieces["interface"], r2.pieces["interface"], isum, combined)


# ---------------------------------------------------------------------------
# Hoelder-weighted integrand and mediatrix gradients


@dataclass(frozen=True)
class HolderProfile:
    """Samples of ``g = |x - x*| |V(x) - V(x*)| e^u`` against ``r = |x - x*|`` (max over angle)."""

    r: np.ndarray
    g: np.ndarray
    s: float

    @property
    def weighted_max(self):
        """``max g r^{1-s}``, bounded uniformly along a concentrating family."""
        return float(np.max(self.g * self.r ** (1.0 - self.s)))

    @property
    def peak(self):
        i = int(np.argmax(self.g))
        return float(self.r[i]), float(self.g[i])


def holder_profile(u: Field, V: CurvatureFn, x_star, n_r=400, n_theta=32, r_min=1e-5) -> HolderProfile:
    if V.hoelder is None:
        raise ConfigurationError("holder_profile needs Hoelder data (s, A) on V")
    s = V.hoelder[0]
    xs = as_point(x_star)
    dom = u.grid.domain
    th = _TWO_PI * np.arange(n_theta) / n_theta
    e = np.stack([np.cos(th), np.sin(th)], axis=1)
    t_max = float(_ray_exit(xs, e, dom).max())
    r = np.geomspace(r_min, t_max, n_r)
    pts = xs[None, None, :] + r[:, None, None] * e[None, :, :]
    flat = pts.reshape(-1, 2)
    ok = dom.contains(flat)
    g = np.full(len(flat), -np.inf)
    v0 = float(V.at(xs[None, :])[0])
    g[ok] = np.hypot(*(flat[ok] - xs).T) * np.abs(V.at(flat[ok]) - v0) * np.exp(u.at(flat[ok]))
    g = g.reshape(n_r, n_theta).max(axis=1)
    keep = np.isfinite(g)
    return HolderProfile(r[keep], g[keep], s)


def fit_decay_exponent(profiles: List[HolderProfile]) -> float:
    """Exponent ``alpha`` in ``peak g ~ (peak r)^{-alpha}`` across a concentrating family."""
    if len(profiles) < 2:
        raise ConfigurationError("need at least two profiles to fit an exponent")
    pk = np.array([p.peak for p in profiles])
    if np.all(pk[:, 1] == 0):
        return 0.0
    slope = np.polyfit(np.log(pk[:, 0]), np.log(pk[:, 1]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class ZoneBounds:
    """Per-zone maxima of the normalised mediatrix gradient along ``{|x - x_i| = |x - t_i|}``.

    zone 1: ``|x - t0| >= (1/2 + eps) L``, normalised by ``|x - t0|``;
    zone 2: ``|x - t0| <= (1/2 - eps) L``, normalised by ``|x_i - t0|``;
    zone 3: in between, normalised by ``L = |x_i - t_i|``.
    """

    zone1: float
    zone2: float
    zone3: float
    counts: tuple
    assumption_ok: bool


def mediatrix_gradient_bounds(u: Field, x_i, t_i, eps_tilde=0.05, epsilon=0.1,
                              analytic=True) -> ZoneBounds:
    xi, ti = as_point(x_i), as_point(t_i)
    med = mediatrix_of(xi, ti, u.grid.domain, 8, 64)
    t0 = 0.5 * (xi + ti)
    L = float(np.hypot(*(xi - ti)))
    ok = float(np.hypot(*t0)) >= 1.0 - 0.5 * epsilon
    if not ok:
        warnings.warn("pair midpoint t0 violates |t0| >= 1 - epsilon/2",
                      UserWarning, stacklevel=2)
    pts = med.polyline
    dist = np.hypot(*(pts - t0).T)
    keep = dist <= 1.0 - epsilon
    pts, dist = pts[keep], dist[keep]
    _, g = _u_and_grad(u, pts, analytic)
    gn = np.hypot(g[:, 0], g[:, 1])
    z1 = dist >= (0.5 + eps_tilde) * L
    z2 = dist <= (0.5 - eps_tilde) * L
    z3 = ~(z1 | z2)

    def zmax(mask, scale):
        return float(np.max(gn[mask] * scale[mask])) if mask.any() else 0.0

    one = np.ones_like(dist)
    return ZoneBounds(zmax(z1, dist), zmax(z2, one * np.hypot(*(xi - t0))), zmax(z3, one * L),
                      (int(z1.sum()), int(z2.sum()), int(z3.sum())), ok)
