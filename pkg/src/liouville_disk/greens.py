"""Dirichlet Green function of the unit disk and its Nystroem discretisation.

The kernel is never tabulated pointwise. On a polar grid the Green
function splits into angular Fourier modes,

    G = (1/2pi) [ -log r_> + sum_m (1/m) ((r_</r_>)^m - (r s)^m) cos m(theta - phi) ],

so applying it reduces to one radial integral operator per mode. Each
radial operator is built by product integration: the sampled density is
interpolated by the panel polynomials and integrated against the exact
mode kernel on sub-intervals split at the target radius, which removes
the logarithmic singularity instead of subtracting it.
"""

from dataclasses import dataclass, field

import numpy as np

from ._poly import gauss_legendre
from .exceptions import ConfigurationError, DomainError, SingularityError
from .geometry import UNIT_DISK, QuadratureGrid, as_point, as_points, build_grid, to_complex

_TWO_PI = 2.0 * np.pi
_BOUNDARY_CLAMP = 1e-8


def green(x, y):
    """``G(x, y) = (1/2pi) log(|1 - conj(x) y| / |x - y|)``; vectorised over rows."""
    xc = to_complex(as_points(x))
    yc = to_complex(as_points(y))
    dist = np.abs(xc - yc)
    if np.any(dist == 0.0):
        raise SingularityError("green(x, y) is singular at x == y")
    if np.any(np.abs(xc) > 1 + 1e-12) or np.any(np.abs(yc) > 1 + 1e-12):
        raise DomainError("green is defined on the closed unit disk")
    on_bdry = (np.abs(xc) > 1 - _BOUNDARY_CLAMP) | (np.abs(yc) > 1 - _BOUNDARY_CLAMP)
    val = np.log(np.abs(1.0 - np.conj(xc) * yc) / dist) / _TWO_PI
    val = np.where(on_bdry, 0.0, val)
    return float(val[0]) if np.ndim(x) == 1 and np.ndim(y) == 1 else val


def green_grad_x(x, y):
    """Euclidean gradient of ``G(., y)`` at ``x``.

    In complex form ``d/dx1 G + i d/dx2 G = (1/2pi) conj(q)`` with
    ``q = (1 - |y|^2) / ((x - y)(conj(y) x - 1))``; ``q`` itself equals
    ``4 pi`` times the Wirtinger derivative ``dG/dx``.
    """
    xc = to_complex(as_points(x))
    yc = to_complex(as_points(y))
    if np.any(xc == yc):
        raise SingularityError("green_grad_x is singular at x == y")
    q = (1.0 - np.abs(yc) ** 2) / ((xc - yc) * (np.conj(yc) * xc - 1.0))
    g = np.conj(q) / _TWO_PI
    out = np.stack([g.real, g.imag], axis=-1)
    return out[0] if np.ndim(x) == 1 and np.ndim(y) == 1 else out


def green_ball_integral(center, rho, n_r=48, n_theta=64):
    """Integral of ``G(center, y)`` over ``B(center, rho)``.

    Evaluated in polar coordinates about ``center`` so the logarithmic
    singularity sits at the origin of the radial variable, where the
    weight ``t dt`` cancels it; the radial variable is additionally graded.
    """
    c = as_point(center)
    if rho <= 0:
        raise DomainError("rho must be positive")
    if np.hypot(*c) + rho > 1.0 + 1e-12:
        raise DomainError("ball B(center, rho) is not contained in the unit disk")
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(12, -1, -1, dtype=float)])
    ts, wts = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        t, w = gauss_legendre(n_r, a, b)
        ts.append(t)
        wts.append(w)
    t = np.concatenate(ts)
    wt = np.concatenate(wts)
    th = _TWO_PI * (np.arange(n_theta) + 0.5) / n_theta
    cc = complex(*c)
    y = cc + rho * t[:, None] * np.exp(1j * th)[None, :]
    # singular part -(1/2pi) log(rho t) integrates analytically over the angle
    regular = np.log(np.abs(1.0 - np.conj(cc) * y)) / _TWO_PI
    reg_int = (regular.mean(axis=1) * _TWO_PI * t * wt).sum() * rho**2
    sing_int = -(np.log(rho * t) * t * wt).sum() * rho**2
    return float(reg_int + sing_int)


# ---------------------------------------------------------------------------
# radial product integration

_Q = 16
_TAIL = 40.0


def _mode_bands(n_modes):
    bands = [(0, min(12, n_modes - 1))]
    lo = 13
    while lo < n_modes:
        hi = min(2 * lo, n_modes - 1)
        bands.append((lo, hi))
        lo = hi + 1
    return bands


def _geometric(start, stop, ratio):
    """Points start*ratio^k strictly between start and stop (either direction)."""
    if start <= 0 or stop <= 0 or start == stop:
        return np.empty(0)
    k = int(np.floor(abs(np.log(stop / start)) / np.log(ratio) - 1e-9))
    if k <= 0:
        return np.empty(0)
    sign = 1.0 if stop > start else -1.0
    return start * ratio ** (sign * np.arange(1, k + 1))


def _subintervals(r, edges, m_lo, m_hi, n_per):
    """Breakpoints for integrating against the mode kernels of ``m_lo..m_hi`` at target ``r``."""
    ratio = 2.0 if m_hi <= 12 else min(2.0, np.exp(8.0 / m_hi))
    lo_cut, hi_cut = 0.0, 1.0
    if m_lo >= 1 and m_hi > 12:
        lo_cut = r * np.exp(-_TAIL / m_lo)
        hi_cut = min(1.0, r * np.exp(_TAIL / m_lo))
    pts = [lo_cut, r, hi_cut]
    pts.extend(e for e in edges if lo_cut < e < hi_cut)
    pts.extend(_geometric(r, hi_cut, ratio))
    if m_hi > 12:
        pts.extend(_geometric(r, max(lo_cut, 1e-300), ratio))
    pts = np.unique(np.clip(pts, lo_cut, hi_cut))
    # cap sub-interval length relative to the local panel so its interpolant is resolved
    widths = np.diff(edges)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        p = min(np.searchsorted(edges, 0.5 * (a + b)) - 1, len(widths) - 1)
        h_cap = widths[max(p, 0)] * max(8.0 / n_per, 0.25) if n_per > 8 else np.inf
        k = int(np.ceil((b - a) / h_cap))
        if k > 1:
            out.extend(np.linspace(a, b, k + 1)[1:])
        else:
            out.append(b)
    return np.asarray(out)


def _mode_kernel(m, r, s):
    below = s <= r
    if m == 0:
        return -np.log(np.where(below, r, s))
    ratio = np.where(below, s / r, r / s)
    return ratio**m / (2.0 * m)


def radial_rows(radial, targets, n_modes):
    """Mode-wise radial operator rows, shape ``(n_modes, len(targets), len(radial))``.

    Row ``[m, t]`` applied to the ``m``-th angular Fourier coefficient of a
    density (sampled on the radial nodes) returns that coefficient of the
    potential at radius ``targets[t]``.
    """
    targets = np.maximum(np.asarray(targets, dtype=float), 1e-14)
    n_t, n_rad, n_per = len(targets), len(radial), radial.n_per
    gq, gw = gauss_legendre(_Q, 0.0, 1.0)
    out = np.zeros((n_modes, n_t, n_rad))
    for m_lo, m_hi in _mode_bands(n_modes):
        s_parts, w_parts, owner = [], [], []
        for t, r in enumerate(targets):
            bp = _subintervals(r, radial.edges, m_lo, m_hi, n_per)
            a, b = bp[:-1], bp[1:]
            s_parts.append((a[:, None] + (b - a)[:, None] * gq[None, :]).ravel())
            w_parts.append(((b - a)[:, None] * gw[None, :]).ravel())
            owner.append(np.full(len(a) * _Q, t))
        s = np.concatenate(s_parts)
        w = np.concatenate(w_parts) * s
        owner = np.concatenate(owner)
        r_of = targets[owner]
        # interpolation rows are local to one panel: keep only those n_per columns
        panel = radial.panel_of(s)
        local = np.empty((len(s), n_per))
        for p in np.unique(panel):
            sel = panel == p
            cols = slice(p * n_per, (p + 1) * n_per)
            local[sel] = radial.interp_matrix(s[sel])[:, cols]
        flat = (owner * n_rad + panel * n_per)[:, None] + np.arange(n_per)[None, :]
        flat = flat.ravel()
        for m in range(m_lo, m_hi + 1):
            k = _mode_kernel(m, r_of, s) * w
            out[m] = np.bincount(flat, weights=(k[:, None] * local).ravel(),
                                 minlength=n_t * n_rad).reshape(n_t, n_rad)
    # "(r s)^m" part uses the native rule, which is exact for the polynomial factor
    s_nodes, s_w = radial.nodes, radial.weights * radial.nodes
    for m in range(1, n_modes):
        out[m] -= (targets[:, None] ** m) * (s_nodes[None, :] ** m * s_w[None, :]) / (2.0 * m)
    return out


@dataclass(frozen=True, eq=False)
class GreenKernel:
    """Discrete realisation of ``f -> int G(., y) f(y) dy`` on a :class:`QuadratureGrid`.

    ``rows[m]`` is the radial operator of angular mode ``m``. The dense
    ``matrix`` is materialised lazily and only on request.
    """

    grid: QuadratureGrid
    rows: np.ndarray = field(repr=False)

    @property
    def n_modes(self):
        return self.rows.shape[0]

    def _fourier(self, f):
        F = f.reshape(self.grid.shape + f.shape[1:])
        return np.fft.rfft(F, axis=1) / self.grid.n_theta

    def apply(self, f):
        """Apply to nodal samples ``f`` of shape ``(N,)`` or ``(N, k)``."""
        f = np.asarray(f, dtype=float)
        if f.shape[0] != self.grid.size:
            raise ConfigurationError(
                f"field has {f.shape[0]} samples, grid has {self.grid.size} nodes")
        g = f * (self.grid.jacobian if f.ndim == 1 else self.grid.jacobian[:, None])
        c = self._fourier(g)
        u = np.einsum("mij,jm...->im...", self.rows, c)
        out = np.fft.irfft(u * self.grid.n_theta, n=self.grid.n_theta, axis=1)
        return out.reshape(f.shape)

    def evaluate(self, f, points):
        """Potential of the density ``f`` at arbitrary points of the closed disk."""
        f = np.asarray(f, dtype=float)
        w = self.grid.to_base(points)
        c = self._fourier(f * self.grid.jacobian)
        R = radial_rows(self.grid.radial, np.abs(w), self.n_modes)
        coef = np.einsum("mtj,jm->tm", R, c)
        mult = np.full(self.n_modes, 2.0)
        mult[0] = 1.0
        if self.grid.n_theta % 2 == 0:
            mult[-1] = 1.0
        offset = np.pi / self.grid.n_theta
        phase = np.exp(1j * np.outer(np.angle(w) - offset, np.arange(self.n_modes)))
        # Nyquist mode is a cosine about the grid offset; its real part is what the grid sees
        return (coef * phase * mult).real.sum(axis=1)

    @property
    def matrix(self):
        n = self.grid.size
        if n > 12000:
            raise ConfigurationError(f"dense kernel of size {n}x{n} exceeds the desk budget")
        return self.apply(np.eye(n))


def assemble_kernel(grid):
    """Assemble the :class:`GreenKernel` of a full-disk grid."""
    if not isinstance(grid, QuadratureGrid):
        raise ConfigurationError("assemble_kernel expects a QuadratureGrid")
    if not grid.periodic:
        raise ConfigurationError("the disk Green function needs a full-disk grid")
    if grid.n_r < 4 or grid.n_theta < 8:
        raise ConfigurationError("grid too coarse for kernel assembly")
    n_modes = grid.n_theta // 2 + 1
    rows = radial_rows(grid.radial, grid.radial.nodes, n_modes)
    return GreenKernel(grid, rows)


def default_kernel(n_r=48, n_theta=96):
    return assemble_kernel(build_grid(UNIT_DISK, n_r, n_theta))
