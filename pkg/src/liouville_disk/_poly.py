"""Gauss-Legendre panels, barycentric interpolation and trigonometric interpolation."""

import numpy as np


def gauss_legendre(n, a=-1.0, b=1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _gl_bary_weights(n):
    # closed form for Gauss-Legendre nodes (ascending order)
    x, w = np.polynomial.legendre.leggauss(n)
    bw = np.sqrt((1.0 - x**2) * w)
    bw[1::2] *= -1.0
    return bw


def bary_matrix(nodes, bw, x):
    """Rows of the Lagrange interpolant on ``nodes`` evaluated at ``x``."""
    x = np.asarray(x, dtype=float)
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = bw[None, :] / diff
    out = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if hit.any():
        out[hit] = exact[hit].astype(float)
    return out


def bary_diff_matrix(nodes, bw):
    n = len(nodes)
    d = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(d, 1.0)
    D = (bw[None, :] / bw[:, None]) / d
    np.fill_diagonal(D, 0.0)
    D[np.arange(n), np.arange(n)] = -D.sum(axis=1)
    return D


class PanelRule:
    """Composite Gauss-Legendre rule on consecutive panels ``edges``.

    Interpolation and differentiation are piecewise polynomial, one
    polynomial of degree ``n_per - 1`` per panel.
    """

    def __init__(self, edges, n_per):
        self.edges = np.asarray(edges, dtype=float)
        self.n_per = int(n_per)
        xs, ws = [], []
        for a, b in zip(self.edges[:-1], self.edges[1:]):
            x, w = gauss_legendre(self.n_per, a, b)
            xs.append(x)
            ws.append(w)
        self.nodes = np.concatenate(xs)
        self.weights = np.concatenate(ws)
        self._bw = _gl_bary_weights(self.n_per)
        self.n_panels = len(self.edges) - 1

    def __len__(self):
        return len(self.nodes)

    def panel_of(self, x):
        k = np.searchsorted(self.edges, x, side="right") - 1
        return np.clip(k, 0, self.n_panels - 1)

    def interp_matrix(self, x, derivative=False):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((len(x), len(self.nodes)))
        k = self.panel_of(x)
        for p in np.unique(k):
            sel = np.nonzero(k == p)[0]
            cols = slice(p * self.n_per, (p + 1) * self.n_per)
            local = self.nodes[cols]
            rows = bary_matrix(local, self._bw, x[sel])
            if derivative:
                rows = rows @ bary_diff_matrix(local, self._bw)
            out[np.ix_(sel, np.arange(cols.start, cols.stop))] = rows
        return out

    def diff_matrix(self):
        n = len(self.nodes)
        D = np.zeros((n, n))
        for p in range(self.n_panels):
            sl = slice(p * self.n_per, (p + 1) * self.n_per)
            D[sl, sl] = bary_diff_matrix(self.nodes[sl], self._bw)
        return D


def trig_matrix(n, theta, derivative=0):
    """Interpolation rows of the periodic interpolant on ``theta_j = 2pi(j+1/2)/n``.

    ``derivative`` selects the 0th, 1st or 2nd angular derivative.
    """
    if derivative not in (0, 1, 2):
        raise ValueError("derivative must be 0, 1 or 2")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    shift = np.pi / n
    k = np.arange(n // 2 + 1)
    mult = np.full(len(k), 2.0)
    mult[0] = 1.0
    if n % 2 == 0:
        mult[-1] = 1.0  # Nyquist term is the cosine through the nodes
    nodes = 2.0 * np.pi * np.arange(n) / n
    F = (mult * (1j * k) ** derivative)[:, None] * np.exp(-1j * np.outer(k, nodes)) / n
    E = np.exp(1j * np.outer(theta - shift, k))
    return (E @ F).real


def trig_derivative(values, axis=-1, order=1):
    """Spectral angular derivative of samples on the offset uniform grid."""
    n = values.shape[axis]
    c = np.fft.rfft(values, axis=axis)
    k = np.arange(c.shape[axis])
    factor = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        factor[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = -1
    return np.fft.irfft(c * factor.reshape(shape), n=n, axis=axis)
