"""Closed-form solution families used as oracles.

``gelfand_*`` describe the radial branch ``u_b = 2 log((1+b)/(1+b|x|^2))``
of ``-Lap u = lambda(b) e^u`` on the unit disk with zero boundary values;
``bubble_*`` the entire solutions of ``-Lap u = e^u`` on the plane.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .geometry import as_point, as_points, to_complex

EIGHT_PI = 8.0 * np.pi


def _radius_sq(p, center=(0.0, 0.0)):
    q = as_points(p) - as_point(center)[None, :]
    return (q**2).sum(axis=1)


def _squeeze(values, p):
    return float(values[0]) if np.ndim(p) == 1 else values


def _check_b(b):
    if not b > 0:
        raise DomainError(f"branch parameter b must be positive, got {b}")


def gelfand_lambda(b):
    _check_b(b)
    return 8.0 * b / (1.0 + b) ** 2


def gelfand_u(b, p):
    _check_b(b)
    r2 = _radius_sq(p)
    if np.any(r2 > 1.0 + 1e-12):
        raise DomainError("gelfand_u is defined on the closed unit disk")
    return _squeeze(2.0 * np.log((1.0 + b) / (1.0 + b * r2)), p)


def gelfand_grad(b, p):
    q = as_points(p)
    r2 = (q**2).sum(axis=1)
    g = (-4.0 * b / (1.0 + b * r2))[:, None] * q
    return g[0] if np.ndim(p) == 1 else g


def gelfand_mass(b, rho):
    """``lambda(b) * int_{B(0, rho)} e^{u_b} = 8 pi b rho^2 / (1 + b rho^2)``."""
    _check_b(b)
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    return EIGHT_PI * b * rho**2 / (1.0 + b * rho**2)


def b_from_sup(sup_u):
    """Invert ``u_b(0) = 2 log(1 + b)``."""
    return float(np.expm1(0.5 * sup_u))


@dataclass(frozen=True)
class GelfandSolution:
    b: float

    def __post_init__(self):
        _check_b(self.b)

    @property
    def lam(self):
        return gelfand_lambda(self.b)

    def u(self, p):
        return gelfand_u(self.b, p)

    def grad(self, p):
        return gelfand_grad(self.b, p)

    def mass(self, rho=1.0):
        return gelfand_mass(self.b, rho)


def bubble_u(lam, x0, p):
    """``log(8 lam^2 / (1 + lam^2 |p - x0|^2)^2)``."""
    if not lam > 0:
        raise DomainError("bubble scale must be positive")
    r2 = _radius_sq(p, x0)
    return _squeeze(np.log(8.0 * lam**2 / (1.0 + lam**2 * r2) ** 2), p)


def bubble_grad(lam, x0, p):
    q = as_points(p) - as_point(x0)[None, :]
    r2 = (q**2).sum(axis=1)
    g = (-4.0 * lam**2 / (1.0 + lam**2 * r2))[:, None] * q
    return g[0] if np.ndim(p) == 1 else g


def bubble_mass(lam, rho=np.inf):
    """Mass ``int_{B(x0, rho)} e^u`` of the planar bubble."""
    if np.isinf(rho):
        return EIGHT_PI
    t = (lam * rho) ** 2
    return EIGHT_PI * t / (1.0 + t)


@dataclass(frozen=True)
class PlanarBubble:
    lam: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("bubble scale must be positive")

    def u(self, p):
        return bubble_u(self.lam, self.center, p)

    def grad(self, p):
        return bubble_grad(self.lam, self.center, p)


class DiskBubble:
    """Bubble of scale ``lam`` transported to ``center`` by a disk automorphism.

    ``u = 2 log((1 + lam^2) / (1 + lam^2 |phi(x)|^2))`` with
    ``phi(x) = (x - c)/(1 - conj(c) x)``. It vanishes on the unit circle and
    ``-Lap u = 8 lam^2 |phi'|^2 / (1 + lam^2 |phi|^2)^2`` has total mass
    ``8 pi lam^2 / (1 + lam^2)``.
    """

    def __init__(self, lam, center):
        self.lam = float(lam)
        self.c = complex(*as_point(center))
        if abs(self.c) >= 1:
            raise DomainError("bubble center must lie inside the unit disk")

    def _phi(self, p):
        x = to_complex(as_points(p))
        den = 1.0 - np.conj(self.c) * x
        return x, (x - self.c) / den, (1.0 - abs(self.c) ** 2) / den**2

    def u(self, p):
        _, w, _ = self._phi(p)
        L2 = self.lam**2
        return 2.0 * np.log((1.0 + L2) / (1.0 + L2 * np.abs(w) ** 2))

    def grad(self, p):
        _, w, dw = self._phi(p)
        L2 = self.lam**2
        # u = -2 log(1 + L2 w wbar) + const;  2 du/dxbar = conj(du/dx) * 2
        dudx = -2.0 * L2 * np.conj(w) * dw / (1.0 + L2 * np.abs(w) ** 2)
        g = 2.0 * np.conj(dudx)
        return np.stack([g.real, g.imag], axis=1)

    def source(self, p):
        """``-Lap u`` at ``p``."""
        _, w, dw = self._phi(p)
        L2 = self.lam**2
        return 8.0 * L2 * np.abs(dw) ** 2 / (1.0 + L2 * np.abs(w) ** 2) ** 2

    def mass(self):
        return EIGHT_PI * self.lam**2 / (1.0 + self.lam**2)


class BubbleSum:
    """Sum of :class:`DiskBubble` terms with the curvature that makes it exact.

    ``V = (-Lap u) e^{-u}`` so that ``-Lap u = V e^u`` holds pointwise with
    ``u = 0`` on the boundary.
    """

    def __init__(self, bubbles):
        self.bubbles = list(bubbles)

    def u(self, p):
        return sum(b.u(p) for b in self.bubbles)

    def grad(self, p):
        return sum(b.grad(p) for b in self.bubbles)

    def source(self, p):
        return sum(b.source(p) for b in self.bubbles)

    def V(self, p):
        return self.source(p) * np.exp(-self.u(p))


def two_bubble(lam=50.0, sep=0.5):
    return BubbleSum([DiskBubble(lam, (-sep, 0.0)), DiskBubble(lam, (sep, 0.0))])
