"""Sampled fields on quadrature grids, optionally backed by a closed form."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError, DomainError
from .geometry import QuadratureGrid, as_points


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal samples of a scalar function on ``grid``.

    ``func``/``grad`` are optional closed forms taking ``(n, 2)`` points;
    when present they are preferred for off-grid evaluation.
    """

    grid: QuadratureGrid
    values: np.ndarray
    func: Optional[Callable] = field(default=None, repr=False)
    grad: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.shape[0] != self.grid.size:
            raise ConfigurationError(
                f"field has {v.shape[0]} samples but the grid has {self.grid.size} nodes")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, func, grad=None):
        return cls(grid, np.asarray(func(grid.nodes), dtype=float), func, grad)

    @classmethod
    def constant(cls, grid, c=0.0):
        return cls.from_function(
            grid, lambda p: np.full(as_points(p).shape[0], float(c)),
            lambda p: np.zeros((as_points(p).shape[0], 2)))

    @property
    def has_closed_form(self):
        return self.func is not None

    def at(self, points):
        pts = as_points(points)
        if self.func is not None:
            return np.asarray(self.func(pts), dtype=float)
        return self.grid.evaluate(self.values, pts)

    def gradient_at(self, points, analytic=True):
        pts = as_points(points)
        if analytic and self.grad is not None:
            return np.asarray(self.grad(pts), dtype=float)
        return self.grid.evaluate(self.values, pts, gradient=True)[1]

    def node_gradient(self, analytic=True):
        if analytic and self.grad is not None:
            return np.asarray(self.grad(self.grid.nodes), dtype=float)
        return self.grid.nodal_derivatives(self.values)[0]

    def laplacian(self):
        return self.grid.nodal_derivatives(self.values)[1]

    def sup(self):
        return float(self.values.max())

    def integral(self, transform=None):
        v = self.values if transform is None else transform(self.values)
        return self.grid.integrate(v)


def hoelder_seminorm(points, values, s, max_nodes=1500):
    """Largest sampled ``|V(x) - V(y)| / |x - y|^s`` over node pairs."""
    pts = as_points(points)
    v = np.asarray(values, dtype=float)
    if len(v) > max_nodes:
        idx = np.linspace(0, len(v) - 1, max_nodes).astype(int)
        pts, v = pts[idx], v[idx]
    best = 0.0
    for i in range(0, len(v), 256):
        d = np.hypot(pts[i:i + 256, None, 0] - pts[None, :, 0], pts[i:i + 256, None, 1] - pts[None, :, 1])
        dv = np.abs(v[i:i + 256, None] - v[None, :])
        ok = d > 1e-14
        if ok.any():
            best = max(best, float((dv[ok] / d[ok] ** s).max()))
    return best


@dataclass(frozen=True, eq=False)
class CurvatureFn:
    """Prescribed curvature ``V`` with ``0 <= V <= upper`` and optional Hoelder data ``(s, A)``."""

    field: Field
    upper: float = np.inf
    hoelder: Optional[Tuple[float, float]] = None
    tolerance: float = 1e-9

    def __post_init__(self):
        v = self.field.values
        if np.any(v < 0.0):
            raise DomainError("curvature V must be nonnegative")
        if np.any(v > self.upper * (1.0 + self.tolerance)):
            raise DomainError(f"curvature exceeds its bound {self.upper}")
        if self.hoelder is not None:
            s, A = self.hoelder
            if not 0.0 < s <= 1.0:
                raise DomainError("Hoelder exponent must lie in (0, 1]")
            semi = hoelder_seminorm(self.field.grid.nodes, v, s)
            if semi > A * (1.0 + 1e-6):
                raise DomainError(f"sampled Hoelder seminorm {semi:.6g} exceeds A = {A}")

    @classmethod
    def constant(cls, grid, value, upper=None):
        if value < 0:
            raise DomainError("curvature V must be nonnegative")
        f = Field.constant(grid, value)
        return cls(f, upper=value if upper is None else upper)

    @classmethod
    def from_function(cls, grid, func, upper=None, hoelder=None):
        f = Field.from_function(grid, func)
        return cls(f, upper=float(f.values.max()) if upper is None else upper, hoelder=hoelder)

    @property
    def grid(self):
        return self.field.grid

    @property
    def values(self):
        return self.field.values

    def at(self, points):
        return self.field.at(points)

    def scaled(self, factor):
        f = self.field
        func = None if f.func is None else (lambda p, g=f.func: factor * g(p))
        return CurvatureFn(Field(f.grid, factor * f.values, func), upper=factor * self.upper
                           if np.isfinite(self.upper) else self.upper)
