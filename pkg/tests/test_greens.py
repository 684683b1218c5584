import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_disk import UNIT_DISK, assemble_kernel, build_grid, green, green_ball_integral, green_grad_x
from liouville_disk.analytic import gelfand_u
from liouville_disk.exceptions import ConfigurationError, DomainError, SingularityError
from liouville_disk.geometry import HALF_DISK
from liouville_disk.greens import default_kernel


def _disk_points(rng, n, rmax=0.98):
    r = np.sqrt(rng.uniform(0, rmax, n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(t), r * np.sin(t)], 1)


def test_green_examples():
    assert green((0, 0), (0.5, 0)) == pytest.approx(np.log(2) / (2 * np.pi), abs=1e-15)
    assert green((0.3, 0.1), (0.0, 1.0)) == 0.0
    with pytest.raises(SingularityError):
        green((0.2, 0.2), (0.2, 0.2))
    with pytest.raises(DomainError):
        green((1.5, 0), (0.2, 0))


def test_green_symmetry_positivity_boundary(rng):
    x, y = _disk_points(rng, 1000), _disk_points(rng, 1000)
    assert np.max(np.abs(green(x, y) - green(y, x))) < 1e-12
    assert np.all(green(x, y) > 0)
    t = rng.uniform(0, 2 * np.pi, 1000)
    on = np.stack([np.cos(t), np.sin(t)], 1)
    assert np.max(np.abs(green(x, on))) < 1e-12


def test_gradient_examples():
    g = green_grad_x((0, 0), (0.5, 0))
    assert g == pytest.approx([1.5 / (2 * np.pi), 0.0], abs=1e-15)
    g2 = green_grad_x((0, 0), (0, 0.5))
    assert g2 == pytest.approx([0.0, 1.5 / (2 * np.pi)], abs=1e-15)
    with pytest.raises(SingularityError):
        green_grad_x((0.1, 0), (0.1, 0))


def test_gradient_matches_central_differences(rng):
    x, y = _disk_points(rng, 100, 0.9), _disk_points(rng, 100, 0.9)
    h = 1e-6
    fd = np.stack([(green(x + [h, 0], y) - green(x - [h, 0], y)) / (2 * h),
                   (green(x + [0, h], y) - green(x - [0, h], y)) / (2 * h)], 1)
    g = green_grad_x(x, y)
    assert np.max(np.abs(g - fd)) < 1e-6


def test_regular_part_mean_value(rng):
    # h(x, y) = (1/2pi) log|1 - conj(x) y| is harmonic in x
    def h(x, y):
        xc, yc = x[..., 0] + 1j * x[..., 1], y[0] + 1j * y[1]
        return np.log(np.abs(1 - np.conj(xc) * yc)) / (2 * np.pi)

    th = 2 * np.pi * np.arange(64) / 64
    ring = 0.05 * np.stack([np.cos(th), np.sin(th)], 1)
    for x, y in zip(_disk_points(rng, 20, 0.5), _disk_points(rng, 20, 0.8)):
        assert np.mean(h(x + ring, y)) == pytest.approx(h(x, y), abs=1e-12)


def test_ball_integral_examples():
    rho = 0.5
    exact = rho**2 / 4 - rho**2 * np.log(rho) / 2
    assert green_ball_integral((0, 0), 0.5) == pytest.approx(exact, abs=1e-9)
    assert abs(green_ball_integral((0, 0), 0.5) - 0.1491434) < 1e-6
    assert green_ball_integral((0, 0), 1.0) == pytest.approx(0.25, abs=1e-9)
    with pytest.raises(DomainError):
        green_ball_integral((0.6, 0), 0.5)


def test_ball_integral_near_boundary_scaling():
    ratios = [green_ball_integral((1 - d, 0), d) / d**2 for d in (0.2, 0.1, 0.05, 0.025)]
    assert max(ratios) <= 1.0
    assert all(np.isfinite(ratios))


def test_apply_constant_and_zero(kernel96, grid96):
    u = kernel96.apply(np.ones(grid96.size))
    r2 = (grid96.nodes**2).sum(1)
    assert np.max(np.abs(u - (1 - r2) / 4)) < 1e-6
    assert kernel96.evaluate(np.ones(grid96.size), np.array([[0.0, 0.0]]))[0] == pytest.approx(0.25, abs=1e-10)
    assert np.all(kernel96.apply(np.zeros(grid96.size)) == 0)


def test_apply_gelfand_source(kernel96, grid96):
    u = gelfand_u(1.0, grid96.nodes)
    assert np.max(np.abs(kernel96.apply(2 * np.exp(u)) - u)) < 1e-10


def test_kernel_symmetry_random_smooth_fields(kernel96, grid96, rng):
    x, y = grid96.nodes.T
    w = grid96.weights
    for _ in range(3):
        c = rng.normal(size=(2, 6))
        f = c[0, 0] + c[0, 1] * x + c[0, 2] * y * x + np.cos(3 * x + c[0, 3]) * np.exp(c[0, 4] * y)
        g = c[1, 0] + c[1, 1] * y**2 + np.sin(2 * y + c[1, 2]) + c[1, 3] * x**3
        lhs = np.sum(w * kernel96.apply(f) * g)
        rhs = np.sum(w * f * kernel96.apply(g))
        norm = np.sqrt(np.sum(w * f * f) * np.sum(w * g * g))
        assert abs(lhs - rhs) <= 1e-8 * norm


def test_transported_grid_resolves_bubble():
    from liouville_disk.analytic import DiskBubble

    b = DiskBubble(50.0, (0.5, 0.0))
    g = build_grid(UNIT_DISK, 12, 32, focus=(0.5, 0.0))
    k = assemble_kernel(g)
    assert np.max(np.abs(k.apply(b.source(g.nodes)) - b.u(g.nodes))) < 1e-8


def test_convergence_on_nonpolynomial_density():
    # density exp(u_b) with b = 20 is not resolved exactly on coarse grids
    errs = []
    for n_r, n_t in [(6, 8), (12, 16)]:
        g = build_grid(UNIT_DISK, n_r, n_t)
        u = gelfand_u(20.0, g.nodes)
        lam = 8 * 20 / 21**2
        errs.append(np.max(np.abs(assemble_kernel(g).apply(lam * np.exp(u)) - u)))
    assert errs[1] < errs[0] / 3


def test_assemble_rejects_bad_grids():
    with pytest.raises(ConfigurationError):
        assemble_kernel(build_grid(HALF_DISK, 16, 32))
    with pytest.raises(ConfigurationError):
        assemble_kernel("grid")
    with pytest.raises(ConfigurationError):
        default_kernel(8, 16).apply(np.ones(3))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0, 2 * np.pi), st.floats(0.05, 0.95), st.floats(0, 2 * np.pi))
def test_green_symmetry_property(r1, t1, r2, t2):
    x = np.array([r1 * np.cos(t1), r1 * np.sin(t1)])
    y = np.array([r2 * np.cos(t2), r2 * np.sin(t2)])
    if np.hypot(*(x - y)) < 1e-6:
        return
    assert abs(green(x, y) - green(y, x)) < 1e-12
