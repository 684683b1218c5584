import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_disk import HALF_DISK, UNIT_DISK, build_grid, mediatrix_of, mobius
from liouville_disk.exceptions import DegenerateInputError, DomainError
from liouville_disk.geometry import DiskDomain, boundary_distance, inverse_mobius

coord = st.floats(-0.69, 0.69, allow_nan=False)


def test_boundary_distance_examples():
    assert boundary_distance((0, 0)) == 1.0
    assert boundary_distance((0.6, 0)) == pytest.approx(0.4, abs=1e-15)
    assert boundary_distance((0.3, 0.2), HALF_DISK) == pytest.approx(0.3, abs=1e-15)


def test_boundary_distance_half_disk_vs_dense_sampling():
    th = np.linspace(-np.pi / 2, np.pi / 2, 200001)
    s = np.linspace(-1, 1, 200001)
    bd = np.vstack([np.stack([np.cos(th), np.sin(th)], 1), np.stack([0 * s, s], 1)])
    for p in [(0.3, 0.2), (0.05, 0.9), (0.7, -0.1)]:
        brute = np.hypot(*(bd - p).T).min()
        assert boundary_distance(p, HALF_DISK) == pytest.approx(brute, abs=1e-5)


def test_boundary_distance_outside_raises():
    with pytest.raises(DomainError):
        boundary_distance((1.2, 0))
    with pytest.raises(DomainError):
        boundary_distance((-0.2, 0), HALF_DISK)


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord)
def test_boundary_distance_lipschitz(a, b, c, d):
    p, q = np.array([a, b]), np.array([c, d])
    assert abs(boundary_distance(p) - boundary_distance(q)) <= np.hypot(*(p - q)) + 1e-14


def test_domain_rejects_other_radius():
    with pytest.raises(DomainError):
        DiskDomain("full", 2.0)


@pytest.mark.parametrize("d, area", [(UNIT_DISK, np.pi), (HALF_DISK, np.pi / 2)])
@pytest.mark.parametrize("n_r, n_t", [(8, 16), (64, 128), (17, 34)])
def test_weight_sum_is_area(d, area, n_r, n_t):
    g = build_grid(d, n_r, n_t)
    assert np.all(g.weights > 0)
    assert abs(g.weights.sum() - area) < 1e-10 * area
    assert np.all(d.contains(g.nodes, strict=True))


def test_focus_resolves_small_disk():
    g = build_grid(UNIT_DISK, 64, 128, focus=(0, 0))
    small = g.integrate((np.hypot(*g.nodes.T) < 0.01).astype(float))
    assert small == pytest.approx(np.pi * 1e-4, rel=0.05)
    assert g.weights.sum() == pytest.approx(np.pi, rel=1e-10)


def test_off_center_focus_is_transported():
    g = build_grid(UNIT_DISK, 16, 64, focus=(0.5, 0.2))
    assert g.weights.sum() == pytest.approx(np.pi, rel=1e-10)
    assert np.all(UNIT_DISK.contains(g.nodes, strict=True))


def test_focus_outside_raises():
    with pytest.raises(DomainError):
        build_grid(UNIT_DISK, 16, 32, focus=(1.5, 0))


def test_mobius_examples():
    assert np.allclose(mobius((0.5, 0), (0.5, 0)), 0.0)
    z = np.array([0.3, -0.4])
    assert np.allclose(mobius((0, 0), z), z)
    w = mobius((0.5, 0), (1.0, 0.0))
    assert np.allclose(w, [1, 0]) and np.hypot(*w) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        mobius((1.0, 0), z)


def test_mobius_inverse_roundtrip(rng):
    r = np.sqrt(rng.uniform(0, 1, 1000))
    t = rng.uniform(0, 2 * np.pi, 1000)
    z = np.stack([r * np.cos(t), r * np.sin(t)], 1)
    for a in [(0.5, 0.0), (-0.3, 0.7), (0.0, 0.0)]:
        back = inverse_mobius(a, mobius(a, z))
        assert np.max(np.abs(back - z)) < 1e-12
        on = np.stack([np.cos(t), np.sin(t)], 1)
        assert np.allclose(np.hypot(*mobius(a, on).T), 1.0, atol=1e-12)


def test_mediatrix_examples():
    m = mediatrix_of((0.5, 0), (0.7, 0))
    assert np.allclose(m.polyline[:, 0], 0.6, atol=1e-15)
    assert np.allclose(m.normal, [1, 0])
    m = mediatrix_of((0, 0.3), (0, -0.3))
    assert np.allclose(m.polyline[:, 1], 0.0, atol=1e-15)
    assert m.length() == pytest.approx(2.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord)
def test_mediatrix_equidistant_and_clipped(a1, a2, b1, b2):
    a, b = np.array([a1, a2]), np.array([b1, b2])
    if np.hypot(*(a - b)) < 1e-3:
        return
    m = mediatrix_of(a, b)
    gap = np.abs(np.hypot(*(m.polyline - a).T) - np.hypot(*(m.polyline - b).T))
    assert gap.max() < 1e-12
    assert np.allclose(np.hypot(*m.endpoints.T), 1.0, atol=1e-10)


def test_mediatrix_half_disk_endpoint_on_diameter():
    m = mediatrix_of((0.2, 0.3), (0.2, -0.1), HALF_DISK)
    e = m.endpoints
    on_arc = np.abs(np.hypot(*e.T) - 1) < 1e-10
    on_flat = np.abs(e[:, 0]) < 1e-10
    assert np.all(on_arc | on_flat) and on_flat.any()


def test_mediatrix_degenerate():
    with pytest.raises(DegenerateInputError):
        mediatrix_of((0.1, 0.1), (0.1, 0.1))


def test_spectral_interpolation_and_derivatives(grid32):
    f = lambda p: np.exp(p[:, 0]) * np.sin(2 * p[:, 1])
    pts = np.array([[0.1, 0.2], [-0.5, 0.3], [0.0, -0.9]])
    val, grad = grid32.evaluate(f(grid32.nodes), pts, gradient=True)
    assert np.allclose(val, f(pts), atol=1e-12)
    exact = np.stack([np.exp(pts[:, 0]) * np.sin(2 * pts[:, 1]), 2 * np.exp(pts[:, 0]) * np.cos(2 * pts[:, 1])], 1)
    assert np.allclose(grad, exact, atol=1e-10)
    _, lap = grid32.nodal_derivatives(f(grid32.nodes))
    assert np.allclose(lap, -3 * f(grid32.nodes), atol=1e-8)
