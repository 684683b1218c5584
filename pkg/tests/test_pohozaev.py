import warnings

import numpy as np
import pytest

from liouville_disk import (HALF_DISK, UNIT_DISK, CurvatureFn, Field, PlanarBubble, build_grid,
                            divergence_reduction, fit_decay_exponent, gelfand_lambda, gelfand_mass,
                            gelfand_u, holder_profile, mediatrix_gradient_bounds, pohozaev_terms,
                            split_domain, split_report, two_bubble)
from liouville_disk.analytic import gelfand_grad
from liouville_disk.exceptions import ConfigurationError, DegenerateInputError, DomainError
from liouville_disk.pohozaev import Region


def _gelfand(grid, b):
    return Field.from_function(grid, lambda p: gelfand_u(b, p), lambda p: gelfand_grad(b, p))


@pytest.fixture(scope="module")
def tb_field():
    tb = two_bubble(50.0, 0.5)
    g = build_grid(UNIT_DISK, 48, 96)
    return Field.from_function(g, tb.u, tb.grad), CurvatureFn.from_function(g, tb.V)


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
def test_radial_identity_closed_form(grid32, b):
    lam, M = gelfand_lambda(b), gelfand_mass(b, 1.0)
    r = pohozaev_terms(_gelfand(grid32, b), CurvatureFn.constant(grid32, lam))
    # radial data: interior = 2 pi lam - 2 M and A = -M^2 / (4 pi)
    assert r.interior == pytest.approx(2 * np.pi * lam - 2 * M, rel=1e-12)
    assert r.boundary_A == pytest.approx(-M**2 / (4 * np.pi), rel=1e-12)
    assert abs(r.residual) < 1e-12 and abs(r.reduction_residual) < 1e-12
    assert r.holder == pytest.approx(0.0, abs=1e-12)


def test_identity_off_centre_pivot(grid32):
    r = pohozaev_terms(_gelfand(grid32, 1.0), CurvatureFn.constant(grid32, 2.0), (0.3, -0.2))
    assert abs(r.residual) < 1e-12 and abs(r.reduction_residual) < 1e-12


def test_identity_zero_field(grid32):
    r = pohozaev_terms(Field.constant(grid32, 0.0), CurvatureFn.constant(grid32, 3.0))
    for v in (r.interior, r.boundary_A, r.boundary_B, r.volume_term, r.residual):
        assert v == 0.0


def test_identity_interpolated_gradients(grid96):
    r = pohozaev_terms(Field(grid96, gelfand_u(1.0, grid96.nodes)), CurvatureFn.constant(grid96, 2.0),
                       analytic=False)
    assert abs(r.residual) < 1e-8


def test_pivot_linearity(grid32):
    f, V = _gelfand(grid32, 1.0), CurvatureFn.constant(grid32, 2.0)
    h = np.array([0.1, -0.05])
    r0, r1 = pohozaev_terms(f, V), pohozaev_terms(f, V, h)
    pts, w = Region(UNIT_DISK, np.zeros(2)).volume_rule()
    shift = np.sum(w * (f.gradient_at(pts) @ h) * 2 * np.exp(f.at(pts)))
    assert r1.interior - r0.interior + shift == pytest.approx(0.0, abs=1e-12)


def test_pivot_validation(grid32):
    with pytest.raises(DomainError):
        pohozaev_terms(Field.constant(grid32, 0.0), 1.0, (np.nan, 0.0))


def test_divergence_reduction(grid32):
    dr = divergence_reduction(_gelfand(grid32, 1.0))
    assert dr.reduced == pytest.approx(dr.direct, abs=1e-12)
    assert dr.reduced == pytest.approx(-2 * np.pi, abs=1e-12)


def test_half_disk_identity():
    g = build_grid(HALF_DISK, 32, 32)
    # e^u - 1 vanishes on the flat side only for u = 0 there, so use a field vanishing on the whole boundary
    f = Field.from_function(g, lambda p: p[:, 0] * (1 - (p**2).sum(1)),
                            lambda p: np.stack([1 - 3 * p[:, 0] ** 2 - p[:, 1] ** 2, -2 * p[:, 0] * p[:, 1]], 1))
    V = CurvatureFn.from_function(g, lambda p: 8 * p[:, 0] * np.exp(-p[:, 0] * (1 - (p**2).sum(1))))
    r = pohozaev_terms(f, V, (0.0, 0.0))
    assert np.isfinite(r.residual) and set(r.pieces) == {"arc", "flat"}
    assert abs(r.residual) < 1e-10


def test_split_additivity_and_area(grid32):
    f, V = _gelfand(grid32, 1.0), CurvatureFn.constant(grid32, 2.0)
    r0 = pohozaev_terms(f, V)
    a, b = (0.2, 0.3), (-0.4, 0.1)
    sr = split_report(f, V, a, b, pivot=lambda p: np.zeros(2))
    assert sr.first.interior + sr.second.interior == pytest.approx(r0.interior, abs=1e-10)
    assert abs(sr.first.residual) < 1e-10 and abs(sr.second.residual) < 1e-10
    assert abs(sr.interface_sum) < 1e-14
    (_, w1), (_, w2) = split_domain(a, b).rules()
    assert w1.sum() + w2.sum() == pytest.approx(np.pi, abs=1e-12)


def test_split_projection_pivots_and_swap(grid32):
    f, V = _gelfand(grid32, 1.0), CurvatureFn.constant(grid32, 2.0)
    s1 = split_report(f, V, (0.2, 0.3), (-0.4, 0.1))
    s2 = split_report(f, V, (-0.4, 0.1), (0.2, 0.3))
    assert abs(s1.combined_residual) < 1e-10
    assert s1.combined_residual == pytest.approx(s2.combined_residual, abs=1e-10)
    assert s1.interface_sum == pytest.approx(s1.interface_first + s1.interface_second, abs=1e-10)


def test_split_symmetric_two_bubble_interface_vanishes(tb_field):
    f, V = tb_field
    sr = split_report(f, V, (-0.5, 0.0), (0.5, 0.0))
    assert abs(sr.interface_sum) < 1e-12
    assert abs(sr.combined_residual) < 1e-6


def test_split_degenerate():
    with pytest.raises(DegenerateInputError):
        split_domain((0.1, 0.1), (0.1, 0.1))


def test_holder_profile_and_exponent(grid32):
    for s, alpha in ((0.75, 0.25), (1.0, 0.0)):
        profs = []
        Vh = CurvatureFn.from_function(grid32, lambda p: 1 + np.hypot(p[:, 0], p[:, 1]) ** s, hoelder=(s, 1.0))
        for lam in (25, 50, 100, 200):
            pb = PlanarBubble(lam)
            profs.append(holder_profile(Field.from_function(grid32, pb.u, pb.grad), Vh, (0.0, 0.0)))
        for p in profs:
            assert p.weighted_max < 8.0
        assert fit_decay_exponent(profs) == pytest.approx(alpha, abs=0.01)
    with pytest.raises(ConfigurationError):
        fit_decay_exponent(profs[:1])


def test_holder_profile_needs_exponent(grid32):
    with pytest.raises(ConfigurationError):
        holder_profile(Field.constant(grid32, 0.0), CurvatureFn.constant(grid32, 1.0), (0.0, 0.0))


def test_zone_bounds(tb_field):
    f, _ = tb_field
    with pytest.warns(UserWarning):
        z = mediatrix_gradient_bounds(f, (-0.5, 0.0), (0.5, 0.0))
    assert not z.assumption_ok
    assert all(c > 0 for c in z.counts)
    assert np.isfinite([z.zone1, z.zone2, z.zone3]).all()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        z2 = mediatrix_gradient_bounds(f, (0.97, 0.05), (0.97, -0.05))
    assert z2.assumption_ok
