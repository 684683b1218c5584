import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from liouville_disk.analytic import (EIGHT_PI, BubbleSum, DiskBubble, GelfandSolution, PlanarBubble,
                                     b_from_sup, bubble_grad, bubble_mass, bubble_u, gelfand_grad,
                                     gelfand_lambda, gelfand_mass, gelfand_u, two_bubble)
from liouville_disk.exceptions import DomainError


def _fd_laplacian(f, p, h=1e-4):
    e1, e2 = np.array([h, 0]), np.array([0, h])
    return (f(p + e1) + f(p - e1) + f(p + e2) + f(p - e2) - 4 * f(p)) / h**2


def _fd_grad(f, p, h=1e-6):
    return np.stack([(f(p + [h, 0]) - f(p - [h, 0])) / (2 * h), (f(p + [0, h]) - f(p - [0, h])) / (2 * h)], -1)


PROBES = np.array([[0.1, 0.2], [-0.3, 0.5], [0.6, -0.1], [0.0, 0.0]])


def test_gelfand_examples():
    assert gelfand_u(1.0, (0, 0)) == pytest.approx(2 * np.log(2))
    t = np.linspace(0, 2 * np.pi, 13)
    for b in (0.1, 1.0, 50.0):
        assert np.allclose(gelfand_u(b, np.stack([np.cos(t), np.sin(t)], 1)), 0.0, atol=1e-14)
    assert gelfand_lambda(1.0) == 2.0
    assert gelfand_lambda(0.5) == pytest.approx(16 / 9) and gelfand_lambda(2.0) == pytest.approx(16 / 9)
    assert gelfand_lambda(1e-12) < 1e-10
    with pytest.raises(DomainError):
        gelfand_u(-1.0, (0, 0))
    with pytest.raises(DomainError):
        gelfand_u(1.0, (1.5, 0))


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
def test_gelfand_pde_residual(b):
    lam = gelfand_lambda(b)
    f = lambda p: gelfand_u(b, p)
    res = -_fd_laplacian(f, PROBES) - lam * np.exp(f(PROBES))
    assert np.max(np.abs(res)) < 1e-5
    assert np.max(np.abs(_fd_grad(f, PROBES) - gelfand_grad(b, PROBES))) < 1e-7


def test_gelfand_mass_examples_and_monotonicity():
    assert gelfand_mass(1.0, 1.0) == pytest.approx(4 * np.pi)
    assert gelfand_mass(1e4, 0.1) == pytest.approx(EIGHT_PI * 100 / 101)
    assert gelfand_mass(1e12, 0.5) == pytest.approx(EIGHT_PI, rel=1e-10)
    rho = np.linspace(0.05, 1, 20)
    for b in (0.3, 3.0, 300.0):
        m = np.array([gelfand_mass(b, r) for r in rho])
        assert np.all(np.diff(m) > 0) and m[-1] < EIGHT_PI
    bs = np.geomspace(0.01, 1e6, 30)
    assert np.all(np.diff([gelfand_mass(b, 1.0) for b in bs]) > 0)


def test_gelfand_mass_against_quadrature():
    b, rho = 7.0, 0.6
    val = quad(lambda r: 2 * np.pi * r * gelfand_lambda(b) * np.exp(gelfand_u(b, (r, 0))), 0, rho, epsabs=1e-13)[0]
    assert val == pytest.approx(gelfand_mass(b, rho), rel=1e-12)


def test_b_from_sup_roundtrip():
    for b in (0.1, 1.0, 1e4):
        assert b_from_sup(gelfand_u(b, (0, 0))) == pytest.approx(b, rel=1e-12)
    g = GelfandSolution(2.0)
    assert g.lam == pytest.approx(16 / 9) and g.mass() == pytest.approx(gelfand_mass(2.0, 1.0))


def test_bubble_examples():
    assert bubble_u(1.0, (0, 0), (0, 0)) == pytest.approx(np.log(8))
    for lam in (1.0, 10.0, 100.0):
        total = quad(lambda r: 2 * np.pi * r * np.exp(bubble_u(lam, (0, 0), (r, 0))), 0, np.inf, epsabs=1e-12, limit=200)[0]
        assert total == pytest.approx(EIGHT_PI, abs=1e-6)
    assert bubble_mass(3.0) == EIGHT_PI
    assert bubble_mass(2.0, 0.5) == pytest.approx(EIGHT_PI / 2)


def test_bubble_li_shafrir_constant():
    vals = []
    for lam in (1.0, 10.0, 100.0, 1000.0):
        res = minimize_scalar(lambda t: -(bubble_u(lam, (0, 0), (np.exp(t), 0)) + 2 * t),
                              bounds=(-12, 2), method="bounded", options={"xatol": 1e-12})
        vals.append(-res.fun)
    assert np.allclose(vals, np.log(2), atol=1e-10)
    assert np.ptp(vals) < 1e-10


def test_bubble_pde_and_gradient():
    pb = PlanarBubble(3.0, (0.1, -0.2))
    res = -_fd_laplacian(pb.u, PROBES) - np.exp(pb.u(PROBES))
    assert np.max(np.abs(res)) < 1e-5
    assert np.max(np.abs(_fd_grad(pb.u, PROBES) - bubble_grad(3.0, (0.1, -0.2), PROBES))) < 1e-7
    with pytest.raises(DomainError):
        PlanarBubble(0.0)


def test_disk_bubble_exact_and_boundary():
    db = DiskBubble(4.0, (0.3, 0.2))
    t = np.linspace(0, 2 * np.pi, 17)
    assert np.allclose(db.u(np.stack([np.cos(t), np.sin(t)], 1)), 0.0, atol=1e-13)
    assert np.max(np.abs(-_fd_laplacian(db.u, PROBES) - db.source(PROBES))) < 1e-4
    assert np.max(np.abs(_fd_grad(db.u, PROBES) - db.grad(PROBES))) < 1e-7
    m = quad(lambda r: r * quad(lambda th: db.source(np.array([[r * np.cos(th), r * np.sin(th)]]))[0],
                                0, 2 * np.pi, epsabs=1e-11)[0], 0, 1, epsabs=1e-10, limit=200, points=[0.36])[0]
    assert m == pytest.approx(db.mass(), rel=1e-6)
    with pytest.raises(DomainError):
        DiskBubble(1.0, (1.0, 0.0))


def test_bubble_sum_is_exact_solution():
    tb = two_bubble(5.0, 0.5)
    assert isinstance(tb, BubbleSum)
    res = -_fd_laplacian(tb.u, PROBES) - tb.V(PROBES) * np.exp(tb.u(PROBES))
    assert np.max(np.abs(res)) < 1e-4
    assert np.all(tb.V(PROBES) > 0)
