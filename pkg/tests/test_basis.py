"""Local Legendre bases, quadrature and projections."""
import numpy as np
import pytest
from numpy.polynomial import Polynomial

from pndg.basis import (LocalBasis, characteristic_radau_project, gauss_legendre, l2_project,
                        legendre_to_poly, radau_matrix, radau_project, tensor_radau_project)
from pndg.errors import InputError
from pndg.geometry import build_mesh
from pndg.harmonics import MomentBasis, moment_matrices
from pndg.study import eoc


@pytest.mark.parametrize("d, k", [(1, 0), (1, 3), (2, 0), (2, 2)])
def test_reference_mass_is_identity(d, k):
    b = LocalBasis(k, d)
    pts, w = b.element_quadrature
    phi = b.evaluate(pts)
    assert b.dim == (k + 1) ** d
    assert np.max(np.abs((phi * w[:, None]).T @ phi - np.eye(b.dim))) <= 1e-12


def test_quadrature_exactness():
    k = 2
    b = LocalBasis(k, 1)
    x, w = b.element_quadrature
    for p in range(2 * k + 4):
        exact = 0.0 if p % 2 else 2.0 / (p + 1)
        assert w @ x[:, 0] ** p == pytest.approx(exact, abs=1e-14)


def test_gradient_matches_finite_differences():
    b = LocalBasis(3, 2)
    xi = np.array([[0.2, -0.4]])
    g = b.gradient(xi)[0]
    step = 1e-6
    for a in range(2):
        e = np.zeros(2)
        e[a] = step
        fd = (b.evaluate(xi + e) - b.evaluate(xi - e))[0] / (2 * step)
        assert np.allclose(g[a], fd, atol=1e-7)


def test_invalid_basis():
    with pytest.raises(InputError):
        LocalBasis(-1, 1)
    with pytest.raises(InputError):
        LocalBasis(1, 3)


def test_l2_project_constant_and_polynomial():
    mesh = build_mesh(1, 8)
    b = LocalBasis(2, 1)
    c = l2_project(lambda x: np.full(len(x), 3.0), mesh, 2, b)
    # orthonormal on a cell of width h: constant c has first coefficient c * sqrt(h)
    assert c[0] == pytest.approx(3.0 * np.sqrt(1 / 8), abs=1e-14)
    assert np.allclose(c[1:], 0.0, atol=1e-14)
    f = lambda x: 1.0 + x[:, 0] - 4 * x[:, 0] ** 2  # noqa: E731
    coeffs = l2_project(f, mesh, 5, b)
    pts = np.array([[-0.7], [0.1], [0.9]])
    x = mesh.lower_corners[5] + 0.5 * (pts + 1) / 8
    vals = b.evaluate(pts) @ coeffs * b.scale(mesh.h)
    assert np.allclose(vals, f(x), atol=1e-13)


def test_l2_projection_rate_for_sine():
    k = 2
    errs, hs = [], []
    for n in (8, 16, 32, 64):
        mesh = build_mesh(1, n)
        b = LocalBasis(k, 1, n_quad=8)
        f = lambda x: np.sin(2 * np.pi * x[:, 0])  # noqa: E731
        pts, w = b.element_quadrature
        total = 0.0
        for e in range(n):
            c = l2_project(f, mesh, e, b)
            x = mesh.lower_corners[e] + 0.5 * (pts + 1) / n
            r = f(x) - b.evaluate(pts) @ c * b.scale(mesh.h)
            total += np.sum(w * r**2) / (2 * n)
        errs.append(np.sqrt(total))
        hs.append(1 / n)
    rates = eoc(hs, errs)
    assert abs(rates[-1] - 3.0) <= 0.1


def test_radau_quadratic_right_outflow():
    # R(x^2) for k = 1: equal mean (1/3) and equal value at x = 1 give (1 + 2x)/3
    c = radau_project(lambda x: x**2, 1, "right")
    p = legendre_to_poly(c)
    assert np.allclose(p.coef, [1 / 3, 2 / 3], atol=1e-14)
    assert p(1.0) == pytest.approx(1.0, abs=1e-14)


def test_radau_quadratic_left_outflow():
    p = legendre_to_poly(radau_project(lambda x: x**2, 1, "left"))
    assert np.allclose(p.coef, [1 / 3, -2 / 3], atol=1e-14)
    assert p(-1.0) == pytest.approx(1.0, abs=1e-14)


def test_radau_on_physical_interval():
    interval = (0.0, 2.0)
    p = legendre_to_poly(radau_project(lambda x: x**2, 1, "right", interval), interval)
    assert np.allclose(p.coef, [-4 / 3, 8 / 3], atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 4])
@pytest.mark.parametrize("outflow", ["left", "right"])
def test_radau_reproduces_polynomials(k, outflow):
    rng = np.random.default_rng(k)
    poly = Polynomial(rng.standard_normal(k + 1))
    p = legendre_to_poly(radau_project(poly, k, outflow, (0.25, 0.5)), (0.25, 0.5))
    assert np.allclose(np.pad(p.coef, (0, k + 1 - len(p.coef))), poly.coef, atol=1e-11)


def test_radau_defining_conditions():
    f = lambda x: np.exp(np.sin(3 * x))  # noqa: E731
    k = 3
    for outflow, end in (("right", 1.0), ("left", -1.0)):
        p = legendre_to_poly(radau_project(f, k, outflow))
        assert abs(p(end) - f(end)) <= 1e-13
        x, w = gauss_legendre(30)
        for j in range(k):
            assert abs(np.sum(w * (f(x) - p(x)) * x**j)) <= 1e-13


def test_radau_idempotent():
    f = lambda x: np.cos(2 * x)  # noqa: E731
    c1 = radau_project(f, 2, "right")
    p = legendre_to_poly(c1)
    c2 = radau_project(p, 2, "right")
    assert np.max(np.abs(c1 - c2)) <= 1e-13


def test_radau_rejects_k0():
    with pytest.raises(InputError):
        radau_project(np.sin, 0)
    with pytest.raises(InputError):
        radau_matrix(0, "right", 4)
    with pytest.raises(InputError):
        radau_project(np.sin, 1, "up")


def test_tensor_radau_separable_example():
    c = tensor_radau_project(lambda x, y: x**2 * y**2, 1, ("right", "left")).reshape(2, 2)
    # coefficients in the orthonormal basis of the 1D factors (1+2x)/3 and (1-2y)/3
    cx = radau_project(lambda x: x**2, 1, "right")
    cy = radau_project(lambda y: y**2, 1, "left")
    assert np.allclose(c, np.outer(cx, cy), atol=1e-14)
    # point check of the product ((1+2x)/3)((1-2y)/3)
    b = LocalBasis(1, 2)
    pts = np.array([[0.3, -0.6], [-1.0, 1.0]])
    vals = b.evaluate(pts) @ c.ravel()
    exact = (1 + 2 * pts[:, 0]) / 3 * (1 - 2 * pts[:, 1]) / 3
    assert np.allclose(vals, exact, atol=1e-14)


def test_tensor_radau_order_irrelevant_and_reproduces_Qk():
    f = lambda x, y: np.sin(x + 2 * y) * np.exp(x)  # noqa: E731
    a = tensor_radau_project(f, 2, ("left", "right"), order=(0, 1))
    b = tensor_radau_project(f, 2, ("left", "right"), order=(1, 0))
    assert np.max(np.abs(a - b)) <= 1e-13
    g = lambda x, y: (1 + x - x**2) * (2 - y + 3 * y**2)  # noqa: E731
    c = tensor_radau_project(g, 2, ("right", "right"), rect=((0, 0.5), (0.5, 1.0)))
    # compare through point values on the rectangle
    basis = LocalBasis(2, 2)
    pts = np.array([[0.1, 0.2], [-0.9, 0.7], [1.0, -1.0]])
    x = 0.25 * (pts[:, 0] + 1)
    y = 0.5 + 0.25 * (pts[:, 1] + 1)
    vals = basis.evaluate(pts) @ c * basis.scale([0.5, 0.5])
    assert np.allclose(vals, g(x, y), atol=1e-12)


def test_characteristic_radau_projection():
    mm = moment_matrices(MomentBasis(1))
    mesh = build_mesh(1, 4)
    b = LocalBasis(1, 1)
    lam, V = mm.eigvals[2], mm.eigvecs[2]
    u = lambda x: np.stack([np.sin(2 * np.pi * x[:, 0] + p) for p in range(4)], axis=1)  # noqa: E731
    coeffs = characteristic_radau_project(u, mesh, b, lam, V)
    assert coeffs.shape == (4, 4, 2)
    # positive-speed characteristic variables match u at the right end of each cell
    e = 1
    right = np.array([[1.0]])
    vals = b.evaluate(right) @ coeffs[e].T * b.scale(mesh.h)
    exact = u(np.array([[0.5]]))
    w_h, w = vals @ V, exact @ V
    pos = lam > 1e-12
    assert np.allclose(w_h[0, pos], w[0, pos], atol=1e-12)
    with pytest.raises(InputError):
        characteristic_radau_project(u, build_mesh(2, 2), LocalBasis(1, 2), lam, V)
