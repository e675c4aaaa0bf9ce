"""
Local polynomial spaces, element/face quadrature and projections.

Local shape functions are orthonormal Legendre polynomials on the reference
element ``[-1, 1]^d`` (tensor products in 2D, axis 0 slowest). On a physical
cell of widths ``h`` they are rescaled by ``prod(sqrt(2/h))`` so that they are
orthonormal in ``L^2(K)``; coefficient vectors therefore carry the L2 norm
directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import InputError

RADAU_QUAD_MIN = 32  # 1D points used when projecting non-polynomial data


def legendre_1d(k: int, xi) -> np.ndarray:
    """Orthonormal Legendre values on ``[-1, 1]``, shape ``(len(xi), k+1)``."""
    xi = np.asarray(xi, dtype=float)
    V = npleg.legvander(xi, k)
    return V * np.sqrt(np.arange(k + 1) + 0.5)


def legendre_1d_deriv(k: int, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape + (k + 1,))
    for j in range(k + 1):
        c = np.zeros(k + 1)
        c[j] = np.sqrt(j + 0.5)
        out[..., j] = npleg.legval(xi, npleg.legder(c))
    return out


def gauss_legendre(n: int):
    """``n``-point Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    return npleg.leggauss(n)


@dataclass(frozen=True)
class LocalBasis:
    """Orthonormal ``P_k`` (1D) or tensor ``Q_k`` (2D) basis on ``[-1,1]^d``.

    ``n_quad`` is the number of Gauss points per axis; the default ``k+2``
    is exact for polynomials of degree ``2k+3`` per axis.
    """

    k: int
    d: int
    n_quad: int | None = field(default=None)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise InputError(f"polynomial degree must be a nonnegative integer, got {self.k!r}")
        if self.d not in (1, 2):
            raise InputError(f"only d in {{1, 2}} is supported, got {self.d}")
        if self.n_quad is None:
            object.__setattr__(self, "n_quad", self.k + 2)

    @property
    def dim(self) -> int:
        return (self.k + 1) ** self.d

    @cached_property
    def multi_index(self) -> np.ndarray:
        """Per-axis degrees of every basis function, shape ``(dim, d)``."""
        return np.array(list(product(range(self.k + 1), repeat=self.d)), dtype=int)

    def with_quadrature(self, n_quad: int) -> "LocalBasis":
        return LocalBasis(self.k, self.d, n_quad)

    def evaluate(self, xi) -> np.ndarray:
        """Basis values at reference points ``xi`` of shape ``(n, d)`` -> ``(n, dim)``."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        vals = [legendre_1d(self.k, xi[:, a]) for a in range(self.d)]
        out = np.ones((xi.shape[0], self.dim))
        for a in range(self.d):
            out *= vals[a][:, self.multi_index[:, a]]
        return out

    def gradient(self, xi) -> np.ndarray:
        """Reference gradients, shape ``(n, d, dim)``."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        vals = [legendre_1d(self.k, xi[:, a]) for a in range(self.d)]
        ders = [legendre_1d_deriv(self.k, xi[:, a]) for a in range(self.d)]
        out = np.ones((xi.shape[0], self.d, self.dim))
        for g in range(self.d):
            for a in range(self.d):
                table = ders[a] if a == g else vals[a]
                out[:, g, :] *= table[:, self.multi_index[:, a]]
        return out

    @cached_property
    def element_quadrature(self):
        """Tensor Gauss rule on ``[-1,1]^d``: points ``(n, d)`` and weights ``(n,)``."""
        x, w = gauss_legendre(self.n_quad)
        pts = np.array(list(product(x, repeat=self.d)))
        wts = np.prod(np.array(list(product(w, repeat=self.d))), axis=1)
        return pts, wts

    def face_quadrature(self, axis: int, high: bool):
        """Reference points on the face ``xi_axis = +-1`` and their (d-1)-dim weights."""
        if self.d == 1:
            return np.array([[1.0 if high else -1.0]]), np.array([1.0])
        x, w = gauss_legendre(self.n_quad)
        pts = np.empty((x.size, 2))
        pts[:, axis] = 1.0 if high else -1.0
        pts[:, 1 - axis] = x
        return pts, w

    def scale(self, h) -> float:
        """Factor turning reference-orthonormal functions into ``L^2(K)``-orthonormal ones."""
        return float(np.prod(np.sqrt(2.0 / np.asarray(h, dtype=float))))


def l2_project(f, mesh, element: int, basis: LocalBasis) -> np.ndarray:
    """L2 projection of ``f`` onto the local space of ``element``.

    ``f`` maps physical points ``(n, d)`` to ``(n,)`` or ``(n, m)``; the result
    has shape ``(dim,)`` or ``(m, dim)`` in the ``L^2(K)``-orthonormal basis.
    """
    pts, wts = basis.element_quadrature
    x = mesh.lower_corners[element] + 0.5 * (pts + 1.0) * mesh.h
    vals = np.asarray(f(x), dtype=float)
    phi = basis.evaluate(pts) * basis.scale(mesh.h)
    jac = mesh.element_volume / 2**mesh.d
    coeffs = (phi * (wts * jac)[:, None]).T @ vals
    return coeffs.T if vals.ndim == 2 else coeffs


def _outflow_is_right(outflow) -> bool:
    if outflow in ("right", "+", +1, 1, True):
        return True
    if outflow in ("left", "-", -1, False):
        return False
    raise InputError(f"outflow must be 'left' or 'right', got {outflow!r}")


def radau_matrix(k: int, outflow, n_quad: int) -> np.ndarray:
    """Linear map from samples to Radau coefficients on ``[-1, 1]``.

    The sample vector is ``[f(x_1), ..., f(x_nq), f(x_out)]`` with ``x_q`` the
    Gauss nodes; the output is the ``k+1`` orthonormal Legendre coefficients.
    """
    if k < 1:
        raise InputError("the Radau projection is defined for k >= 1; use l2_project for k = 0")
    x, w = gauss_legendre(n_quad)
    phi = legendre_1d(k, x)
    x_out = 1.0 if _outflow_is_right(outflow) else -1.0
    phi_out = legendre_1d(k, [x_out])[0]
    R = np.zeros((k + 1, n_quad + 1))
    R[:k, :n_quad] = (phi[:, :k] * w[:, None]).T
    R[k, n_quad] = 1.0 / phi_out[k]
    R[k, :n_quad] = -(phi_out[:k] @ R[:k, :n_quad]) / phi_out[k]
    return R


def radau_project(f, k: int, outflow="right", interval=(-1.0, 1.0), n_quad: int | None = None) -> np.ndarray:
    """Radau projection of a scalar function on an interval.

    The result ``R f`` has the same integrals as ``f`` against ``P_{k-1}`` and
    agrees with ``f`` at the outflow endpoint. Coefficients refer to the
    ``L^2(interval)``-orthonormal Legendre basis; see :func:`legendre_to_poly`.
    """
    a, b = map(float, interval)
    nq = n_quad or max(k + 2, RADAU_QUAD_MIN)
    R = radau_matrix(k, outflow, nq)
    x, _ = gauss_legendre(nq)
    x_out = 1.0 if _outflow_is_right(outflow) else -1.0
    xs = np.append(x, x_out)
    samples = np.asarray(f(a + 0.5 * (xs + 1.0) * (b - a)), dtype=float)
    # reference coefficients c_ref satisfy Rf = sum c_ref phi_j(xi); rescale to L2(interval)
    return (R @ samples) * np.sqrt(0.5 * (b - a))


def tensor_radau_project(f, k: int, outflow=("right", "right"), rect=((-1.0, 1.0), (-1.0, 1.0)),
                         order=(0, 1), n_quad: int | None = None) -> np.ndarray:
    """Axis-wise Radau projection ``R_1 (x) R_2`` on a rectangle.

    ``f(x, y)`` is vectorized over arrays. ``order`` selects which axis is
    projected first. Returns ``(k+1)**2`` coefficients, axis 0 slowest.
    """
    nq = n_quad or max(k + 2, RADAU_QUAD_MIN)
    x, _ = gauss_legendre(nq)
    mats, pts = [], []
    for a in range(2):
        mats.append(radau_matrix(k, outflow[a], nq))
        x_out = 1.0 if _outflow_is_right(outflow[a]) else -1.0
        lo, hi = map(float, rect[a])
        pts.append(lo + 0.5 * (np.append(x, x_out) + 1.0) * (hi - lo))
    X, Y = np.meshgrid(pts[0], pts[1], indexing="ij")
    F = np.asarray(f(X, Y), dtype=float)
    if tuple(order) == (0, 1):
        C = (mats[0] @ F) @ mats[1].T
    elif tuple(order) == (1, 0):
        C = mats[0] @ (F @ mats[1].T)
    else:
        raise InputError(f"order must be (0, 1) or (1, 0), got {order!r}")
    widths = [float(r[1]) - float(r[0]) for r in rect]
    return C.ravel() * np.sqrt(0.25 * widths[0] * widths[1])


def legendre_to_poly(coeffs, interval=(-1.0, 1.0)) -> np.polynomial.Polynomial:
    """Convert ``L^2(interval)``-orthonormal Legendre coefficients to a power series in x."""
    a, b = map(float, interval)
    c = np.asarray(coeffs, dtype=float) * np.sqrt(np.arange(len(coeffs)) + 0.5) / np.sqrt(0.5 * (b - a))
    ref = np.polynomial.Legendre(c, domain=[a, b], window=[-1, 1])
    return ref.convert(kind=np.polynomial.Polynomial)


def characteristic_radau_project(u, mesh, basis: LocalBasis, eigvals, eigvecs, tol=1e-12,
                                 n_quad: int | None = None) -> np.ndarray:
    """Upwind-aware Radau projection of a 1D moment vector field.

    ``u`` maps points ``(n, 1)`` to ``(n, L)``. Each characteristic variable
    ``w = V^T u`` is Radau-projected toward its own outflow end (right for
    positive speed, left for negative); zero-speed components use the plain
    L2 projection. Returns coefficients ``(n_elements, L, dim)``.
    """
    if mesh.d != 1:
        raise InputError("characteristic Radau projection is implemented for d = 1")
    k = basis.k
    V = np.asarray(eigvecs)
    lam = np.asarray(eigvals)
    L = lam.size
    out = np.empty((mesh.n_elements, L, basis.dim))
    nq = n_quad or max(k + 2, RADAU_QUAD_MIN)
    hi_basis = basis.with_quadrature(nq)
    for e in range(mesh.n_elements):
        a = mesh.lower_corners[e, 0]
        interval = (a, a + mesh.h[0])
        wfun = lambda z: np.asarray(u(np.asarray(z).reshape(-1, 1))) @ V  # noqa: E731
        w = np.empty((L, basis.dim))
        l2 = l2_project(lambda x: wfun(x[:, 0]), mesh, e, hi_basis)
        for c in range(L):
            if abs(lam[c]) <= tol or k == 0:
                w[c] = l2[c]
            else:
                side = "right" if lam[c] > 0 else "left"
                w[c] = radau_project(lambda z: wfun(z)[:, c], k, side, interval, n_quad=nq)
        out[e] = V @ w
    return out
