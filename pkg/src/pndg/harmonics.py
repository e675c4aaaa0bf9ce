"""
Real spherical harmonics, sphere quadrature and P_N moment matrices.

Conventions
-----------
Directions are written ``omega = (sqrt(1-mu^2) cos(phi), sqrt(1-mu^2) sin(phi), mu)``.
The harmonic of degree ``l`` and order ``kappa`` is

    m_l^kappa(omega) = alpha_l^kappa * P_l^|kappa|(mu) * T^kappa(phi)

with ``alpha_l^kappa = sqrt((2l+1)/(4 pi) * (l-|kappa|)!/(l+|kappa|)!)``,
associated Legendre functions *without* the Condon-Shortley phase, and

    T^kappa(phi) = sqrt(2) cos(kappa phi)   kappa > 0
                 = 1                        kappa = 0
                 = sqrt(2) sin(|kappa| phi) kappa < 0

The flat index runs degree-major, order ascending from ``-l`` to ``l``;
``(l, kappa) -> l*l + l + kappa`` (0-based).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, pi, sqrt

import numpy as np

from .errors import ConfigurationError, InputError, PnDGError

ZERO_SNAP = 1e-13


@dataclass(frozen=True)
class MomentBasis:
    """Index bookkeeping for the harmonics of degree ``0..N``."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise InputError(f"truncation degree must be a nonnegative integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def L(self) -> int:
        return (self.N + 1) ** 2

    def index(self, l: int, kappa: int) -> int:
        if not (0 <= l <= self.N and -l <= kappa <= l):
            raise InputError(f"(l, kappa) = ({l}, {kappa}) outside basis of degree {self.N}")
        return l * l + l + kappa

    def pair(self, p: int) -> tuple[int, int]:
        if not 0 <= p < self.L:
            raise InputError(f"flat index {p} outside [0, {self.L})")
        l = int(sqrt(p))
        while l * l > p:
            l -= 1
        while (l + 1) ** 2 <= p:
            l += 1
        return l, p - l * l - l

    @property
    def degrees(self) -> np.ndarray:
        """Degree ``l`` of every flat index."""
        return np.concatenate([np.full(2 * l + 1, l) for l in range(self.N + 1)])

    @property
    def orders(self) -> np.ndarray:
        """Order ``kappa`` of every flat index."""
        return np.concatenate([np.arange(-l, l + 1) for l in range(self.N + 1)])

    def block(self, l: int) -> slice:
        """Slice of the flat index covering degree ``l``."""
        return slice(l * l, (l + 1) ** 2)


def _assoc_legendre(N: int, mu: np.ndarray) -> np.ndarray:
    """``P_l^m(mu)`` for ``0 <= m <= l <= N``, no Condon-Shortley phase.

    Returns an array of shape ``(N+1, N+1, len(mu))`` indexed ``[l, m]``.
    """
    mu = np.asarray(mu, dtype=float)
    s = np.sqrt(np.clip(1.0 - mu * mu, 0.0, None))
    P = np.zeros((N + 1, N + 1) + mu.shape)
    P[0, 0] = 1.0
    for m in range(1, N + 1):
        P[m, m] = (2 * m - 1) * s * P[m - 1, m - 1]
    for m in range(0, N):
        P[m + 1, m] = (2 * m + 1) * mu * P[m, m]
    for m in range(0, N + 1):
        for l in range(m + 2, N + 1):
            P[l, m] = ((2 * l - 1) * mu * P[l - 1, m] - (l + m - 1) * P[l - 2, m]) / (l - m)
    return P


def _normalization(l: int, m: int) -> float:
    return sqrt((2 * l + 1) / (4 * pi) * factorial(l - m) / factorial(l + m))


def eval_basis(omega, basis: MomentBasis) -> np.ndarray:
    """Evaluate the harmonic vector ``m(omega)``.

    ``omega`` may be a single unit vector of shape ``(3,)`` or a batch of
    shape ``(n, 3)``; the result has shape ``(L,)`` or ``(n, L)``.
    """
    om = np.asarray(omega, dtype=float)
    single = om.ndim == 1
    om = np.atleast_2d(om)
    if om.shape[-1] != 3:
        raise InputError(f"directions must have 3 components, got shape {np.shape(omega)}")
    if np.any(np.abs(np.linalg.norm(om, axis=1) - 1.0) > 1e-12):
        raise InputError("direction vectors must have unit length (tolerance 1e-12)")

    N = basis.N
    mu = om[:, 2]
    phi = np.arctan2(om[:, 1], om[:, 0])
    P = _assoc_legendre(N, mu)
    out = np.empty((om.shape[0], basis.L))
    for l in range(N + 1):
        for kappa in range(-l, l + 1):
            m = abs(kappa)
            if kappa > 0:
                T = sqrt(2.0) * np.cos(m * phi)
            elif kappa < 0:
                T = sqrt(2.0) * np.sin(m * phi)
            else:
                T = 1.0
            out[:, l * l + l + kappa] = _normalization(l, m) * P[l, m] * T
    return out[0] if single else out


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes ``(n, 3)`` on the unit sphere and positive weights summing to 4 pi."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> np.ndarray:
        """Integrate samples of shape ``(n, ...)`` over the sphere."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def sphere_quadrature(N: int, n_mu: int | None = None, n_phi: int | None = None) -> SphereQuadrature:
    """Gauss-Legendre in ``mu`` times the trapezoidal rule in ``phi``.

    With the defaults (``N+2`` and ``2N+3`` points) the rule integrates every
    spherical polynomial of degree ``<= 2N+2`` exactly. Larger ``n_mu`` and
    ``n_phi`` may be requested for non-polynomial integrands.
    """
    if int(N) != N or N < 0:
        raise InputError(f"N must be a nonnegative integer, got {N!r}")
    n_mu = max(N + 2, n_mu or 0)
    n_phi = max(2 * N + 3, n_phi or 0)
    mu, w_mu = np.polynomial.legendre.leggauss(n_mu)
    phi = 2.0 * pi * (np.arange(n_phi) + 0.5) / n_phi
    s = np.sqrt(1.0 - mu * mu)
    nodes = np.stack(
        [
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(mu, n_phi),
        ],
        axis=1,
    )
    # renormalize to remove rounding in s
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = np.repeat(w_mu, n_phi) * (2.0 * pi / n_phi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphereQuadrature(nodes, weights)


def abs_matrix(M) -> np.ndarray:
    """Operator absolute value ``Q |Lambda| Q^T`` of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if M.size and np.max(np.abs(M - M.T)) > 1e-10:
        raise InputError("abs_matrix requires a symmetric matrix (tolerance 1e-10)")
    lam, V = np.linalg.eigh(0.5 * (M + M.T))
    return (V * np.abs(lam)) @ V.T


@dataclass(frozen=True)
class MomentMatrices:
    """The matrices ``A^(i) = <omega_i m m^T>`` and their spectral data.

    Attributes are arrays stacked over ``i = 1, 2, 3`` (0-based axis 0):
    ``A`` and ``absA`` are ``(3, L, L)``, ``eigvals`` is ``(3, L)`` and
    ``eigvecs`` is ``(3, L, L)`` with ``A[i] = eigvecs[i] @ diag(eigvals[i]) @ eigvecs[i].T``.
    """

    basis: MomentBasis
    A: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    absA: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.basis.L


def moment_matrices(basis: MomentBasis) -> MomentMatrices:
    """Build ``A^(1..3)`` by exact sphere quadrature and diagonalize them."""
    quad = sphere_quadrature(basis.N)
    m = eval_basis(quad.nodes, basis)
    wm = m * quad.weights[:, None]
    A = np.empty((3, basis.L, basis.L))
    for i in range(3):
        Ai = (wm * quad.nodes[:, i : i + 1]).T @ m
        Ai = 0.5 * (Ai + Ai.T)
        Ai[np.abs(Ai) < ZERO_SNAP] = 0.0
        A[i] = Ai
    eigvals = np.empty((3, basis.L))
    eigvecs = np.empty((3, basis.L, basis.L))
    absA = np.empty_like(A)
    for i in range(3):
        try:
            lam, V = np.linalg.eigh(A[i])
        except np.linalg.LinAlgError as exc:  # pragma: no cover - symmetric input
            raise PnDGError(f"eigendecomposition of A^({i + 1}) failed") from exc
        eigvals[i], eigvecs[i] = lam, V
        absA[i] = (V * np.abs(lam)) @ V.T
        absA[i] = 0.5 * (absA[i] + absA[i].T)
        absA[i][np.abs(absA[i]) < ZERO_SNAP] = 0.0
    for arr in (A, eigvals, eigvecs, absA):
        arr.setflags(write=False)
    return MomentMatrices(basis, A, eigvals, eigvecs, absA)


def scattering_Q(sigma_t, sigma_a, eps, L):
    """Diagonal of the collision matrix ``Q`` and of its square root.

    ``Q = diag(eps*sigma_a, sigma_t/eps, ..., sigma_t/eps)`` of length ``L``.
    Cross sections may be scalars or arrays of samples; the diagonal then
    carries the sample axes first and ``L`` last.
    """
    sigma_t = np.asarray(sigma_t, dtype=float)
    sigma_a = np.asarray(sigma_a, dtype=float)
    check_material_assumptions(sigma_t, sigma_a, eps)
    L = int(L)
    if L < 1:
        raise InputError(f"L must be positive, got {L}")
    shape = np.broadcast(sigma_t, sigma_a).shape
    diag = np.empty(shape + (L,))
    diag[..., 0] = eps * sigma_a
    diag[..., 1:] = (sigma_t / eps)[..., None]
    return diag, np.sqrt(diag)


def check_material_assumptions(sigma_t, sigma_a, eps) -> None:
    """Raise :class:`ConfigurationError` naming the first violated inequality."""
    if not (0.0 < eps <= 1.0):
        raise ConfigurationError(f"scaling parameter must satisfy 0 < eps <= 1, got eps={eps}")
    sigma_t = np.asarray(sigma_t, dtype=float)
    sigma_a = np.asarray(sigma_a, dtype=float)
    if not np.all(np.isfinite(sigma_t)) or not np.all(np.isfinite(sigma_a)):
        raise ConfigurationError("cross sections must be finite")
    if np.any(sigma_a <= 0.0):
        raise ConfigurationError(
            f"assumption violated: sigma_a >= sigma_a_min > 0 (min sigma_a = {sigma_a.min():g})"
        )
    if np.any(sigma_t <= sigma_a):
        gap = np.min(sigma_t - sigma_a)
        raise ConfigurationError(
            f"assumption violated: sigma_t > sigma_a (min sigma_t - sigma_a = {gap:g})"
        )
    if np.any(sigma_t - eps * eps * sigma_a <= 0.0):
        raise ConfigurationError("assumption violated: sigma_t - eps^2 sigma_a > 0")
