"""
Semi-analytic reference solutions on the periodic unit cube.

For constant cross sections every Fourier mode ``exp(2 pi i kappa.x)``
decouples. The P_N system then reduces to one dense ``L x L`` solve per
mode, and the kinetic equation with an isotropic source closes on the
scalar flux with a single scalar unknown per mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly import MaterialField, spatial_axes
from .errors import InputError, PnDGError
from .harmonics import (MomentBasis, MomentMatrices, SphereQuadrature, check_material_assumptions,
                        eval_basis, moment_matrices, scattering_Q, sphere_quadrature)

_SQRT_4PI = np.sqrt(4.0 * np.pi)


def _as_mode(kappa, d) -> tuple[int, ...]:
    kap = tuple(int(c) for c in np.atleast_1d(kappa))
    if len(kap) != d:
        raise InputError(f"wave vector {kappa!r} does not have {d} components")
    return kap


@dataclass(frozen=True)
class FourierForcing:
    """Finite Fourier series ``f(x) = sum_kappa fhat_kappa exp(2 pi i kappa.x)``.

    ``modes`` maps integer wave vectors to complex vectors of a common
    length (``L`` for moment forcing, 1 for a scalar isotropic source).
    Conjugate symmetry ``fhat_{-kappa} = conj(fhat_kappa)`` is enforced so the
    series is real.
    """

    d: int
    modes: dict

    def __post_init__(self):
        if self.d not in (1, 2):
            raise InputError(f"only d in {{1, 2}} is supported, got {self.d}")
        clean = {}
        for kap, vec in self.modes.items():
            clean[_as_mode(kap, self.d)] = np.atleast_1d(np.asarray(vec, dtype=complex))
        lengths = {v.size for v in clean.values()}
        if len(lengths) > 1:
            raise InputError(f"mode vectors have inconsistent lengths {sorted(lengths)}")
        for kap, vec in clean.items():
            mirror = tuple(-c for c in kap)
            if mirror not in clean or not np.allclose(clean[mirror], np.conj(vec), rtol=0, atol=1e-14):
                raise InputError(f"mode {kap} lacks its conjugate partner {mirror}")
        object.__setattr__(self, "modes", clean)

    @property
    def size(self) -> int:
        return next(iter(self.modes.values())).size if self.modes else 0

    @classmethod
    def cosine(cls, d: int, wave, amplitudes) -> "FourierForcing":
        """``f(x) = amplitudes * cos(2 pi wave.x)`` as a conjugate-symmetric pair."""
        wave = _as_mode(wave, d)
        amp = np.atleast_1d(np.asarray(amplitudes, dtype=float))
        if all(c == 0 for c in wave):
            return cls(d, {wave: amp})
        return cls(d, {wave: 0.5 * amp, tuple(-c for c in wave): 0.5 * amp})

    @classmethod
    def zero(cls, d: int, size: int) -> "FourierForcing":
        return cls(d, {(0,) * d: np.zeros(size)})

    def isotropic_moments(self, L: int) -> "FourierForcing":
        """Moment forcing ``<m f>`` of a scalar isotropic source (only the first moment is nonzero)."""
        if self.size != 1:
            raise InputError("isotropic_moments expects a scalar source")
        modes = {}
        for kap, v in self.modes.items():
            vec = np.zeros(L, dtype=complex)
            vec[0] = _SQRT_4PI * v[0]
            modes[kap] = vec
        return FourierForcing(self.d, modes)

    def __call__(self, x) -> np.ndarray:
        return _synthesize(self.modes, x, self.d)


def _synthesize(modes: dict, x, d: int, derivative: int | None = None) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] != d:
        raise InputError(f"points must have {d} coordinates, got shape {x.shape}")
    size = next(iter(modes.values())).size
    out = np.zeros((x.shape[0], size), dtype=complex)
    for kap, vec in modes.items():
        phase = np.exp(2j * np.pi * (x @ np.asarray(kap, dtype=float)))
        factor = 1.0 if derivative is None else 2j * np.pi * kap[derivative]
        out += factor * phase[:, None] * vec[None, :]
    return out.real


@dataclass(frozen=True)
class ReferenceSolution:
    """Smooth periodic moment field given by its Fourier modes."""

    d: int
    modes: dict

    def __call__(self, x) -> np.ndarray:
        return _synthesize(self.modes, x, self.d)

    def gradient(self, x) -> np.ndarray:
        """Spatial derivatives, shape ``(n, d, L)``."""
        return np.stack([_synthesize(self.modes, x, self.d, derivative=a) for a in range(self.d)], axis=1)

    def mode_norm(self) -> float:
        """``||u||_{L^2(X)}`` via Parseval."""
        return float(np.sqrt(sum(np.sum(np.abs(v) ** 2) for v in self.modes.values())))

    def component_norms(self) -> np.ndarray:
        """``||u_p||_{L^2(X)}`` for each moment ``p``."""
        return np.sqrt(sum(np.abs(v) ** 2 for v in self.modes.values()))


def _modal_operator(kap, matrices: MomentMatrices, qdiag: np.ndarray, d: int) -> np.ndarray:
    Op = np.diag(qdiag).astype(complex)
    for a, i in enumerate(spatial_axes(d)):
        if kap[a]:
            Op = Op + 2j * np.pi * kap[a] * matrices.A[i]
    return Op


def pn_fourier_solve(N: int, eps: float, sigma_t: float, sigma_a: float, forcing: FourierForcing,
                     matrices: MomentMatrices | None = None) -> ReferenceSolution:
    """Exact periodic solution of the P_N system for constant cross sections.

    Each mode solves ``(2 pi i kappa.A + Q) uhat = eps fhat``.
    """
    matrices = matrices or moment_matrices(MomentBasis(N))
    if matrices.basis.N != N:
        raise InputError(f"matrices built for N={matrices.basis.N}, requested N={N}")
    L = matrices.L
    if forcing.size != L:
        raise InputError(f"forcing has {forcing.size} moments, P_{N} needs {L}")
    qdiag, _ = scattering_Q(sigma_t, sigma_a, eps, L)
    modes = {}
    for kap, fhat in forcing.modes.items():
        Op = _modal_operator(kap, matrices, qdiag, forcing.d)
        try:
            modes[kap] = np.linalg.solve(Op, eps * fhat)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - Q is positive definite
            raise PnDGError(f"modal operator for wave vector {kap} is singular") from exc
    return ReferenceSolution(forcing.d, modes)


def strong_residual(solution: ReferenceSolution, forcing: FourierForcing, matrices: MomentMatrices,
                    materials: MaterialField, x) -> np.ndarray:
    """Pointwise residual ``A.grad u + Q u - eps f`` at points ``x``."""
    u = solution(x)
    grad = solution.gradient(x)
    r = materials.q_diag(x, matrices.L) * u - materials.eps * forcing(x)
    for a, i in enumerate(spatial_axes(solution.d)):
        r += grad[:, a, :] @ matrices.A[i].T
    return r


@dataclass
class KineticSolution:
    """Exact angular flux for an isotropic periodic source and constant cross sections.

    ``angular_modes[kappa]`` holds ``uhat_kappa`` sampled at the nodes of
    ``quadrature``; ``scalar_modes[kappa]`` is the sphere average ``ubar_kappa``.
    """

    d: int
    eps: float
    sigma_t: float
    sigma_a: float
    source: FourierForcing
    quadrature: SphereQuadrature
    scalar_modes: dict = field(default_factory=dict)

    def _direction_phase(self, kap) -> np.ndarray:
        nodes = self.quadrature.nodes
        return sum(2.0 * np.pi * kap[a] * nodes[:, i] for a, i in enumerate(spatial_axes(self.d)))

    def angular_mode(self, kap, omega=None) -> np.ndarray:
        """``uhat_kappa(omega)`` at the quadrature nodes (default) or at given directions."""
        kap = _as_mode(kap, self.d)
        s = self.sigma_t / self.eps
        c = s - self.eps * self.sigma_a
        if omega is None:
            kw = self._direction_phase(kap)
        else:
            om = np.atleast_2d(omega)
            kw = sum(2.0 * np.pi * kap[a] * om[:, i] for a, i in enumerate(spatial_axes(self.d)))
        fhat = self.source.modes[kap][0]
        return (c * self.scalar_modes[kap] + self.eps * fhat) / (s + 1j * kw)

    def __call__(self, x, omega) -> np.ndarray:
        """Angular flux ``u(x_n, omega_n)`` for paired points and directions."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        om = np.atleast_2d(np.asarray(omega, dtype=float))
        out = np.zeros(x.shape[0], dtype=complex)
        for kap in self.source.modes:
            phase = np.exp(2j * np.pi * (x @ np.asarray(kap, dtype=float)))
            out += phase * self.angular_mode(kap, om)
        return out.real

    def moments(self, N: int) -> ReferenceSolution:
        """Exact moments ``<m u>`` up to degree ``N`` as a reference field."""
        m = eval_basis(self.quadrature.nodes, MomentBasis(N))
        modes = {kap: self.quadrature.integrate(self.angular_mode(kap)[:, None] * m) for kap in self.source.modes}
        return ReferenceSolution(self.d, modes)

    def pn_error(self, solution: ReferenceSolution, N: int) -> dict[str, float]:
        """Distance between the kinetic flux and the P_N reconstruction ``m^T u``.

        ``total`` is ``||u - m^T u_PN||`` in ``L^2(X x S)`` (Parseval in x,
        quadrature in angle); ``moments`` compares only the first ``L``
        moments.
        """
        m = eval_basis(self.quadrature.nodes, MomentBasis(N))
        total = 0.0
        mom = 0.0
        for kap in self.source.modes:
            uhat = self.angular_mode(kap)
            diff = uhat - m @ solution.modes[kap]
            total += float(self.quadrature.integrate(np.abs(diff) ** 2))
            exact = self.quadrature.integrate(uhat[:, None] * m)
            mom += float(np.sum(np.abs(exact - solution.modes[kap]) ** 2))
        return {"total": np.sqrt(total), "moments": np.sqrt(mom)}


def kinetic_fourier_solve(eps: float, sigma_t: float, sigma_a: float, source: FourierForcing,
                          quadrature: SphereQuadrature | None = None) -> KineticSolution:
    """Solve the kinetic equation mode by mode for an isotropic source.

    Per mode ``uhat(omega) = (c ubar + eps fhat) / (s + 2 pi i kappa.omega)``
    with ``s = sigma_t/eps`` and ``c = s - eps sigma_a``; averaging over the
    sphere gives ``ubar = eps fhat G / (1 - c G)``, ``G = <1/(s + 2 pi i kappa.omega)>/(4 pi)``.
    The denominator is evaluated without cancellation, so the oracle stays
    accurate deep in the diffusive regime.
    """
    check_material_assumptions(sigma_t, sigma_a, eps)
    if source.size != 1:
        raise InputError("kinetic oracle needs a scalar isotropic source")
    quadrature = quadrature or sphere_quadrature(0, n_mu=96, n_phi=192)
    sol = KineticSolution(source.d, eps, float(sigma_t), float(sigma_a), source, quadrature)
    s = sigma_t / eps
    c = s - eps * sigma_a
    for kap, fhat in source.modes.items():
        kw = sol._direction_phase(kap)
        G = quadrature.integrate(1.0 / (s + 1j * kw)) / (4.0 * np.pi)
        # 1 - c G = 1 - s G + eps sigma_a G; for small eps both parts are O(eps^2)
        # and must not be formed by cancellation against 1
        one_minus_sG = quadrature.integrate(kw**2 / (s**2 + kw**2)) / (4.0 * np.pi)
        denom = one_minus_sG + eps * sigma_a * G
        if abs(denom) < 1e-300:  # pragma: no cover - excluded by the material assumptions
            raise PnDGError(f"scalar-flux closure is singular for wave vector {kap}")
        sol.scalar_modes[kap] = eps * fhat[0] * G / denom
    return sol


def manufactured_forcing(u_exact: Callable, grad_exact: Callable, materials: MaterialField,
                         matrices: MomentMatrices, d: int) -> Callable:
    """Moment forcing that makes ``u_exact`` the exact P_N solution.

    ``f = (A.grad u + Q u) / eps`` with ``u_exact: (n, d) -> (n, L)`` and
    ``grad_exact: (n, d) -> (n, d, L)``.
    """
    axes = spatial_axes(d)
    L = matrices.L

    def forcing(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        u = np.asarray(u_exact(x), dtype=float)
        g = np.asarray(grad_exact(x), dtype=float)
        out = materials.q_diag(x, L) * u
        for a, i in enumerate(axes):
            out = out + g[:, a, :] @ matrices.A[i].T
        return out / materials.eps

    return forcing
