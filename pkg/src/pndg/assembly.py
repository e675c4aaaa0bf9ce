"""
Global DG system for the P_N equations on periodic Cartesian meshes.

Degrees of freedom are laid out element-major, then moment, then local basis
function: ``dof = (element * L + moment) * dim + j``. Spatial axis ``a`` of
the mesh is paired with the moment matrix returned by :func:`spatial_axes`;
in 1D the single axis is the slab coordinate ``z`` and uses ``A^(3)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .basis import LocalBasis
from .errors import ConfigurationError, InputError
from .geometry import PeriodicCartesianMesh
from .harmonics import ZERO_SNAP, MomentMatrices, check_material_assumptions


def spatial_axes(d: int) -> tuple[int, ...]:
    """Moment-matrix index (0-based) driving each mesh axis."""
    return {1: (2,), 2: (0, 1)}[d]


def numerical_flux(u_minus, u_plus, normal, matrices: MomentMatrices) -> np.ndarray:
    """Upwind flux ``n.A {{u}} - 1/2 |n|.|A| [[u]]`` for moment vectors.

    ``normal`` has 3 components in the frame of ``A^(1..3)``; ``u_minus`` is
    the interior trace and ``u_plus`` the exterior one. Leading batch axes
    on the traces are allowed.
    """
    n = np.asarray(normal, dtype=float)
    if n.shape != (3,):
        raise InputError(f"normal must have 3 components, got shape {n.shape}")
    um = np.asarray(u_minus, dtype=float)
    up = np.asarray(u_plus, dtype=float)
    nA = np.tensordot(n, matrices.A, axes=(0, 0))
    nD = np.tensordot(np.abs(n), matrices.absA, axes=(0, 0))
    return 0.5 * (um + up) @ nA.T - 0.5 * (up - um) @ nD.T


@dataclass(frozen=True)
class MaterialField:
    """Cross sections (constants or callables of ``x`` with shape ``(n, d)``) and scaling ``eps``."""

    sigma_t: float | Callable
    sigma_a: float | Callable
    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ConfigurationError(f"scaling parameter must satisfy 0 < eps <= 1, got eps={self.eps}")
        if self.is_constant:
            check_material_assumptions(self.sigma_t, self.sigma_a, self.eps)

    @property
    def is_constant(self) -> bool:
        return not callable(self.sigma_t) and not callable(self.sigma_a)

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        n = x.shape[:-1]
        flat = x.reshape(-1, x.shape[-1])
        st = self.sigma_t(flat) if callable(self.sigma_t) else np.full(flat.shape[0], float(self.sigma_t))
        sa = self.sigma_a(flat) if callable(self.sigma_a) else np.full(flat.shape[0], float(self.sigma_a))
        st = np.broadcast_to(np.asarray(st, dtype=float), flat.shape[:1]).reshape(n)
        sa = np.broadcast_to(np.asarray(sa, dtype=float), flat.shape[:1]).reshape(n)
        check_material_assumptions(st, sa, self.eps)
        return st, sa

    def q_diag(self, x, L: int) -> np.ndarray:
        """Diagonal of ``Q`` at points ``x``: shape ``x.shape[:-1] + (L,)``."""
        st, sa = self.evaluate(x)
        q = np.empty(st.shape + (L,))
        q[..., 0] = self.eps * sa
        q[..., 1:] = (st / self.eps)[..., None]
        return q

    def q_min_diag(self, x, L: int) -> float:
        return float(self.q_diag(x, L).min())


@dataclass(frozen=True)
class Discretization:
    """Mesh, local basis and moment matrices that together fix the DoF layout."""

    mesh: PeriodicCartesianMesh
    basis: LocalBasis
    matrices: MomentMatrices

    def __post_init__(self):
        if self.mesh.d != self.basis.d:
            raise InputError(f"mesh dimension {self.mesh.d} != basis dimension {self.basis.d}")

    @property
    def d(self) -> int:
        return self.mesh.d

    @property
    def L(self) -> int:
        return self.matrices.L

    @property
    def N(self) -> int:
        return self.matrices.basis.N

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def n_dofs(self) -> int:
        return self.mesh.n_elements * self.L * self.basis.dim

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.mesh.n_elements, self.L, self.basis.dim)

    @property
    def axes(self) -> tuple[int, ...]:
        return spatial_axes(self.d)

    def with_quadrature(self, n_quad: int) -> "Discretization":
        return Discretization(self.mesh, self.basis.with_quadrature(n_quad), self.matrices)

    def normal3(self, axis: int, sign: float = 1.0) -> np.ndarray:
        n = np.zeros(3)
        n[self.axes[axis]] = sign
        return n

    @cached_property
    def volume_points(self):
        """Physical quadrature points ``(ne, nq, d)``, weights ``(nq,)`` incl. Jacobian, and basis values ``(nq, dim)``."""
        ref, w = self.basis.element_quadrature
        x = self.mesh.lower_corners[:, None, :] + 0.5 * (ref[None] + 1.0) * self.mesh.h
        jac = self.mesh.element_volume / 2**self.d
        phi = self.basis.evaluate(ref) * self.basis.scale(self.mesh.h)
        return x, w * jac, phi

    @cached_property
    def stiffness(self) -> list[np.ndarray]:
        """``S_a[j, l] = (psi_l, d_a psi_j)_K`` per axis (identical on every element)."""
        ref, w = self.basis.element_quadrature
        phi = self.basis.evaluate(ref)
        grad = self.basis.gradient(ref)
        out = []
        for a in range(self.d):
            out.append((2.0 / self.mesh.h[a]) * (grad[:, a, :] * w[:, None]).T @ phi)
        return out

    def face_traces(self, axis: int):
        """Basis values on a face normal to ``axis``: low-element side, high-element side, weights.

        The weights include the face Jacobian and the basis scaling, so
        ``(phi_L * w) @ phi_R.T`` integrates products of physical basis functions.
        """
        ptsL, w = self.basis.face_quadrature(axis, high=True)
        ptsR, _ = self.basis.face_quadrature(axis, high=False)
        s = self.basis.scale(self.mesh.h)
        phiL = self.basis.evaluate(ptsL) * s
        phiR = self.basis.evaluate(ptsR) * s
        wf = w * self.mesh.face_measure(axis) / 2 ** (self.d - 1)
        return phiL, phiR, wf


@dataclass
class MomentField:
    """DG coefficients of a moment vector field, shape ``(n_elements, L, dim)``."""

    disc: Discretization
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != self.disc.shape:
            if self.coeffs.size == self.disc.n_dofs:
                self.coeffs = self.coeffs.reshape(self.disc.shape)
            else:
                raise InputError(f"coefficient array of shape {self.coeffs.shape} does not fit layout {self.disc.shape}")

    @classmethod
    def zeros(cls, disc: Discretization) -> "MomentField":
        return cls(disc, np.zeros(disc.shape))

    @classmethod
    def project(cls, disc: Discretization, u: Callable, n_quad: int | None = None) -> "MomentField":
        """Elementwise L2 projection of ``u: (n, d) -> (n, L)``."""
        q = disc.with_quadrature(n_quad) if n_quad else disc
        x, w, phi = q.volume_points
        vals = np.asarray(u(x.reshape(-1, disc.d))).reshape(x.shape[0], x.shape[1], disc.L)
        coeffs = np.einsum("eqp,q,qj->epj", vals, w, phi)
        return cls(disc, coeffs)

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def values_at(self, ref_points) -> np.ndarray:
        """Field values at reference points in every element: ``(ne, n, L)``."""
        phi = self.disc.basis.evaluate(ref_points) * self.disc.basis.scale(self.disc.mesh.h)
        return np.einsum("epj,qj->eqp", self.coeffs, phi)

    def __call__(self, x) -> np.ndarray:
        """Point evaluation; ``x`` has shape ``(n, d)``. Returns ``(n, L)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float)) % 1.0
        mesh = self.disc.mesh
        elems = mesh.locate(x)
        ref = 2.0 * (x - mesh.lower_corners[elems]) / mesh.h - 1.0
        phi = self.disc.basis.evaluate(ref) * self.disc.basis.scale(mesh.h)
        return np.einsum("npj,nj->np", self.coeffs[elems], phi)

    def moment(self, p: int) -> np.ndarray:
        return self.coeffs[:, p, :]


@dataclass
class GlobalSystem:
    """Assembled sparse operator, load vector and the layout they refer to."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    disc: Discretization
    materials: MaterialField
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.disc.n_dofs
        if self.matrix.shape != (n, n) or self.rhs.shape != (n,):
            raise InputError("matrix/rhs dimensions do not match the DoF layout")

    def bilinear(self, u, v) -> float:
        """``a_h(u, v)`` for fields or flat coefficient vectors."""
        u = u.flat if isinstance(u, MomentField) else np.asarray(u)
        v = v.flat if isinstance(v, MomentField) else np.asarray(v)
        return float(v @ (self.matrix @ u))


def _snap(M, rtol: float = ZERO_SNAP) -> np.ndarray:
    """Zero entries below ``rtol * max|M|``; keeps quadrature round-off out of the sparsity pattern."""
    M = np.array(M, dtype=float)
    M[np.abs(M) < rtol * np.max(np.abs(M), initial=0.0)] = 0.0
    return M


def _mass_blocks(disc: Discretization, materials: MaterialField) -> sp.csr_matrix:
    """Block-diagonal ``(Q u, v)_K`` operator."""
    ne, L, nb = disc.shape
    if materials.is_constant:
        q = materials.q_diag(np.zeros((1, disc.d)), L)[0]
        return sp.kron(sp.identity(ne), sp.kron(sp.diags(q), sp.identity(nb)), format="csr")
    x, w, phi = disc.volume_points
    q = materials.q_diag(x, L)  # (ne, nq, L)
    # only two distinct weights: absorption for moment 0, total for the rest
    Ma = np.einsum("eq,q,qj,ql->ejl", q[..., 0], w, phi, phi)
    Mt = np.einsum("eq,q,qj,ql->ejl", q[..., 1], w, phi, phi)
    blocks = np.empty((ne, L, nb, nb))
    blocks[:, 0] = [_snap(m) for m in Ma]
    blocks[:, 1:] = np.array([_snap(m) for m in Mt])[:, None]
    e, p, j, l = np.meshgrid(np.arange(ne), np.arange(L), np.arange(nb), np.arange(nb), indexing="ij")
    rows = ((e * L + p) * nb + j).ravel()
    cols = ((e * L + p) * nb + l).ravel()
    n = disc.n_dofs
    return sp.csr_matrix((blocks.ravel(), (rows, cols)), shape=(n, n))


def _shift_matrix(mesh: PeriodicCartesianMesh, axis: int) -> sp.csr_matrix:
    """``P[e, high neighbour of e] = 1``."""
    ne = mesh.n_elements
    return sp.csr_matrix((np.ones(ne), (np.arange(ne), mesh.shift(axis, +1))), shape=(ne, ne))


def transport_operator(disc: Discretization) -> sp.csr_matrix:
    """Material-independent part: volume advection plus upwind face terms."""
    ne = disc.mesh.n_elements
    eye = sp.identity(ne, format="csr")
    vol = None
    for a, i in enumerate(disc.axes):
        term = sp.kron(sp.csr_matrix(disc.matrices.A[i]), sp.csr_matrix(_snap(disc.stiffness[a])))
        vol = term if vol is None else vol + term
    K = -sp.kron(eye, vol)
    for a, i in enumerate(disc.axes):
        A = disc.matrices.A[i]
        D = disc.matrices.absA[i]
        Ap = sp.csr_matrix(_snap(0.5 * (A + D)))
        Am = sp.csr_matrix(_snap(0.5 * (A - D)))
        phiL, phiR, wf = disc.face_traces(a)
        T_LL = sp.csr_matrix(_snap((phiL * wf[:, None]).T @ phiL))
        T_LR = sp.csr_matrix(_snap((phiL * wf[:, None]).T @ phiR))
        T_RL = sp.csr_matrix(_snap((phiR * wf[:, None]).T @ phiL))
        T_RR = sp.csr_matrix(_snap((phiR * wf[:, None]).T @ phiR))
        P = _shift_matrix(disc.mesh, a)
        # face flux from the low element: F = (A+D)/2 u_low + (A-D)/2 u_high; the high element sees -F
        K = K + sp.kron(eye, sp.kron(Ap, T_LL))
        K = K + sp.kron(P, sp.kron(Am, T_LR))
        K = K - sp.kron(P.T, sp.kron(Ap, T_RL))
        K = K - sp.kron(eye, sp.kron(Am, T_RR))
    K = sp.csr_matrix(K)
    K.sum_duplicates()
    # face terms partially cancel; drop the round-off they leave behind
    K.data[np.abs(K.data) < ZERO_SNAP * np.max(np.abs(K.data), initial=0.0)] = 0.0
    K.eliminate_zeros()
    return K


def load_vector(disc: Discretization, materials: MaterialField, forcing: Callable | None) -> np.ndarray:
    """``f(v_h) = eps * sum_K (f, v_h)_K`` for every basis test function."""
    if forcing is None:
        return np.zeros(disc.n_dofs)
    x, w, phi = disc.volume_points
    vals = np.asarray(forcing(x.reshape(-1, disc.d)), dtype=float)
    if vals.shape != (x.shape[0] * x.shape[1], disc.L):
        raise InputError(f"forcing must return shape (n, {disc.L}), got {vals.shape}")
    vals = vals.reshape(x.shape[0], x.shape[1], disc.L)
    return materials.eps * np.einsum("eqp,q,qj->epj", vals, w, phi).reshape(-1)


def assemble(mesh: PeriodicCartesianMesh, basis: LocalBasis, matrices: MomentMatrices,
             materials: MaterialField, forcing: Callable | None = None) -> GlobalSystem:
    """Assemble ``a_h`` and the load functional.

    ``forcing`` maps points ``(n, d)`` to moment vectors ``(n, L)`` (the
    moments ``<m f>`` of the kinetic source) or is ``None`` for zero load.
    """
    disc = Discretization(mesh, basis, matrices)
    if not materials.is_constant:
        materials.evaluate(disc.volume_points[0].reshape(-1, disc.d))
    M = transport_operator(disc) + _mass_blocks(disc, materials)
    M = sp.csr_matrix(M)
    M.sum_duplicates()
    M.eliminate_zeros()
    if not np.all(np.isfinite(M.data)):
        raise ConfigurationError("assembled operator contains non-finite entries")
    rhs = load_vector(disc, materials, forcing)
    return GlobalSystem(M, rhs, disc, materials)


# ----------------------------------------------------------------------------- norms


def l2_norm(field: MomentField) -> float:
    """``||u||`` over ``X``; the local bases are orthonormal so this is the coefficient 2-norm."""
    return float(np.linalg.norm(field.coeffs))


def q_norm(field: MomentField, materials: MaterialField) -> float:
    """``||u||_Q = ||sqrt(Q) u||`` by element quadrature."""
    disc = field.disc
    x, w, phi = disc.volume_points
    vals = np.einsum("epj,qj->eqp", field.coeffs, phi)
    q = materials.q_diag(x, disc.L)
    return float(np.sqrt(np.einsum("eqp,q->", q * vals**2, w)))


def jump_energy(field: MomentField) -> float:
    """``1/4 sum_K (|n|.D [[v]], [[v]])_dK``, i.e. half the sum over distinct faces."""
    disc = field.disc
    total = 0.0
    for a, i in enumerate(disc.axes):
        phiL, phiR, wf = disc.face_traces(a)
        high = disc.mesh.shift(a, +1)
        uL = np.einsum("epj,fj->efp", field.coeffs, phiL)
        uR = np.einsum("epj,fj->efp", field.coeffs[high], phiR)
        jump = uR - uL
        total += 0.5 * float(np.einsum("efp,pq,efq,f->", jump, disc.matrices.absA[i], jump, wf))
    return total


def triple_norm(field: MomentField, materials: MaterialField) -> float:
    """Energy norm ``(1/4 sum_K (|n|.D[[v]],[[v]])_dK + (Qv, v))^(1/2)``."""
    return float(np.sqrt(jump_energy(field) + q_norm(field, materials) ** 2))


def error_norms(field: MomentField, exact: Callable, materials: MaterialField,
                n_quad: int | None = None) -> dict[str, float]:
    """L2, Q-weighted and triple-norm distance between ``field`` and a smooth periodic ``exact``.

    The exact solution is sampled at Gauss points (``n_quad`` per axis,
    default ``k+3``) rather than projected. Its traces are continuous, so the
    jump part of the triple norm only sees ``field``.
    """
    disc = field.disc
    q = disc.with_quadrature(n_quad or disc.k + 3)
    x, w, phi = q.volume_points
    uh = np.einsum("epj,qj->eqp", field.coeffs, phi)
    ue = np.asarray(exact(x.reshape(-1, disc.d))).reshape(uh.shape)
    err = ue - uh
    qd = materials.q_diag(x, disc.L)
    l2 = float(np.sqrt(np.einsum("eqp,q->", err**2, w)))
    qn = float(np.sqrt(np.einsum("eqp,q->", qd * err**2, w)))
    tri = float(np.sqrt(jump_energy(field) + qn**2))
    return {"l2": l2, "q": qn, "triple": tri}


def apply_to_exact(disc: Discretization, u: Callable, materials: MaterialField) -> np.ndarray:
    """``a_h(u, psi_j)`` for every basis test function, with ``u`` smooth and periodic.

    Traces of a continuous ``u`` coincide on both sides of every face, so the
    numerical flux reduces to ``n.A u``.
    """
    ne, L, nb = disc.shape
    x, w, phi = disc.volume_points
    ref, _ = disc.basis.element_quadrature
    grad = disc.basis.gradient(ref) * disc.basis.scale(disc.mesh.h)
    vals = np.asarray(u(x.reshape(-1, disc.d))).reshape(ne, -1, L)
    qd = materials.q_diag(x, L)
    out = np.einsum("eqp,q,qj->epj", qd * vals, w, phi)
    for a, i in enumerate(disc.axes):
        Au = vals @ disc.matrices.A[i].T
        dphi = grad[:, a, :] * (2.0 / disc.mesh.h[a])
        out -= np.einsum("eqp,q,qj->epj", Au, w, dphi)
        for high in (True, False):
            ref_f, wf = disc.basis.face_quadrature(a, high)
            wf = wf * disc.mesh.face_measure(a) / 2 ** (disc.d - 1)
            phif = disc.basis.evaluate(ref_f) * disc.basis.scale(disc.mesh.h)
            xf = disc.mesh.lower_corners[:, None, :] + 0.5 * (ref_f[None] + 1.0) * disc.mesh.h
            uf = np.asarray(u(xf.reshape(-1, disc.d))).reshape(ne, -1, L)
            sign = 1.0 if high else -1.0
            out += sign * np.einsum("efp,f,fj->epj", uf @ disc.matrices.A[i].T, wf, phif)
    return out.reshape(-1)
