"""Sparse linear solves for the assembled DG system."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import GlobalSystem, MomentField
from .errors import InputError, PnDGError, SolverError


DIRECT_MAX_DOFS = 20_000  # above this "auto" tries GMRES first; LU fill grows quickly in 2D


@dataclass(frozen=True)
class SolverConfig:
    """``method`` is ``"direct"`` (sparse LU), ``"iterative"`` (block-Jacobi GMRES)
    or ``"auto"`` (LU for small systems, otherwise GMRES with LU as fallback)."""

    method: str = "direct"
    tolerance: float = 1e-10
    max_iterations: int = 2000
    restart: int = 60
    stall_cycles: int = 5

    def __post_init__(self):
        if self.method not in ("direct", "iterative", "auto"):
            raise InputError(f"unknown solver method {self.method!r}")
        if not 0.0 < self.tolerance < 1.0:
            raise InputError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be >= 1")
        if self.restart < 1 or self.stall_cycles < 1:
            raise InputError("restart and stall_cycles must be >= 1")


def element_block_preconditioner(system: GlobalSystem) -> spla.LinearOperator:
    """Inverse of the element-diagonal blocks of the operator."""
    ne, L, nb = system.disc.shape
    n = L * nb
    bsr = system.matrix.tobsr(blocksize=(n, n))
    blocks = np.zeros((ne, n, n))
    for e in range(ne):
        start, stop = bsr.indptr[e], bsr.indptr[e + 1]
        for pos in range(start, stop):
            if bsr.indices[pos] == e:
                blocks[e] += bsr.data[pos]
    inv = np.linalg.inv(blocks)

    def apply(x):
        return np.einsum("eij,ej->ei", inv, np.asarray(x).reshape(ne, n)).reshape(-1)

    return spla.LinearOperator(system.matrix.shape, matvec=apply, dtype=float)


def relative_residual(system: GlobalSystem, x: np.ndarray) -> float:
    """``||M x - b|| / ||b||``."""
    bnorm = np.linalg.norm(system.rhs)
    r = np.linalg.norm(system.matrix @ x - system.rhs)
    return float(r / bnorm) if bnorm > 0 else float(r)


def backward_error(system: GlobalSystem, x: np.ndarray) -> float:
    """Normwise backward error ``||M x - b||_inf / (||M||_inf ||x||_inf + ||b||_inf)``.

    For small ``eps`` the plain relative residual has a rounding floor near
    ``u_round * ||M|| ||x|| / ||b||``, which grows like ``1/eps^2``; this
    quantity does not.
    """
    r = np.max(np.abs(system.matrix @ x - system.rhs))
    Mnorm = float(np.max(np.abs(system.matrix).sum(axis=1)))
    denom = Mnorm * np.max(np.abs(x)) + np.max(np.abs(system.rhs))
    return float(r / denom) if denom > 0 else float(r)


def _gmres(system: GlobalSystem, config: SolverConfig):
    """Right block-Jacobi preconditioned restarted GMRES.

    Each restart cycle solves for a correction against the true residual
    ``b - M x``, so rounding in the preconditioner scales with the
    correction rather than with the solution. ``max_iterations`` counts
    inner iterations; a run whose residual has not dropped by 1% over
    ``stall_cycles`` cycles stops early.
    """
    M = system.matrix
    b = system.rhs
    P = element_block_preconditioner(system)
    MP = spla.LinearOperator(M.shape, matvec=lambda z: M @ (P @ z), dtype=float)
    bnorm = np.linalg.norm(b)
    restart = min(config.restart, config.max_iterations)
    x = np.zeros_like(b)
    r = b.copy()
    iterations, best, stalled = 0, np.inf, 0
    while iterations < config.max_iterations:
        count = [0]
        inner = min(restart, config.max_iterations - iterations)
        rtol = min(0.5, config.tolerance * bnorm / np.linalg.norm(r))
        z, _ = spla.gmres(MP, r, rtol=rtol, atol=0.0, restart=inner, maxiter=1,
                          callback=lambda _: count.__setitem__(0, count[0] + 1), callback_type="pr_norm")
        iterations += count[0]
        x = x + P @ z
        r = b - M @ x
        res = float(np.linalg.norm(r) / bnorm)
        if res <= config.tolerance or count[0] == 0:
            break
        if res < 0.99 * best:
            best, stalled = res, 0
        else:
            stalled += 1
            if stalled >= config.stall_cycles:
                break
    res = relative_residual(system, x)
    if not res <= config.tolerance:
        raise SolverError(f"GMRES stopped after {iterations} iterations with relative "
                          f"residual {res:.3e} > tolerance {config.tolerance:.1e}", residual=res)
    return x, iterations


def solve(system: GlobalSystem, config: SolverConfig | None = None) -> MomentField:
    """Solve ``a_h(u_h, v_h) = f(v_h)``.

    Residual diagnostics (relative residual, backward error and iteration
    count) are stored in ``system.info``.
    """
    config = config or SolverConfig()
    b = system.rhs
    if not np.any(b):
        system.info.update(residual=0.0, backward_error=0.0, iterations=0, method=config.method)
        return MomentField.zeros(system.disc)

    method = config.method
    if method == "auto":
        method = "direct" if system.disc.n_dofs <= DIRECT_MAX_DOFS else "iterative"
        if method == "iterative":
            try:
                x, iterations = _gmres(system, config)
            except SolverError:
                method = "direct"
            else:
                return _finish(system, x, iterations, "iterative")
    if method == "direct":
        try:
            # the pattern is structurally symmetric; minimum degree on A^T + A fills far less than COLAMD
            lu = spla.splu(sp.csc_matrix(system.matrix), permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as exc:
            raise PnDGError(f"sparse LU failed: {exc}") from exc
        x = lu.solve(b)
        # one step of iterative refinement; the eps -> 0 scaling spans many decades
        x = x + lu.solve(b - system.matrix @ x)
        iterations = 1
    else:
        x, iterations = _gmres(system, config)

    return _finish(system, x, iterations, method)


def _finish(system: GlobalSystem, x: np.ndarray, iterations: int, method: str) -> MomentField:
    res = relative_residual(system, x)
    if not np.isfinite(res):
        raise PnDGError("linear solve produced non-finite values")
    system.info.update(residual=res, backward_error=backward_error(system, x),
                       iterations=iterations, method=method)
    return MomentField(system.disc, x)
