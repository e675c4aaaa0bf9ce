"""
Convergence studies: h-refinement tables with EOCs, eps sweeps, N sweeps.

Each (eps, mesh) cell is independent. Cells may run on a thread pool, but
results are always collected in configuration order so reports do not
depend on scheduling.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .assembly import MaterialField, MomentField, assemble, error_norms
from .basis import LocalBasis
from .errors import ConfigurationError, InputError, PnDGError, SolverError
from .geometry import build_mesh
from .harmonics import MomentBasis, check_material_assumptions, moment_matrices
from .reference import (FourierForcing, ReferenceSolution, kinetic_fourier_solve, manufactured_forcing,
                        pn_fourier_solve)
from .solver import SolverConfig, solve

ORACLES = ("pn-fourier", "kinetic", "manufactured")
FORCINGS = ("isotropic", "all-moments")
NORMS = ("l2", "q", "triple")


@dataclass(frozen=True)
class StudyConfig:
    """One convergence study.

    ``cells`` is the mesh sequence (cells per axis, so ``h = 1/cells``).
    Constant cross sections ``sigma_t``/``sigma_a`` are used by the Fourier
    oracles; the manufactured oracle additionally perturbs them by
    ``material_variation`` times a smooth periodic profile. ``forcing``
    selects an isotropic source (first moment only) or a source that drives
    every moment; its spatial profile is ``amplitude * cos(2 pi wave.x)``.
    """

    d: int = 1
    N: int = 3
    k: int = 1
    cells: tuple = (8, 16, 32, 64)
    eps: tuple = (1.0,)
    sigma_t: float = 2.0
    sigma_a: float = 1.0
    material_variation: float = 0.0
    forcing: str = "isotropic"
    wave: tuple | None = None
    amplitude: float = 1.0
    oracle: str = "pn-fourier"
    norms: tuple = NORMS
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(method="auto"))
    error_quadrature: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in np.atleast_1d(self.cells)))
        object.__setattr__(self, "eps", tuple(float(e) for e in np.atleast_1d(self.eps)))
        object.__setattr__(self, "norms", tuple(self.norms))
        if self.wave is None:
            object.__setattr__(self, "wave", (1,) * self.d)
        object.__setattr__(self, "wave", tuple(int(c) for c in np.atleast_1d(self.wave)))
        self.validate()

    def validate(self):
        if self.d not in (1, 2):
            raise ConfigurationError(f"d must be 1 or 2, got {self.d}")
        if self.N < 0 or self.k < 0:
            raise ConfigurationError("N and k must be nonnegative")
        if not self.cells or any(c < 1 for c in self.cells):
            raise ConfigurationError(f"mesh sequence must hold positive cell counts, got {self.cells}")
        if any(b <= a for a, b in zip(self.cells, self.cells[1:])):
            raise ConfigurationError(f"mesh sequence must be strictly refining, got {self.cells}")
        if not self.eps:
            raise ConfigurationError("eps list is empty")
        for e in self.eps:
            if not 0.0 < e <= 1.0:
                raise ConfigurationError(f"eps values must lie in (0, 1], got {e}")
        if self.oracle not in ORACLES:
            raise ConfigurationError(f"oracle must be one of {ORACLES}, got {self.oracle!r}")
        if self.forcing not in FORCINGS:
            raise ConfigurationError(f"forcing must be one of {FORCINGS}, got {self.forcing!r}")
        if self.oracle == "kinetic" and self.forcing != "isotropic":
            raise ConfigurationError("the kinetic oracle needs an isotropic source")
        if self.material_variation and self.oracle != "manufactured":
            raise ConfigurationError("variable materials are only supported with the manufactured oracle")
        if len(self.wave) != self.d:
            raise ConfigurationError(f"wave vector {self.wave} does not have {self.d} components")
        if not all(n in NORMS for n in self.norms):
            raise ConfigurationError(f"norms must be drawn from {NORMS}, got {self.norms}")
        if not 0.0 <= self.material_variation < 1.0:
            raise ConfigurationError("material_variation must lie in [0, 1)")
        for e in self.eps:
            lo = 1.0 - self.material_variation
            hi = 1.0 + self.material_variation
            # worst case over the perturbation profile
            check_material_assumptions(self.sigma_t * lo, self.sigma_a * hi, e)
            check_material_assumptions(self.sigma_t * lo, self.sigma_a * lo, e)

    def with_(self, **changes) -> "StudyConfig":
        return replace(self, **changes)


@dataclass
class CellResult:
    """Outcome of one (eps, mesh) run."""

    eps: float
    cells: int
    h: float
    errors: dict
    wall_s: float
    status: str = "ok"
    solver: dict = field(default_factory=dict)
    message: str = ""


@dataclass
class ErrorReport:
    """Errors per (h, eps) cell and EOCs per adjacent mesh pair."""

    config: StudyConfig
    results: list

    def cell(self, eps: float, cells: int) -> CellResult:
        for r in self.results:
            if r.eps == eps and r.cells == cells:
                return r
        raise KeyError((eps, cells))

    def errors(self, eps: float, norm: str = "l2") -> np.ndarray:
        return np.array([self.cell(eps, c).errors.get(norm, np.nan) for c in self.config.cells])

    def h(self) -> np.ndarray:
        return 1.0 / np.asarray(self.config.cells, dtype=float)

    def eoc(self, eps: float, norm: str = "l2") -> np.ndarray:
        if len(self.config.cells) < 2:
            return np.array([])
        return eoc(self.h(), self.errors(eps, norm))

    def terminal_eoc(self, eps: float, norm: str = "l2") -> float:
        rates = self.eoc(eps, norm)
        return float(rates[-1]) if rates.size else math.nan

    def rows(self) -> list[dict]:
        """Flat records in configuration order; ``eoc_<norm>`` refers to the previous mesh."""
        out = []
        for e in self.config.eps:
            rates = {n: self.eoc(e, n) for n in self.config.norms}
            for i, c in enumerate(self.config.cells):
                r = self.cell(e, c)
                row = dict(d=self.config.d, N=self.config.N, k=self.config.k, eps=e, h=r.h, cells=c,
                           status=r.status, wall_s=r.wall_s)
                for n in NORMS:
                    row[f"err_{n}"] = r.errors.get(n, math.nan)
                    row[f"eoc_{n}"] = rates[n][i - 1] if (n in rates and i > 0) else math.nan
                out.append(row)
        return out


def eoc(h_list, e_list) -> np.ndarray:
    """Rates ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})``; NaN wherever an error is not positive."""
    h = np.asarray(h_list, dtype=float)
    e = np.asarray(e_list, dtype=float)
    if h.shape != e.shape or h.ndim != 1 or h.size < 2:
        raise InputError("eoc needs two sequences of equal length >= 2")
    if np.any(h <= 0):
        raise InputError("mesh sizes must be positive")
    rates = np.full(h.size - 1, np.nan)
    ok = (e[:-1] > 0) & (e[1:] > 0) & np.isfinite(e[:-1]) & np.isfinite(e[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    rates[ok] = r[ok]
    return rates


# ----------------------------------------------------------------------------- problem setup


def source_profile(config: StudyConfig, L: int) -> FourierForcing:
    """Moment forcing ``<m f>`` for the configured source."""
    if config.forcing == "isotropic":
        scalar = FourierForcing.cosine(config.d, config.wave, [config.amplitude])
        return scalar.isotropic_moments(L)
    amps = config.amplitude / (1.0 + np.arange(L))
    return FourierForcing.cosine(config.d, config.wave, amps)


def _variable_materials(config: StudyConfig, eps: float) -> MaterialField:
    a = config.material_variation
    st, sa = config.sigma_t, config.sigma_a

    def profile(x, phase):
        x = np.atleast_2d(x)
        return np.prod(np.sin(2.0 * np.pi * x + phase), axis=1)

    return MaterialField(lambda x: st * (1.0 + a * profile(x, 0.3)),
                         lambda x: sa * (1.0 + a * profile(x, 1.1)), eps)


def _manufactured_solution(config: StudyConfig, L: int):
    """Smooth periodic field with an independent phase in every moment."""
    wave = np.asarray(config.wave, dtype=float)
    phase = 2.0 * np.pi * np.arange(L) / max(L, 1)
    amp = config.amplitude / (1.0 + np.arange(L))

    def u(x):
        arg = 2.0 * np.pi * (np.atleast_2d(x) @ wave)
        return amp * np.sin(arg[:, None] + phase)

    def grad(x):
        arg = 2.0 * np.pi * (np.atleast_2d(x) @ wave)
        dcos = amp * np.cos(arg[:, None] + phase)
        return 2.0 * np.pi * wave[None, :, None] * dcos[:, None, :]

    return u, grad


def build_problem(config: StudyConfig, eps: float, matrices=None):
    """Materials, moment forcing and exact solution for one eps value."""
    matrices = matrices or moment_matrices(MomentBasis(config.N))
    L = matrices.L
    if config.oracle == "manufactured":
        materials = _variable_materials(config, eps) if config.material_variation else \
            MaterialField(config.sigma_t, config.sigma_a, eps)
        u, grad = _manufactured_solution(config, L)
        forcing = manufactured_forcing(u, grad, materials, matrices, config.d)
        return materials, forcing, u
    materials = MaterialField(config.sigma_t, config.sigma_a, eps)
    forcing = source_profile(config, L)
    if config.oracle == "pn-fourier":
        exact = pn_fourier_solve(config.N, eps, config.sigma_t, config.sigma_a, forcing, matrices)
    else:
        scalar = FourierForcing.cosine(config.d, config.wave, [config.amplitude])
        exact = kinetic_fourier_solve(eps, config.sigma_t, config.sigma_a, scalar).moments(config.N)
    return materials, forcing, exact


def _annotate(exc: PnDGError, eps: float, cells: int) -> PnDGError:
    msg = f"[h=1/{cells}, eps={eps:g}] {exc}"
    if isinstance(exc, SolverError):
        return SolverError(msg, residual=exc.residual)
    return type(exc)(msg)


def _run_cell(config: StudyConfig, eps: float, cells: int, matrices) -> tuple[CellResult, MomentField]:
    t0 = time.perf_counter()
    try:
        materials, forcing, exact = build_problem(config, eps, matrices)
        mesh = build_mesh(config.d, cells)
        system = assemble(mesh, LocalBasis(config.k, config.d), matrices, materials, forcing)
        uh = solve(system, config.solver)
        errs = error_norms(uh, exact, materials, config.error_quadrature)
    except PnDGError as exc:
        raise _annotate(exc, eps, cells) from exc
    errs = {n: errs[n] for n in config.norms}
    wall = time.perf_counter() - t0
    return CellResult(eps, cells, 1.0 / cells, errs, wall, solver=dict(system.info)), uh


def run_convergence(config: StudyConfig, workers: int = 1) -> ErrorReport:
    """Assemble, solve and measure errors for every (eps, mesh) pair.

    ``workers > 1`` runs cells on a thread pool; the report order is fixed
    by the configuration either way.
    """
    matrices = moment_matrices(MomentBasis(config.N))
    tasks = [(e, c) for e in config.eps for c in config.cells]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _run_cell(config, t[0], t[1], matrices)[0], tasks))
    else:
        results = [_run_cell(config, e, c, matrices)[0] for e, c in tasks]
    return ErrorReport(config, results)


def solve_single(config: StudyConfig, eps: float | None = None, cells: int | None = None):
    """One run on the finest (or given) mesh: ``(CellResult, MomentField)``."""
    eps = config.eps[0] if eps is None else eps
    cells = config.cells[-1] if cells is None else cells
    return _run_cell(config, eps, cells, moment_matrices(MomentBasis(config.N)))


# ----------------------------------------------------------------------------- sweeps


@dataclass
class NSweepReport:
    """Kinetic-vs-P_N oracle distances per N at one eps."""

    eps: float
    N_list: tuple
    total: np.ndarray
    moments: np.ndarray

    def rows(self) -> list[dict]:
        return [dict(N=n, eps=self.eps, err_total=t, err_moments=m)
                for n, t, m in zip(self.N_list, self.total, self.moments)]


def run_n_sweep(config: StudyConfig, N_list=(1, 3, 5, 7), eps: float | None = None,
                quadrature=None) -> NSweepReport:
    """Closure error of the exact P_N solution against the exact kinetic one.

    ``total`` is ``||u - m^T u_N||`` in ``L^2(X x S)``, ``moments`` the
    distance of the first ``(N+1)^2`` moments. Both are evaluated per Fourier
    mode without any spatial discretization.
    """
    if config.material_variation:
        raise ConfigurationError("the N sweep needs constant cross sections")
    if config.forcing != "isotropic":
        raise ConfigurationError("the N sweep needs an isotropic source")
    N_list = tuple(int(n) for n in N_list)
    if not N_list or any(n < 0 for n in N_list):
        raise ConfigurationError(f"invalid N list {N_list}")
    eps = config.eps[0] if eps is None else float(eps)
    scalar = FourierForcing.cosine(config.d, config.wave, [config.amplitude])
    kin = kinetic_fourier_solve(eps, config.sigma_t, config.sigma_a, scalar, quadrature)
    total, mom = [], []
    for N in N_list:
        matrices = moment_matrices(MomentBasis(N))
        pn = pn_fourier_solve(N, eps, config.sigma_t, config.sigma_a, scalar.isotropic_moments(matrices.L),
                              matrices)
        err = kin.pn_error(pn, N)
        total.append(err["total"])
        mom.append(err["moments"])
    return NSweepReport(eps, N_list, np.array(total), np.array(mom))


def moment_scaling(config: StudyConfig, eps_list=(1.0, 1e-1, 1e-2, 1e-3), cells: int | None = None) -> dict:
    """``max_{p>=1} ||u_p|| / eps`` per eps for the oracle and, if ``cells`` is given, the DG solution.

    The first moment is ``p = 0`` here, so ``p >= 1`` are the higher moments.
    Returns ``{"eps": ..., "oracle": ..., "dg": ...}`` arrays.
    """
    if config.oracle == "manufactured":
        raise ConfigurationError("moment scaling needs an eps-independent source (Fourier oracle)")
    matrices = moment_matrices(MomentBasis(config.N))
    L = matrices.L
    if L < 2:
        raise ConfigurationError("moment scaling needs N >= 1")
    oracle_vals, dg_vals = [], []
    for e in eps_list:
        _, forcing, exact = build_problem(config, e, matrices)
        oracle_vals.append(_component_norms(exact)[1:].max() / e)
        if cells is not None:
            _, uh = _run_cell(config, e, cells, matrices)
            dg = np.sqrt(np.sum(uh.coeffs**2, axis=(0, 2)))
            dg_vals.append(dg[1:].max() / e)
    out = {"eps": np.asarray(eps_list, dtype=float), "oracle": np.array(oracle_vals)}
    if cells is not None:
        out["dg"] = np.array(dg_vals)
    return out


def _component_norms(ref) -> np.ndarray:
    if isinstance(ref, ReferenceSolution):
        return ref.component_norms()
    raise ConfigurationError("component norms need a Fourier reference solution")


def eps_sweep(config: StudyConfig, eps_list=(1.0, 1e-2, 1e-4, 1e-6), cells: int | None = None,
              workers: int = 1) -> ErrorReport:
    """Error at a fixed mesh across eps (defaults to the finest configured mesh)."""
    cells = config.cells[-1] if cells is None else cells
    return run_convergence(replace(config, eps=tuple(eps_list), cells=(cells,)), workers=workers)
