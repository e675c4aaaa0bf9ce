"""Direct and iterative solves."""
import numpy as np
import pytest

from pndg.assembly import MaterialField, assemble
from pndg.basis import LocalBasis
from pndg.errors import InputError, SolverError
from pndg.geometry import build_mesh
from pndg.harmonics import MomentBasis, moment_matrices
from pndg.reference import FourierForcing
from pndg.solver import SolverConfig, backward_error, relative_residual, solve


def system(d=1, n=16, N=3, k=1, eps=1.0, forcing=None):
    mm = moment_matrices(MomentBasis(N))
    if forcing is None:
        forcing = FourierForcing.cosine(d, (1,) * d, [1.0]).isotropic_moments(mm.L)
    return assemble(build_mesh(d, n), LocalBasis(k, d), mm, MaterialField(2.0, 1.0, eps), forcing)


@pytest.mark.parametrize("method", ["direct", "iterative", "auto"])
def test_zero_rhs_gives_zero(method):
    S = system(forcing=FourierForcing.zero(1, 16))
    u = solve(S, SolverConfig(method))
    assert not np.any(u.flat)
    assert S.info["residual"] == 0.0


def test_single_dof():
    mm = moment_matrices(MomentBasis(0))
    S = assemble(build_mesh(1, 1), LocalBasis(0, 1), mm, MaterialField(2.0, 0.5, 0.3),
                 FourierForcing(1, {(0,): [1.5]}))
    assert S.matrix.shape == (1, 1)
    u = solve(S)
    assert u.flat[0] == pytest.approx(1.5 / 0.5, rel=1e-14)


@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-4])
@pytest.mark.parametrize("n", [8, 32])
@pytest.mark.parametrize("k", [1, 2])
def test_direct_and_iterative_agree(eps, n, k):
    S = system(n=n, k=k, eps=eps)
    ud = solve(S, SolverConfig("direct")).flat
    ui = solve(S, SolverConfig("iterative")).flat
    assert S.info["method"] == "iterative"
    assert S.info["residual"] <= 1e-10
    assert np.max(np.abs(ud - ui)) <= 1e-8 * max(1.0, np.max(np.abs(ud)))


def test_iterative_2d_agrees():
    S = system(d=2, n=8, N=1, k=1, eps=1e-2)
    ud = solve(S, SolverConfig("direct")).flat
    ui = solve(S, SolverConfig("iterative")).flat
    assert np.max(np.abs(ud - ui)) <= 1e-8 * np.max(np.abs(ud))


def test_small_eps_residual_floor():
    # the plain relative residual cannot reach 1e-10 at eps=1e-6 in double precision
    S = system(n=32, k=1, eps=1e-6)
    ud = solve(S, SolverConfig("direct")).flat
    assert S.info["residual"] > 1e-11
    assert S.info["backward_error"] < 1e-14
    with pytest.raises(SolverError) as info:
        solve(S, SolverConfig("iterative"))
    assert info.value.residual > 1e-10
    ui = solve(S, SolverConfig("iterative", tolerance=1e-8)).flat
    assert np.max(np.abs(ud - ui)) <= 1e-8 * np.max(np.abs(ud))


def test_iteration_budget_exhausted():
    S = system(n=32, k=2, eps=1e-2)
    with pytest.raises(SolverError, match="after 1 iterations"):
        solve(S, SolverConfig("iterative", max_iterations=1))


def test_residual_helpers():
    S = system(n=8)
    u = solve(S).flat
    assert relative_residual(S, u) <= 1e-13
    assert backward_error(S, u) <= 1e-15
    assert relative_residual(S, np.zeros_like(u)) == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs", [dict(method="cg"), dict(tolerance=0.0), dict(tolerance=1.0),
                                    dict(max_iterations=0), dict(restart=0), dict(stall_cycles=0)])
def test_invalid_config(kwargs):
    with pytest.raises(InputError):
        SolverConfig(**kwargs)
