"""
Direct and iterative solves
===========================

Sparse LU and block-Jacobi preconditioned GMRES on the assembled system,
and what happens to the residual deep in the diffusive regime.
"""
import numpy as np

from pndg import FourierForcing, LocalBasis, MaterialField, MomentBasis, SolverConfig, assemble, build_mesh, \
    moment_matrices, solve
from pndg.errors import SolverError

mm = moment_matrices(MomentBasis(3))
source = FourierForcing.cosine(1, 1, [1.0]).isotropic_moments(mm.L)


def system(eps, cells=32, k=2):
    return assemble(build_mesh(1, cells), LocalBasis(k, 1), mm, MaterialField(2.0, 1.0, eps), source)


for eps in (1.0, 1e-2, 1e-4):
    S = system(eps)
    ud = solve(S, SolverConfig("direct")).flat
    ui = solve(S, SolverConfig("iterative")).flat
    print(f"eps={eps:g}: GMRES iterations {S.info['iterations']}, residual {S.info['residual']:.1e}, "
          f"max difference to LU {np.max(np.abs(ud - ui)):.1e}")

# %% eps = 1e-6: the relative residual has a rounding floor of about 1e-16/eps
S = system(1e-6)
solve(S, SolverConfig("direct"))
print(f"LU: relative residual {S.info['residual']:.1e}, backward error {S.info['backward_error']:.1e}")
try:
    solve(S, SolverConfig("iterative"))
except SolverError as exc:
    print("GMRES at tolerance 1e-10:", exc)
solve(S, SolverConfig("iterative", tolerance=1e-8))
print(f"GMRES at tolerance 1e-8: {S.info['iterations']} iterations")
