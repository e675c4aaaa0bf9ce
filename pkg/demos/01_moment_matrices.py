"""
Moment matrices of the spherical-harmonic expansion
====================================================

Real spherical harmonics up to degree N, and the matrices <omega_i m m^T>
that couple them in the moment system.
"""
import numpy as np

from pndg import MomentBasis, eval_basis, moment_matrices

# A P_3 expansion carries (3+1)^2 = 16 moments, indexed l^2 + l + kappa.
basis = MomentBasis(3)
mm = moment_matrices(basis)
print("L =", mm.L)
print("degree of each moment:", basis.degrees)

# Each A^(i) is symmetric and only couples neighbouring degrees.
A3 = mm.A[2]
print("symmetric:", np.allclose(A3, A3.T))
coupled = np.argwhere(A3 != 0)
print("degree gaps present:", sorted({int(abs(basis.degrees[i] - basis.degrees[j])) for i, j in coupled}))

# Eigenvalues lie in [-1, 1]: they are the characteristic speeds of the system.
print("eigenvalues of A^(3):", np.round(mm.eigvals[2], 4))

# Multiplying the basis by a direction component stays within the expansion
# except for the top degree, which leaks into degree N+1.
rng = np.random.default_rng(0)
omega = rng.standard_normal((5, 3))
omega /= np.linalg.norm(omega, axis=1, keepdims=True)
m = eval_basis(omega, basis)
keep = basis.degrees < basis.N
print("recursion residual below top degree:",
      np.max(np.abs(omega[:, 2:3] * m[:, keep] - (m @ A3)[:, keep])))

# |A| from the eigendecomposition is what the upwind flux uses.
print("|A| - A is positive semidefinite:", np.linalg.eigvalsh(mm.absA[2] - A3).min() > -1e-12)
