"""
Fourier reference solutions
===========================

On the periodic unit interval with constant cross sections both the moment
system and the full kinetic equation can be solved mode by mode. These are
the oracles used in the convergence studies.
"""
import numpy as np

from pndg import FourierForcing, kinetic_fourier_solve, pn_fourier_solve

sigma_t, sigma_a = 2.0, 1.0

# An isotropic source cos(2 pi x) drives only the first moment.
source = FourierForcing.cosine(1, 1, [1.0])

# %% Moment solution for several scalings
for eps in (1.0, 1e-2, 1e-4):
    u = pn_fourier_solve(3, eps, sigma_t, sigma_a, source.isotropic_moments(16))
    norms = u.component_norms()
    print(f"eps={eps:g}: |u_0|={norms[0]:.4f}  max higher moment / eps = {norms[1:].max() / eps:.4f}")

# The higher moments shrink in proportion to eps: the solution becomes isotropic.

# %% Kinetic solution and the closure error of the truncated expansion
kin = kinetic_fourier_solve(1.0, sigma_t, sigma_a, source)
for N in (1, 3, 5, 7):
    pn = pn_fourier_solve(N, 1.0, sigma_t, sigma_a, source.isotropic_moments((N + 1) ** 2))
    err = kin.pn_error(pn, N)
    print(f"N={N}: kinetic minus P_N, L2 over space and angle = {err['total']:.3e}")

# %% Pointwise evaluation
x = np.linspace(0, 1, 5)[:, None]
u = pn_fourier_solve(1, 0.5, sigma_t, sigma_a, source.isotropic_moments(4))
print("first moment at x = 0, 1/4, ...:", np.round(u(x)[:, 0], 5))
