"""
Mesh convergence in slab geometry, uniformly in eps
===================================================

Errors of the upwind DG discretization against the exact moment solution,
for linear and quadratic elements, from the transport regime (eps = 1)
down to the diffusive regime (eps = 1e-6).
"""
from pndg import StudyConfig, run_convergence

for k in (1, 2):
    cfg = StudyConfig(d=1, N=3, k=k, cells=(8, 16, 32, 64), eps=(1.0, 1e-2, 1e-6))
    report = run_convergence(cfg)
    print(f"\nk = {k}")
    print(f"{'eps':>8} {'h':>8} {'L2 error':>12} {'EOC':>6}")
    for row in report.rows():
        print(f"{row['eps']:>8g} {row['h']:>8.4f} {row['err_l2']:>12.4e} {row['eoc_l2']:>6.2f}")

# The rate is k+1 at every eps and the error does not grow as eps -> 0.

# %% Piecewise constants lose accuracy as eps decreases
cfg = StudyConfig(d=1, N=3, k=0, cells=(32,), eps=(1e-1, 1e-2, 1e-3))
report = run_convergence(cfg)
for e in cfg.eps:
    print(f"k=0, h=1/32, eps={e:g}: L2 error {report.errors(e)[0]:.3e}")
