"""
The Radau projection
====================

The elementwise projection that matches the outflow value and is
orthogonal to lower-degree polynomials, used in the error analysis of
upwind schemes.
"""
import numpy as np

from pndg.basis import gauss_legendre, legendre_to_poly, radau_project

f = lambda x: np.sin(2 * np.pi * x)  # noqa: E731

# On one element: exact at the right end point.
p = legendre_to_poly(radau_project(f, 2, "right", (0.0, 0.3)), (0.0, 0.3))
print("outflow value:", p(0.3), "vs", f(0.3))

# Polynomials of degree <= k are reproduced.
cubic = np.polynomial.Polynomial([1.0, -2.0, 0.5, 3.0])
q = legendre_to_poly(radau_project(cubic, 3, "left", (-1, 2)), (-1, 2))
print("reproduction error:", np.max(np.abs((q - cubic).coef)))


# %% Global L2 error under refinement
def l2_error(k, cells):
    x, w = gauss_legendre(k + 12)
    total = 0.0
    for c in range(cells):
        a, b = c / cells, (c + 1) / cells
        p = legendre_to_poly(radau_project(f, k, "right", (a, b)), (a, b))
        xs = a + 0.5 * (x + 1) * (b - a)
        total += 0.5 * (b - a) * np.sum(w * (f(xs) - p(xs)) ** 2)
    return np.sqrt(total)


cells = np.array([4, 8, 16, 32, 64])
for k in (1, 2, 3):
    errs = np.array([l2_error(k, n) for n in cells])
    slope = np.polyfit(np.log(1 / cells), np.log(errs), 1)[0]
    print(f"k={k}: slope {slope:.3f}")
