"""Property-based checks of structural invariants."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pndg.assembly import MaterialField, MomentField, assemble, numerical_flux, triple_norm
from pndg.basis import LocalBasis, legendre_to_poly, radau_project
from pndg.geometry import build_mesh
from pndg.harmonics import MomentBasis, eval_basis, moment_matrices
from pndg.study import eoc

SETTINGS = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
_MM = {N: moment_matrices(MomentBasis(N)) for N in range(6)}

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def unit_vectors():
    return arrays(np.float64, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1).map(
        lambda v: v / np.linalg.norm(v))


@SETTINGS
@given(N=st.integers(0, 5), omega=unit_vectors())
def test_transport_recursion_at_any_direction(N, omega):
    mm = _MM[N]
    m = eval_basis(omega[None, :], mm.basis)[0]
    keep = mm.basis.degrees < N
    for i in range(3):
        assert np.allclose((omega[i] * m)[keep], (mm.A[i] @ m)[keep], atol=1e-12)


@SETTINGS
@given(N=st.integers(0, 5), i=st.integers(0, 2), data=st.data())
def test_abs_matrix_dominates(N, i, data):
    mm = _MM[N]
    v = data.draw(arrays(np.float64, mm.L, elements=finite))
    # |v^T A v| <= v^T |A| v and |A| is positive semidefinite
    assert abs(v @ mm.A[i] @ v) <= v @ mm.absA[i] @ v + 1e-10 * (1 + v @ v)


@SETTINGS
@given(N=st.integers(0, 4), seed=st.integers(0, 2**32 - 1), axis=st.integers(0, 1))
def test_flux_antisymmetry(N, seed, axis):
    mm = _MM[N]
    um, up = np.random.default_rng(seed).standard_normal((2, mm.L))
    n = np.zeros(3)
    n[axis] = 1.0
    assert np.allclose(numerical_flux(um, up, n, mm), -numerical_flux(up, um, -n, mm), atol=1e-13)


@SETTINGS
@given(d=st.integers(1, 2), cells=st.integers(1, 6), axis=st.integers(0, 1), step=st.integers(-7, 7))
def test_mesh_shift_is_invertible(d, cells, axis, step):
    mesh = build_mesh(d, cells)
    axis = axis % d
    fwd = mesh.shift(axis, step)
    assert np.array_equal(mesh.shift(axis, -step)[fwd], np.arange(mesh.n_elements))
    for e in range(mesh.n_elements):
        for f in range(2 * d):
            other, g = mesh.neighbor(e, f)
            assert mesh.neighbor(other, g) == (e, f)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(1, 2), N=st.integers(0, 3), k=st.integers(0, 2), log_eps=st.floats(-6, 0),
       seed=st.integers(0, 2**32 - 1))
def test_stability_identity(d, N, k, log_eps, seed):
    eps = 10.0**log_eps
    mat = MaterialField(2.0, 1.0, eps)
    S = assemble(build_mesh(d, 2 if d == 2 else 3), LocalBasis(k, d), _MM[N], mat, None)
    v = MomentField(S.disc, np.random.default_rng(seed).standard_normal(S.disc.n_dofs))
    t = triple_norm(v, mat) ** 2
    assert abs(S.bilinear(v, v) - t) <= 1e-9 * t


@SETTINGS
@given(k=st.integers(1, 4), coeffs=arrays(np.float64, 5, elements=finite),
       outflow=st.sampled_from(["left", "right"]), a=st.floats(-2, 0), w=st.floats(0.1, 3))
def test_radau_reproduces_polynomials(k, coeffs, outflow, a, w):
    p = np.polynomial.Polynomial(coeffs[: k + 1])
    interval = (a, a + w)
    q = legendre_to_poly(radau_project(p, k, outflow, interval), interval)
    xs = np.linspace(*interval, 7)
    assert np.allclose(q(xs), p(xs), atol=1e-9 * (1 + np.abs(coeffs).sum()))


@SETTINGS
@given(rate=st.floats(0.5, 5), c=st.floats(1e-3, 1e3), n=st.integers(2, 6))
def test_eoc_recovers_power_law(rate, c, n):
    h = 2.0 ** -np.arange(n)
    assert np.allclose(eoc(h, c * h**rate), rate, rtol=1e-9)
