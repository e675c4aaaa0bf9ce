"""Fourier reference solutions and manufactured forcing."""
import numpy as np
import pytest

from pndg.assembly import MaterialField
from pndg.errors import ConfigurationError, InputError
from pndg.harmonics import MomentBasis, eval_basis, moment_matrices, sphere_quadrature
from pndg.reference import (FourierForcing, kinetic_fourier_solve, manufactured_forcing, pn_fourier_solve,
                            strong_residual)


def unit(L, p, value=1.0):
    v = np.zeros(L)
    v[p] = value
    return v


def test_forcing_conjugate_symmetry_enforced():
    with pytest.raises(InputError):
        FourierForcing(1, {(1,): [1.0 + 1j]})
    f = FourierForcing(1, {(1,): [1.0 + 1j], (-1,): [1.0 - 1j]})
    x = np.linspace(0, 1, 7)[:, None]
    expected = 2 * (np.cos(2 * np.pi * x[:, 0]) - np.sin(2 * np.pi * x[:, 0]))
    assert np.allclose(f(x)[:, 0], expected, atol=1e-14)
    with pytest.raises(InputError):
        FourierForcing(1, {(0,): [1.0], (1,): [0.5, 0.5], (-1,): [0.5, 0.5]})


def test_constant_mode_first_moment():
    N, eps, st, sa = 2, 0.3, 2.0, 0.5
    L = (N + 1) ** 2
    f = FourierForcing(1, {(0,): unit(L, 0, 1.7)})
    u = pn_fourier_solve(N, eps, st, sa, f)
    assert np.allclose(u.modes[(0,)], unit(L, 0, 1.7 / sa), atol=1e-15)


def test_constant_mode_second_moment_scales_like_eps_squared():
    N, eps, st, sa = 1, 1e-2, 2.0, 0.5
    f = FourierForcing(1, {(0,): unit(4, 1, 3.0)})
    u = pn_fourier_solve(N, eps, st, sa, f)
    assert u.modes[(0,)][1].real == pytest.approx(eps**2 * 3.0 / st, rel=1e-14)


def test_zero_forcing_zero_solution():
    u = pn_fourier_solve(3, 0.5, 2.0, 1.0, FourierForcing.zero(2, 16))
    assert u.mode_norm() == 0.0


@pytest.mark.parametrize("d", [1, 2])
def test_strong_residual(d):
    N, eps = 3, 0.1
    mm = moment_matrices(MomentBasis(N))
    rng = np.random.default_rng(d)
    modes = {}
    for kap in ([(1,), (2,)] if d == 1 else [(1, 0), (1, -2)]):
        v = rng.standard_normal(mm.L) + 1j * rng.standard_normal(mm.L)
        modes[kap] = v
        modes[tuple(-c for c in kap)] = np.conj(v)
    f = FourierForcing(d, modes)
    u = pn_fourier_solve(N, eps, 2.0, 1.0, f, mm)
    x = rng.random((100, d))
    r = strong_residual(u, f, mm, MaterialField(2.0, 1.0, eps), x)
    assert np.max(np.abs(r)) <= 1e-10


def test_pn_solve_rejects_bad_input():
    f = FourierForcing.zero(1, 4)
    with pytest.raises(InputError):
        pn_fourier_solve(2, 0.5, 2.0, 1.0, f)
    with pytest.raises(ConfigurationError):
        pn_fourier_solve(1, 0.5, 1.0, 1.0, f)


def test_kinetic_constant_mode():
    src = FourierForcing(1, {(0,): [2.0]})
    kin = kinetic_fourier_solve(0.4, 2.0, 0.5, src)
    assert kin.scalar_modes[(0,)] == pytest.approx(2.0 / 0.5, rel=1e-14)
    om = np.array([[0, 0, 1.0], [1.0, 0, 0]])
    assert np.allclose(kin(np.zeros((2, 1)), om), 4.0, rtol=1e-14)


def test_kinetic_closed_form_1d():
    # slab geometry: <1/(s + i k mu)>/(4 pi) = arctan(k/s)/k
    eps, st, sa = 0.5, 2.0, 1.0
    src = FourierForcing.cosine(1, 1, [1.0])
    kin = kinetic_fourier_solve(eps, st, sa, src)
    s, k = st / eps, 2 * np.pi
    c = s - eps * sa
    G = np.arctan(k / s) / k
    ubar = eps * 0.5 * G / (1 - c * G)
    assert kin.scalar_modes[(1,)] == pytest.approx(ubar, rel=1e-13)


def test_kinetic_zero_source():
    kin = kinetic_fourier_solve(0.5, 2.0, 1.0, FourierForcing.zero(1, 1))
    assert kin.moments(3).mode_norm() == 0.0


def test_kinetic_isotropizes_as_eps_decreases():
    src = FourierForcing.cosine(1, 1, [1.0])
    spread = []
    for eps in (1e-1, 1e-2, 1e-3):
        kin = kinetic_fourier_solve(eps, 2.0, 1.0, src)
        u = kin.angular_mode((1,))
        spread.append(np.max(np.abs(u - kin.scalar_modes[(1,)])))
    assert spread[0] > spread[1] > spread[2]


def test_kinetic_moments_match_pn_for_large_N():
    src = FourierForcing.cosine(2, (1, 1), [1.0])
    errs = []
    for N in (3, 7, 11):
        kin = kinetic_fourier_solve(0.5, 2.0, 1.0, src)
        pn = pn_fourier_solve(N, 0.5, 2.0, 1.0, src.isotropic_moments((N + 1) ** 2))
        errs.append(kin.pn_error(pn, N)["moments"])
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < errs[0] / 10


def test_kinetic_accurate_in_diffusive_regime():
    # deep in the diffusive regime the P_1 and kinetic scalar fluxes agree to O(eps^2)
    eps = 1e-6
    src = FourierForcing.cosine(1, 1, [1.0])
    kin = kinetic_fourier_solve(eps, 2.0, 1.0, src)
    pn = pn_fourier_solve(1, eps, 2.0, 1.0, src.isotropic_moments(4))
    assert kin.pn_error(pn, 1)["moments"] <= 1e-10 * pn.mode_norm()


def test_kinetic_rejects_anisotropic_source():
    with pytest.raises(InputError):
        kinetic_fourier_solve(0.5, 2.0, 1.0, FourierForcing.zero(1, 4))


def test_kinetic_pn_error_total_uses_reconstruction():
    src = FourierForcing.cosine(1, 2, [1.0])
    kin = kinetic_fourier_solve(0.5, 2.0, 1.0, src, sphere_quadrature(0, n_mu=64, n_phi=8))
    pn = pn_fourier_solve(5, 0.5, 2.0, 1.0, src.isotropic_moments(36))
    e = kin.pn_error(pn, 5)
    assert e["total"] >= e["moments"] * (1 - 1e-12)


def test_manufactured_zero_and_constant():
    mm = moment_matrices(MomentBasis(1))
    mat = MaterialField(2.0, 0.5, 0.25)
    f = manufactured_forcing(lambda x: np.zeros((len(x), 4)), lambda x: np.zeros((len(x), 1, 4)), mat, mm, 1)
    assert not np.any(f(np.random.default_rng(0).random((5, 1))))
    c = np.array([1.0, 2.0, -1.0, 0.5])
    f = manufactured_forcing(lambda x: np.tile(c, (len(x), 1)), lambda x: np.zeros((len(x), 1, 4)), mat, mm, 1)
    expected = np.concatenate([[0.5 * c[0]], (2.0 / 0.25**2) * c[1:]])
    assert np.allclose(f(np.array([[0.3]]))[0], expected, rtol=1e-14)


def test_manufactured_slab_sine_coupling():
    mm = moment_matrices(MomentBasis(1))
    eps = 0.5
    mat = MaterialField(2.0, 1.0, eps)
    u = lambda x: np.stack([np.sin(2 * np.pi * x[:, 0])] + [0 * x[:, 0]] * 3, 1)  # noqa: E731
    g = lambda x: np.stack([2 * np.pi * np.cos(2 * np.pi * x[:, 0])] + [0 * x[:, 0]] * 3, 1)[:, None, :]  # noqa: E731
    f = manufactured_forcing(u, g, mat, mm, 1)
    x = np.array([[0.1], [0.35]])
    p = mm.basis.index(1, 0)
    assert np.allclose(f(x)[:, p], (2 * np.pi / eps) / np.sqrt(3) * np.cos(2 * np.pi * x[:, 0]), rtol=1e-13)
    assert np.allclose(f(x)[:, 0], 1.0 * np.sin(2 * np.pi * x[:, 0]), rtol=1e-13)


def test_reference_gradient_matches_finite_differences():
    N = 2
    mm = moment_matrices(MomentBasis(N))
    src = FourierForcing.cosine(2, (1, 2), np.linspace(1, 2, mm.L))
    u = pn_fourier_solve(N, 0.3, 2.0, 1.0, src, mm)
    x = np.random.default_rng(1).random((20, 2))
    g = u.gradient(x)
    step = 1e-5
    for a in range(2):
        e = np.zeros(2)
        e[a] = step
        fd = (u(x + e) - u(x - e)) / (2 * step)
        assert np.max(np.abs(fd - g[:, a])) <= 1e-6 * np.max(np.abs(g[:, a]))


def test_component_norms_parseval():
    src = FourierForcing.cosine(1, 1, [2.0])
    x = (np.arange(256) + 0.5)[:, None] / 256
    assert np.sqrt(np.mean(src(x)[:, 0] ** 2)) == pytest.approx(np.sqrt(2.0), rel=1e-12)
    kin = kinetic_fourier_solve(1.0, 2.0, 1.0, src)
    ref = kin.moments(0)
    assert ref.component_norms()[0] == pytest.approx(ref.mode_norm(), rel=1e-14)
    m0 = eval_basis(np.array([0, 0, 1.0]), MomentBasis(0))[0]
    assert m0 == pytest.approx(1 / np.sqrt(4 * np.pi))
