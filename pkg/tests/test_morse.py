import math
import warnings

import numpy as np
from scipy.integrate import quad

import morsedyn as md


NO = md.NO_MOLECULE


def no_params():
    return md.derive_params(NO['mass_u'], NO['D0_eV'], NO['alpha_per_nm'])


def params_for(s):
    # Oscillator with a prescribed depth parameter s
    D0 = md.well_depth_for(s, NO['mass_u'], NO['alpha_per_nm'])
    return md.derive_params(NO['mass_u'], D0, NO['alpha_per_nm'])


def test_derive_params():
    p = no_params()
    assert abs(p.s - 54.54) < 0.01
    assert p.n_bound == 55
    assert p.floor_s == 54
    assert 0 <= p.sigma < 1
    assert abs(p.s - p.floor_s - p.sigma) < 1e-12
    assert abs(p.kappa - 2*np.pi/(2*p.s + 1)) < 1e-15

    p = params_for(2.7)
    assert abs(p.s - 2.7) < 1e-10
    assert abs(p.sigma - 0.7) < 1e-10
    assert p.n_bound == 3

    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter('always')
        p = params_for(0.5)
    assert len(w) == 1
    assert p.n_bound == 1

    for args in [(0, 6.5, 27.7), (7.5, -1, 27.7), (7.5, 6.5, 0)]:
        try:
            md.derive_params(*args)
        except ValueError:
            assert True
        else:
            assert False


def test_reduced_mass():
    m = md.reduced_mass(14.003074, 15.994915)
    assert abs(m - 7.4664) < 1e-3
    try:
        md.reduced_mass(0, 1)
    except ValueError:
        assert True
    else:
        assert False


def test_bound_energy():
    p = no_params()
    assert md.bound_energy(p, 0) == -p.s**2
    assert abs(md.bound_energy(p, 54) + 0.2916) < 0.005
    assert abs(md.bound_energy(p, 42) + 157.2516) < 0.1
    E = md.bound_energies(p)
    assert E.size == 55
    assert np.all(np.diff(E) > 0)
    for m in [-1, 55]:
        try:
            md.bound_energy(p, m)
        except ValueError:
            assert True
        else:
            assert False


def test_ladder_coefficients():
    p = params_for(3.5)
    C = md.ladder_coefficients(p, 10)
    assert C.size == 11
    assert C[0] == 0
    assert np.allclose(C, np.arange(11), rtol=1e-9)

    p = no_params()
    C = md.ladder_coefficients(p, 10)
    assert abs(C[1] - math.sqrt(2*p.sigma)) < 1e-14
    assert abs(C[2] - math.sqrt(2*(2*p.sigma + 1))) < 1e-14
    assert abs(C[1] - 1.0392) < 1e-2
    assert np.all(np.diff(C[1:]) > 0)
    try:
        md.ladder_coefficients(p, 0)
    except ValueError:
        assert True
    else:
        assert False


def test_h0_matrix():
    p = no_params()
    H = md.h0_matrix(p, 100)
    assert H.size == 101
    assert H.offdiag.size == 100
    assert H.offdiag[p.floor_s] == 0
    assert abs(H.diag[0] - (p.floor_s**2 - p.s**2)) < 1e-10
    assert abs(H.diag[0] + 58.6116) < 1.0
    A = H.toarray()
    assert np.array_equal(A, A.T)
    # The bound block is an invariant subspace
    assert np.all(A[:p.n_bound, p.n_bound:] == 0)
    try:
        md.h0_matrix(p, p.floor_s + 1)
    except ValueError:
        assert True
    else:
        assert False


def test_h0_spectrum():
    p = no_params()
    H = md.h0_matrix(p, 80).toarray()
    nb = p.n_bound
    w = np.linalg.eigvalsh(H[:nb, :nb])
    E = md.bound_energies(p)
    assert np.allclose(w, E, rtol=1e-9)
    w = np.linalg.eigvalsh(H[nb:, nb:])
    assert np.all(w > -1e-9)


def test_phi_wavefunction():
    p = no_params()
    x = np.linspace(-0.5, 2.0, 7)
    y = (2*p.s + 1)*np.exp(-x)
    ref = np.sqrt(1/math.gamma(2*p.sigma))*y**p.sigma*np.exp(-y/2)
    assert np.allclose(md.phi_wavefunction(p, 0, x), ref, rtol=1e-12)

    def phi0sq(x):
        return md.phi_wavefunction(p, 0, x)[0]**2

    norm, _ = quad(phi0sq, -3, 40, points=[0.0], limit=200,
                   epsabs=1e-13, epsrel=1e-12)
    assert abs(norm - 1) < 1e-10

    # phi_n has exactly n nodes
    x = np.linspace(-1.5, 12, 20001)
    T = md.phi_table(p, 8, x)
    for n in range(9):
        v = T[n][np.abs(T[n]) > 1e-12*np.amax(np.abs(T[n]))]
        assert np.sum(np.diff(np.sign(v)) != 0) == n


def test_psi_bound():
    p = no_params()
    x = np.linspace(-1.5, 25, 200001)
    dx = x[1] - x[0]
    for m in [0, 3, 30]:
        psi = md.psi_bound(p, m, x)
        assert abs(np.sum(psi**2)*dx - 1) < 1e-6
    try:
        md.psi_bound(p, 55, x)
    except ValueError:
        assert True
    else:
        assert False


def _derivative(f, x, h=1e-4):
    # Five-point central difference
    return (f(x - 2*h) - 8*f(x - h) + 8*f(x + h) - f(x + 2*h))/(12*h)


def test_ladder_action():
    p = no_params()
    x = np.linspace(-0.3, 3.0, 40)
    C = md.ladder_coefficients(p, 12)
    for n in range(11):
        def phi(u):
            return md.phi_wavefunction(p, n, u)
        lhs = ((p.sigma + n)*phi(x) - (p.s + 0.5)*np.exp(-x)*phi(x)
               - _derivative(phi, x))
        rhs = C[n+1]*md.phi_wavefunction(p, n + 1, x)
        assert np.amax(np.abs(lhs - rhs)) < 1e-5


def test_commutator():
    p = no_params()
    K = 30
    E1 = md.build_exp_matrix(p, 1.0, K)
    for q, qp in [(p.s, p.s), (p.sigma, p.sigma + 1), (2.0, -1.5)]:
        A = md.ladder_operator(p, q, E1)
        Ad = md.ladder_operator(p, qp, E1, adjoint=True)
        lhs = A @ Ad - Ad @ A
        rhs = (q + qp)*np.eye(K + 1) - (A + Ad)
        d = np.abs(lhs - rhs)[:K-1, :K-1]
        assert np.amax(d) < 1e-8*max(1, np.amax(np.abs(rhs)))


def test_morse_potential():
    p = no_params()
    V = md.morse_potential(p, [0.0, 50.0])
    assert abs(V[0] + (p.s + 0.5)**2) < 1e-9
    assert abs(V[1]) < 1e-15


if __name__ == "__main__":

    test_derive_params()
    test_reduced_mass()
    test_bound_energy()
    test_ladder_coefficients()
    test_h0_matrix()
    test_h0_spectrum()
    test_phi_wavefunction()
    test_psi_bound()
    test_ladder_action()
    test_commutator()
    test_morse_potential()

    print('All morse tests passed!!')
