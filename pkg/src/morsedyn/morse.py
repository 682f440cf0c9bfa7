"""Morse oscillator parameters and the supersymmetric basis."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from morsedyn.specfun import orthonormal_laguerre, laguerre


@dataclass(frozen=True)
class MorseParameters:
    """Physical and dimensionless parameters of a Morse oscillator.

    Attributes:
        mass (float): reduced mass in atomic mass units.
        well_depth (float): well depth D0 in eV.
        alpha (float): range parameter in 1/nm.
        omega0 (float): harmonic angular frequency in rad/s.
        s (float): dimensionless depth parameter.
        sigma (float): fractional part of s.
        n_bound (int): number of bound states, floor(s) + 1.
    """
    mass: float
    well_depth: float
    alpha: float
    omega0: float
    s: float
    sigma: float
    n_bound: int

    @property
    def floor_s(self) -> int:
        """Index of the highest bound state."""
        return self.n_bound - 1

    @property
    def kappa(self) -> float:
        """Prefactor 2*pi/(2s+1) of the equations of motion."""
        return 2*np.pi/(2*self.s + 1)

    @property
    def period(self) -> float:
        """Oscillation period 2*pi/omega0 in seconds."""
        return 2*np.pi/self.omega0

    @property
    def energy_unit(self) -> float:
        """Dimensionless energy unit hbar*omega0/(2s+1) in J."""
        return constants.hbar*self.omega0/(2*self.s + 1)


@dataclass
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix in the supersymmetric basis.

    Attributes:
        diag (np.ndarray): diagonal, length N+1.
        offdiag (np.ndarray): off-diagonal, length N.
        params (MorseParameters): oscillator parameters.
    """
    diag: np.ndarray
    offdiag: np.ndarray
    params: MorseParameters = field(repr=False)

    @property
    def size(self):
        return self.diag.size

    def toarray(self) -> np.ndarray:
        """Return the matrix as a dense array."""
        return (np.diag(self.diag) + np.diag(self.offdiag, 1)
                + np.diag(self.offdiag, -1))


def derive_params(mass, well_depth, alpha) -> MorseParameters:
    """Derive the dimensionless oscillator parameters.

    Args:
        mass (float): reduced mass in atomic mass units.
        well_depth (float): well depth D0 in eV.
        alpha (float): range parameter in 1/nm.

    Raises:
        ValueError: if any input is not positive, or if the resulting s
          is an integer (no normalisable basis).

    Returns:
        MorseParameters: the derived parameters.

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> p.n_bound
        55
    """
    for name, v in [('mass', mass), ('well_depth', well_depth),
                    ('alpha', alpha)]:
        if not v > 0:
            raise ValueError(
                'Morse parameter ' + name + ' must be positive. Got '
                + str(v) + '.')
    m = mass*constants.atomic_mass
    D = well_depth*constants.eV
    a = alpha/constants.nano
    omega0 = a*math.sqrt(2*D/m)
    s = math.sqrt(2*m*D)/(constants.hbar*a) - 0.5
    if s <= 0:
        raise ValueError(
            'The oscillator supports no bound states (s = ' + str(s) + ').')
    floor_s = math.floor(s)
    sigma = s - floor_s
    if sigma == 0:
        raise ValueError(
            'The depth parameter s = ' + str(s) + ' is an integer. '
            'The highest level then sits at the dissociation threshold.')
    if s < 1:
        warnings.warn(
            'The oscillator has a single bound state (s = '
            + str(round(s, 4)) + ').')
    return MorseParameters(
        mass=float(mass), well_depth=float(well_depth), alpha=float(alpha),
        omega0=omega0, s=s, sigma=sigma, n_bound=floor_s + 1)


def reduced_mass(m1, m2) -> float:
    """Reduced mass of a diatomic molecule.

    Args:
        m1 (float): mass of the first atom.
        m2 (float): mass of the second atom, in the same units.

    Returns:
        float: m1*m2/(m1+m2).

    Example:
        >>> import morsedyn as md
        >>> round(md.reduced_mass(14.003074, 15.994915), 5)
        7.46643
    """
    if m1 <= 0 or m2 <= 0:
        raise ValueError('Atomic masses must be positive.')
    return m1*m2/(m1 + m2)


def well_depth_for(s, mass, alpha) -> float:
    """Well depth in eV that produces a given depth parameter s.

    Args:
        s (float): target depth parameter.
        mass (float): reduced mass in atomic mass units.
        alpha (float): range parameter in 1/nm.

    Returns:
        float: well depth D0 in eV.
    """
    if s <= 0 or mass <= 0 or alpha <= 0:
        raise ValueError('s, mass and alpha must all be positive.')
    m = mass*constants.atomic_mass
    a = alpha/constants.nano
    D = ((s + 0.5)*constants.hbar*a)**2/(2*m)
    return D/constants.eV


def bound_energy(params: MorseParameters, m: int) -> float:
    """Exact energy -(s-m)**2 of bound state m in units hbar*omega0/(2s+1).

    Raises:
        ValueError: if m is not a bound-state index.

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> md.bound_energy(p, 0) < md.bound_energy(p, 1) < 0
        True
    """
    if not 0 <= m <= params.floor_s:
        raise ValueError(
            str(m) + ' is not a bound-state index. Valid indices are 0 to '
            + str(params.floor_s) + '.')
    return -(params.s - m)**2


def bound_energies(params: MorseParameters) -> np.ndarray:
    """Exact energies of all bound states, in ascending order."""
    m = np.arange(params.n_bound)
    return -(params.s - m)**2


def morse_potential(params: MorseParameters, x) -> np.ndarray:
    """Morse potential in units of hbar*omega0/(2s+1).

    Args:
        params (MorseParameters): oscillator parameters.
        x (array-like): dimensionless displacement alpha*(r - r_e).

    Returns:
        np.ndarray: (s+1/2)**2 * (exp(-2x) - 2 exp(-x)).
    """
    x = np.asarray(x, dtype=float)
    return (params.s + 0.5)**2*(np.exp(-2*x) - 2*np.exp(-x))


def ladder_coefficients(params: MorseParameters, N: int) -> np.ndarray:
    """Ladder coefficients C_k = sqrt(k(k+2*sigma-1)) for k = 0..N.

    Args:
        params (MorseParameters): oscillator parameters.
        N (int): highest index, at least 1.

    Raises:
        ValueError: if N < 1.

    Returns:
        np.ndarray: array of length N+1 with C_0 = 0.
    """
    if N < 1:
        raise ValueError('N must be at least 1. Got ' + str(N) + '.')
    k = np.arange(N + 1, dtype=float)
    return np.sqrt(k*(k + 2*params.sigma - 1))


def h0_matrix(params: MorseParameters, N: int) -> TridiagonalMatrix:
    """Field-free Hamiltonian in the supersymmetric basis.

    The off-diagonal element at index floor(s) is exactly zero, so the
    matrix splits into a bound block of size floor(s)+1 and a continuum
    block.

    Args:
        params (MorseParameters): oscillator parameters.
        N (int): highest basis index, at least floor(s)+2.

    Raises:
        ValueError: if N is too small to contain a continuum block.

    Returns:
        TridiagonalMatrix: the truncated Hamiltonian.
    """
    if N < params.floor_s + 2:
        raise ValueError(
            'N must be at least floor(s)+2 = ' + str(params.floor_s + 2)
            + ' for the continuum block to exist. Got ' + str(N) + '.')
    C = ladder_coefficients(params, N)
    m = np.arange(N + 1, dtype=float)
    diag = C**2 - params.s**2 + (m - params.floor_s)**2
    offdiag = (params.floor_s - m[:-1])*C[1:]
    return TridiagonalMatrix(diag, offdiag, params)


def phi_table(params: MorseParameters, nmax: int, x) -> np.ndarray:
    """Supersymmetric basis functions of all indices up to nmax.

    The basis functions are l_n(y) y**sigma exp(-y/2) with y = (2s+1)
    exp(-x) and l_n the orthonormal Laguerre polynomial of parameter
    2*sigma-1. They are orthonormal under integration over x.

    Args:
        params (MorseParameters): oscillator parameters.
        nmax (int): highest index.
        x (array-like): dimensionless displacements.

    Returns:
        np.ndarray: array of shape (nmax+1, size(x)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    y = (2*params.s + 1)*np.exp(-x)
    values, logscale = orthonormal_laguerre(nmax, 2*params.sigma - 1, y)
    with np.errstate(over='ignore', under='ignore'):
        return values*np.exp(logscale + params.sigma*np.log(y) - y/2)


def phi_wavefunction(params: MorseParameters, n: int, x):
    """Basis function phi_n at dimensionless displacements x.

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> md.phi_wavefunction(p, 0, [0.0]).shape
        (1,)
    """
    if n < 0:
        raise ValueError('Basis index must be non-negative.')
    return phi_table(params, n, x)[n]


def psi_bound(params: MorseParameters, m: int, x) -> np.ndarray:
    """Normalised bound-state eigenfunction psi_m.

    Args:
        params (MorseParameters): oscillator parameters.
        m (int): bound-state index.
        x (array-like): dimensionless displacements.

    Returns:
        np.ndarray: values of psi_m at x.
    """
    bound_energy(params, m)
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    a = 2*(params.s - m)
    y = (2*params.s + 1)*np.exp(-x)
    lognorm = 0.5*(math.lgamma(m + 1) + math.log(a) - math.lgamma(m + a + 1))
    L = laguerre(m, a, y)
    with np.errstate(divide='ignore', over='ignore', under='ignore'):
        logv = np.log(np.abs(L)) + lognorm + (a/2)*np.log(y) - y/2
        return np.sign(L)*np.exp(logv)


def ladder_operator(params: MorseParameters, q, exp_matrix,
                    adjoint=False) -> np.ndarray:
    """Matrix of the ladder operator A(q) or its adjoint in the basis.

    A(q) = q - (s+1/2) exp(-X) + d/dX and its adjoint changes the sign of
    the derivative. The derivative matrix is built from the diagonal of
    exp(-X) and the ladder coefficients. Elements in the last row and
    column are affected by truncation.

    Args:
        params (MorseParameters): oscillator parameters.
        q (float): ladder parameter.
        exp_matrix (np.ndarray): matrix of exp(-X) in the basis.
        adjoint (bool, optional): return the adjoint. Defaults to False.

    Returns:
        np.ndarray: dense square matrix.
    """
    E1 = np.asarray(exp_matrix, dtype=float)
    K = E1.shape[0] - 1
    C = ladder_coefficients(params, K + 1)
    h = params.s + 0.5
    n = np.arange(K + 1)
    D = -h*E1
    D[n, n] += params.sigma + n
    D[n[1:], n[:-1]] -= C[1:K+1]
    I = np.eye(K + 1)
    if adjoint:
        return q*I - h*E1 - D
    return q*I - h*E1 + D
