"""Dipole moment functions and their matrices in the supersymmetric basis."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants
from tqdm import tqdm

from morsedyn import ui
from morsedyn.morse import MorseParameters, ladder_coefficients
from morsedyn.specfun import log_gamma, digamma


class DipoleFitError(ui.FitError):
    """Raised when the dipole function cannot be fitted to the samples."""


class RecurrenceError(RuntimeError):
    """Raised when recurrence matrix elements fail validation.

    Attributes:
        deviation (float): worst relative deviation found.
        index (tuple): matrix index (m, n) of the worst deviation.
    """

    def __init__(self, msg, deviation=None, index=None):
        super().__init__(msg)
        self.deviation = deviation
        self.index = index


# Tolerance on the normalisation slope sum(a - gamma*d) = 1
SLOPE_TOLERANCE = 0.05

# Relative deviation above which a recurrence build is rejected
RECURRENCE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class DipoleTerm:
    """One term (a*X + d)*exp(-gamma*X) of the dipole function.

    Attributes:
        a (float): dimensionless slope.
        d (float): dimensionless offset.
        gamma (float): dimensionless decay rate.
    """
    a: float
    d: float
    gamma: float

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return (self.a*X + self.d)*np.exp(-self.gamma*X)


@dataclass
class DipoleSamples:
    """Sampled dipole moment curve of a diatomic molecule.

    Attributes:
        separation (np.ndarray): interatomic separations in nm, strictly
          increasing.
        dipole (np.ndarray): dipole moments in Debye.
        equilibrium (float): equilibrium separation r_e in nm.
        q_e (float, optional): normalisation charge in Debye/nm, if known.
    """
    separation: np.ndarray
    dipole: np.ndarray
    equilibrium: float
    q_e: float = None

    def __post_init__(self):
        self.separation = np.asarray(self.separation, dtype=float)
        self.dipole = np.asarray(self.dipole, dtype=float)
        if self.separation.shape != self.dipole.shape:
            raise ValueError(
                'Separations and dipole moments must have the same length. '
                'Got ' + str(self.separation.size) + ' and '
                + str(self.dipole.size) + '.')
        if np.any(np.diff(self.separation) <= 0):
            raise ValueError('Separations must be strictly increasing.')
        if not self.equilibrium > 0:
            raise ValueError('The equilibrium separation must be positive.')

    def __len__(self):
        return self.separation.size

    def displacement(self, alpha) -> np.ndarray:
        """Dimensionless displacements X = alpha*(r - r_e).

        Args:
            alpha (float): range parameter in 1/nm.
        """
        return alpha*(self.separation - self.equilibrium)


class DipoleModel(ui.Model):
    """Dipole function as a sum of terms (a*X + d)*exp(-gamma*X).

    The model is dimensionless. The physical dipole moment in Debye is
    (q_e/alpha) times the model value, with q_e the normalisation charge in
    Debye/nm.

    Args:
        terms (list, optional): list of DipoleTerm instances, or of
          (a, d, gamma) tuples. Defaults to an empty list.
        q_e (float, optional): normalisation charge in Debye/nm. Defaults
          to 1.
        fix_d_zero (bool, optional): keep all offsets d at zero when
          training. Defaults to False.

    Example:

        Evaluate a linear dipole function:

    .. code-block:: python

        >>> import morsedyn as md
        >>> model = md.DipoleModel([(1, 0, 0)])
        >>> model.predict([0.0, 2.0])
        array([0., 2.])
    """

    def __init__(self, terms=None, q_e=1.0, fix_d_zero=False):
        if terms is None:
            terms = []
        self.terms = [t if isinstance(t, DipoleTerm) else DipoleTerm(*t)
                      for t in terms]
        self.q_e = q_e
        self.fix_d_zero = fix_d_zero
        self.residual_rms = None
        self.pcov = None

    def __repr__(self):
        return ('DipoleModel(terms=' + str(self.terms) + ', q_e='
                + str(self.q_e) + ')')

    def predict(self, X) -> np.ndarray:
        """Dimensionless dipole function at displacements X.

        Args:
            X (array-like): dimensionless displacements.

        Returns:
            np.ndarray: values of sum_i (a_i X + d_i) exp(-gamma_i X).
        """
        X = np.asarray(X, dtype=float)
        mu = np.zeros(X.shape)
        for term in self.terms:
            mu = mu + term(X)
        return mu

    def slope(self) -> float:
        """Derivative of the dimensionless dipole at X = 0."""
        return float(sum(t.a - t.gamma*t.d for t in self.terms))

    def physical(self, r, alpha, equilibrium) -> np.ndarray:
        """Dipole moment in Debye at separations r in nm.

        Args:
            r (array-like): separations in nm.
            alpha (float): range parameter in 1/nm.
            equilibrium (float): equilibrium separation in nm.
        """
        X = alpha*(np.asarray(r, dtype=float) - equilibrium)
        return (self.q_e/alpha)*self.predict(X)

    def check(self, params: MorseParameters = None):
        """Check the model for consistency.

        Raises:
            ValueError: if the model has no terms, or a decay rate is too
              negative for the seed integrals to exist.

        Warns:
            UserWarning: if the normalisation slope deviates from 1 by more
              than 5%.
        """
        if len(self.terms) == 0:
            raise ValueError('The dipole model has no terms.')
        if params is not None:
            for t in self.terms:
                if not 2*params.sigma + t.gamma > 0:
                    raise ValueError(
                        'Decay rate gamma = ' + str(t.gamma) + ' must be '
                        'larger than -2*sigma = '
                        + str(-2*params.sigma) + '.')
        if abs(self.slope() - 1) > SLOPE_TOLERANCE:
            warnings.warn(
                'The dipole slope at equilibrium is ' + str(self.slope())
                + ', which deviates from 1 by more than '
                + str(100*SLOPE_TOLERANCE) + '%.')

    def print_params(self, round_to=None):
        """Print the model parameters and their uncertainties

        Args:
            round_to (int, optional): Round to how many digits. If this is
              not provided, the values are not rounded. Defaults to None.
        """
        if self.pcov is None:
            perr = np.zeros(3*len(self.terms))
        else:
            perr = _expand_flat(self, np.sqrt(np.diag(self.pcov)))
        print('')
        print('--------------------------------')
        print('Dipole terms with their stdev')
        print('--------------------------------')
        print('')
        for i, t in enumerate(self.terms):
            for j, par in enumerate(['a', 'd', 'gamma']):
                v = getattr(t, par)
                verr = perr[3*i + j]
                if round_to is not None:
                    v = round(v, round_to)
                    verr = round(verr, round_to)
                print(par + str(i+1) + ': ' + str(v) + ' (' + str(verr) + ')')
        print('')
        print('----------------------------')
        print('Derived parameters')
        print('----------------------------')
        print('')
        print('Slope at equilibrium: ' + str(self.slope()))
        print('Normalisation charge (q_e): ' + str(self.q_e) + ' Debye/nm')
        if self.residual_rms is not None:
            print('Residual RMS: ' + str(self.residual_rms) + ' Debye')

    def _getflat(self) -> np.ndarray:
        if self.fix_d_zero:
            return np.array([v for t in self.terms for v in (t.a, t.gamma)])
        return np.array([v for t in self.terms for v in (t.a, t.d, t.gamma)])

    def _setflat(self, vals: np.ndarray):
        vals = _expand_flat(self, vals)
        self.terms = [DipoleTerm(*vals[3*i:3*i+3])
                      for i in range(len(self.terms))]


def _expand_flat(model, vals):
    # Insert zero offsets when d is not a free parameter
    vals = np.asarray(vals, dtype=float)
    if not model.fix_d_zero:
        return vals
    full = np.zeros(3*len(model.terms))
    full[0::3] = vals[0::2]
    full[2::3] = vals[1::2]
    return full


def read_dipole_samples(file) -> DipoleSamples:
    """Read a dipole sample file.

    The file is plain text with two columns, separation in nm and dipole
    moment in Debye. Comment lines start with '#'. Header comments of the
    form '# key = value' set the equilibrium separation (key
    'equilibrium_nm') and optionally the normalisation charge (key
    'q_e_debye_per_nm').

    Args:
        file (str or path): the file to read.

    Raises:
        ValueError: if the file has no equilibrium separation, or the
          columns are invalid.

    Returns:
        DipoleSamples: the samples.
    """
    header = {}
    with open(file, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if line.startswith('#') and '=' in line:
                key, val = line[1:].split('=', 1)
                header[key.strip()] = val.strip()
    data = np.loadtxt(file, comments='#', ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(
            'Dipole sample files must have two columns. Found '
            + str(data.shape[1]) + ' in ' + str(file) + '.')
    if 'equilibrium_nm' not in header:
        raise ValueError(
            'The header of ' + str(file) + ' does not define '
            'equilibrium_nm.')
    q_e = header.get('q_e_debye_per_nm')
    return DipoleSamples(
        data[:, 0], data[:, 1], float(header['equilibrium_nm']),
        None if q_e is None else float(q_e))


def write_dipole_samples(file, samples: DipoleSamples):
    """Write dipole samples in the format read by `read_dipole_samples`."""
    header = 'equilibrium_nm = ' + str(samples.equilibrium)
    if samples.q_e is not None:
        header += '\nq_e_debye_per_nm = ' + str(samples.q_e)
    header += '\nseparation_nm dipole_debye'
    np.savetxt(file, np.column_stack((samples.separation, samples.dipole)),
               header=header, comments='# ', encoding='utf-8')


def _slope_estimate(samples: DipoleSamples) -> float:
    # Local quadratic fit of the sampled curve around equilibrium
    dist = np.abs(samples.separation - samples.equilibrium)
    near = np.argsort(dist)[:min(5, len(samples))]
    dr = samples.separation[near] - samples.equilibrium
    deg = min(2, near.size - 1)
    coef = np.polyfit(dr, samples.dipole[near], deg)
    return float(coef[-2])


def fit_dipole(samples: DipoleSamples, n_terms: int, alpha: float,
               fix_d_zero=True, p0=None, q_e=None, **kwargs) -> DipoleModel:
    """Fit the dipole function to sampled dipole moments.

    The samples are converted to dimensionless displacements X and scaled
    by alpha/q_e before a Levenberg-Marquardt fit of
    sum_i (a_i X + d_i) exp(-gamma_i X).

    If no normalisation charge is available, it is estimated from the local
    slope of the samples at equilibrium and then replaced by the slope of
    the fitted function, so that the fitted model has unit slope at X = 0.

    Args:
        samples (DipoleSamples): sampled dipole curve.
        n_terms (int): number of terms (at least 1).
        alpha (float): range parameter in 1/nm.
        fix_d_zero (bool, optional): fix all offsets d to zero. Defaults to
          True.
        p0 (array-like, optional): initial values, ordered (a, gamma) per
          term if fix_d_zero, else (a, d, gamma) per term. Defaults to
          a = 1/n_terms, d = 0 and decay rates spread over [0.5, 1.5].
        q_e (float, optional): normalisation charge in Debye/nm. Defaults
          to the value in the samples, if any.
        kwargs: any keyword parameters accepted by
          `scipy.optimize.curve_fit`.

    Raises:
        ValueError: if n_terms < 1 or there are too few samples.
        DipoleFitError: if the fit does not converge or the Jacobian is
          singular at the solution.

    Returns:
        DipoleModel: fitted model with residual_rms in Debye.

    Example:
        >>> import morsedyn as md
        >>> samples = md.fetch('no_dipole')
        >>> model = md.fit_dipole(samples, 2, 27.68,
        ...     p0=[-9.5, 0.92, 10.5, 0.87])
        >>> round(model.terms[0].a, 2)
        -9.66
    """
    if n_terms < 1:
        raise ValueError(
            'The number of dipole terms must be at least 1. Got '
            + str(n_terms) + '.')
    npar = (2 if fix_d_zero else 3)*n_terms
    if len(samples) < 2*npar:
        raise ValueError(
            'At least ' + str(2*npar) + ' samples are needed to fit '
            + str(n_terms) + ' terms. Got ' + str(len(samples)) + '.')
    estimate = q_e is None and samples.q_e is None
    if q_e is None:
        q_e = samples.q_e if samples.q_e is not None else _slope_estimate(
            samples)
    if q_e == 0:
        raise ValueError('The normalisation charge cannot be zero.')
    kappa = q_e/alpha
    X = samples.displacement(alpha)
    y = samples.dipole/kappa

    if p0 is None:
        gammas = np.linspace(0.5, 1.5, n_terms) if n_terms > 1 else [0.5]
        terms = [(1/n_terms, 0.0, g) for g in gammas]
    else:
        p0 = np.asarray(p0, dtype=float)
        if p0.size != npar:
            raise ValueError(
                'p0 must have ' + str(npar) + ' values. Got '
                + str(p0.size) + '.')
        terms = [(0.0, 0.0, 0.0)]*n_terms
    model = DipoleModel(terms, q_e=q_e, fix_d_zero=fix_d_zero)
    if p0 is not None:
        model._setflat(p0)
    kwargs.setdefault('maxfev', 10000)
    kwargs.setdefault('ftol', 1e-15)
    kwargs.setdefault('xtol', 1e-15)
    try:
        model.train(X, y, **kwargs)
    except ui.FitError as e:
        rms = None if e.residual_rms is None else kappa*e.residual_rms
        raise DipoleFitError(str(e), rms) from e
    model.residual_rms = kappa*model.cost(X, y, 'RMS')
    if estimate:
        slope = model.slope()
        model.q_e = q_e*slope
        model.terms = [DipoleTerm(t.a/slope, t.d/slope, t.gamma)
                       for t in model.terms]
    model.check()
    return model


def seed_elements(params: MorseParameters, gamma: float):
    """Ground-state expectation values of X*exp(-gamma*X) and exp(-gamma*X).

    Args:
        params (MorseParameters): oscillator parameters.
        gamma (float): decay rate, larger than -2*sigma.

    Raises:
        ValueError: if 2*sigma + gamma <= 0.

    Returns:
        tuple: (<0|X exp(-gamma X)|0>, <0|exp(-gamma X)|0>).

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> md.seed_elements(p, 0.0)[1]
        1.0
    """
    g = 2*params.sigma + gamma
    if not g > 0:
        raise ValueError(
            'Seed integrals require 2*sigma + gamma > 0. Got '
            + str(g) + '.')
    ln2s = math.log(2*params.s + 1)
    e = math.exp(log_gamma(g) - log_gamma(2*params.sigma) - gamma*ln2s)
    xe = e*(ln2s - digamma(g))
    return xe, e


def _sweep(params, gamma, N, seed, source=None, extended=False, verbose=0):
    # Fill the upper triangle column by column and mirror it.
    # Forward recurrence below the diagonal is unstable and never used.
    dtype = np.longdouble if extended else float
    k = np.arange(N + 2, dtype=dtype)
    C = np.sqrt(k*(k + dtype(2*params.sigma - 1)))
    M = np.zeros((N + 1, N + 1), dtype=dtype)
    M[0, 0] = seed
    if source is not None:
        source = np.asarray(source, dtype=dtype)
    g = dtype(gamma)
    cols = range(N)
    if verbose > 0:
        cols = tqdm(cols, desc='Building matrix (gamma=' + str(gamma) + ')')
    for n in cols:
        m = np.arange(n + 1)
        col = (n - m - g)*M[:n+1, n]
        col[1:] += C[1:n+1]*M[:n, n]
        if source is not None:
            col += source[:n+1, n]
        M[:n+1, n+1] = col/C[n+1]
        diag = C[n+1]*M[n, n] + (-1 - g)*M[n, n+1]
        if source is not None:
            diag += source[n+1, n]
        M[n+1, n+1] = diag/C[n+1]
        M[n+1, :n+1] = M[:n+1, n+1]
    if not np.all(np.isfinite(M)):
        bad = np.argwhere(~np.isfinite(M))[0]
        raise RecurrenceError(
            'Recurrence produced a non-finite matrix element at '
            + str(tuple(bad)) + '.', np.inf, tuple(bad))
    return np.asarray(M, dtype=float)


def _validate(params, term, M, samples, seed=0):
    # Compare sampled elements against the quadrature oracle
    from morsedyn.oracle import (
        oracle_element, sample_indices, relative_deviation)

    top = min(M.shape[0] - 1, 60)
    idx = sample_indices(top, samples, seed=seed)
    r = np.array([M[m, n] for m, n in idx])
    q = np.array([oracle_element(params, m, n, term) for m, n in idx])
    dev = relative_deviation(r, q)
    worst = int(np.argmax(dev))
    if dev[worst] > RECURRENCE_TOLERANCE:
        raise RecurrenceError(
            'Recurrence element ' + str(idx[worst]) + ' deviates from '
            'quadrature by ' + str(dev[worst]) + ' (relative).',
            float(dev[worst]), idx[worst])


def build_exp_matrix(params: MorseParameters, gamma: float, N: int,
                     extended=False, validate=0, verbose=0) -> np.ndarray:
    """Matrix of exp(-gamma*X) in the supersymmetric basis.

    Args:
        params (MorseParameters): oscillator parameters.
        gamma (float): decay rate, larger than -2*sigma.
        N (int): highest basis index, at least 1.
        extended (bool, optional): run the recurrence in extended
          precision. Defaults to False.
        validate (int, optional): number of sampled elements to check
          against the quadrature oracle. Defaults to 0 (no check).
        verbose (int, optional): show a progress bar if 1. Defaults to 0.

    Raises:
        ValueError: if N < 1 or 2*sigma + gamma <= 0.
        RecurrenceError: if validation fails.

    Returns:
        np.ndarray: symmetric matrix of shape (N+1, N+1).

    Example:
        >>> import numpy as np
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> np.array_equal(md.build_exp_matrix(p, 0, 5), np.eye(6))
        True
    """
    if N < 1:
        raise ValueError('N must be at least 1. Got ' + str(N) + '.')
    seed = seed_elements(params, gamma)[1]
    M = _sweep(params, gamma, N, seed, extended=extended, verbose=verbose)
    if validate:
        _validate(params, DipoleTerm(0, 1, gamma), M, validate)
    return M


def build_xexp_matrix(params: MorseParameters, gamma: float, N: int,
                      exp_matrix=None, extended=False, validate=0,
                      verbose=0) -> np.ndarray:
    """Matrix of X*exp(-gamma*X) in the supersymmetric basis.

    Args:
        params (MorseParameters): oscillator parameters.
        gamma (float): decay rate, larger than -2*sigma.
        N (int): highest basis index, at least 1.
        exp_matrix (np.ndarray, optional): matrix of exp(-gamma*X) for the
          same gamma and N. Built if not provided.
        extended (bool, optional): run the recurrence in extended
          precision. Defaults to False.
        validate (int, optional): number of sampled elements to check
          against the quadrature oracle. Defaults to 0.
        verbose (int, optional): show a progress bar if 1. Defaults to 0.

    Raises:
        ValueError: if exp_matrix does not have shape (N+1, N+1).
        RecurrenceError: if validation fails.

    Returns:
        np.ndarray: symmetric matrix of shape (N+1, N+1).
    """
    if exp_matrix is None:
        exp_matrix = build_exp_matrix(params, gamma, N, extended=extended,
                                      verbose=verbose)
    if np.shape(exp_matrix) != (N + 1, N + 1):
        raise ValueError(
            'exp_matrix must have shape ' + str((N + 1, N + 1))
            + '. Got ' + str(np.shape(exp_matrix)) + '.')
    seed = seed_elements(params, gamma)[0]
    M = _sweep(params, gamma, N, seed, source=exp_matrix,
               extended=extended, verbose=verbose)
    if validate:
        _validate(params, DipoleTerm(1, 0, gamma), M, validate)
    return M


def assemble_mu(params: MorseParameters, model: DipoleModel, N: int,
                extended=False, validate=0, verbose=0) -> np.ndarray:
    """Matrix of the dimensionless dipole function in the basis.

    Args:
        params (MorseParameters): oscillator parameters.
        model (DipoleModel): dipole function.
        N (int): highest basis index.
        extended (bool, optional): run the recurrences in extended
          precision. Defaults to False.
        validate (int, optional): number of sampled elements per matrix to
          check against the quadrature oracle. Defaults to 0.
        verbose (int, optional): show progress bars if 1. Defaults to 0.

    Returns:
        np.ndarray: symmetric matrix sum_i a_i XE(gamma_i) + d_i E(gamma_i).
    """
    model.check(params)
    mu = np.zeros((N + 1, N + 1))
    for term in model.terms:
        E = build_exp_matrix(params, term.gamma, N, extended=extended,
                             validate=validate, verbose=verbose)
        if term.d != 0:
            mu += term.d*E
        if term.a != 0:
            XE = build_xexp_matrix(params, term.gamma, N, exp_matrix=E,
                                   extended=extended, validate=validate,
                                   verbose=verbose)
            mu += term.a*XE
    return mu


def debye_to_coulomb_metre(value) -> float:
    """Convert a dipole moment in Debye to C*m."""
    return value*1e-21/constants.c
