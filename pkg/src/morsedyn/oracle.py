"""Quadrature evaluation of basis overlaps and dipole matrix elements.

The functions in this module integrate over y = (2s+1)exp(-x) with
generalized Gauss-Laguerre rules. They are independent of the recurrences
in `morsedyn.dipole` and are used to certify them.
"""

import json
import math
import multiprocessing
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from tqdm import tqdm

from morsedyn import ui
from morsedyn.morse import MorseParameters
from morsedyn.specfun import gauss_laguerre, log_abs_orthonormal_laguerre
from morsedyn.dipole import DipoleModel, DipoleTerm, assemble_mu


class OracleError(RuntimeError):
    """Raised when a quadrature estimate does not converge."""


# Highest basis index evaluated by quadrature
MAX_INDEX = 200

# Agreement required between two quadrature estimates
CONVERGENCE = 1e-8

# Agreement at which the direct log moment is accepted without extrapolation
DIRECT_CONVERGENCE = 1e-12

# Deviations of elements smaller than this fraction of the largest sampled
# element are measured relative to that fraction
DEVIATION_FLOOR = 1e-3

# Number of nodes added to the degree of the polynomial integrand
EXTRA_NODES = 40


@dataclass
class OracleReport:
    """Comparison of recurrence matrix elements with quadrature values.

    Attributes:
        indices (list): sampled (m, n) pairs.
        recurrence (np.ndarray): matrix elements from the recurrences.
        quadrature (np.ndarray): matrix elements from quadrature.
        deviation (np.ndarray): relative deviation per element.
        threshold (float): largest accepted deviation.
    """
    indices: list
    recurrence: np.ndarray
    quadrature: np.ndarray
    deviation: np.ndarray
    threshold: float

    @property
    def worst(self) -> float:
        """Worst relative deviation."""
        return float(np.amax(self.deviation))

    @property
    def worst_index(self) -> tuple:
        """Index (m, n) of the worst relative deviation."""
        return tuple(int(i) for i in self.indices[int(np.argmax(self.deviation))])

    @property
    def passed(self) -> bool:
        return self.worst < self.threshold

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'threshold': self.threshold,
            'worst_deviation': self.worst,
            'worst_index': list(self.worst_index),
            'elements': [
                {'m': int(m), 'n': int(n), 'recurrence': float(r),
                 'quadrature': float(q), 'deviation': float(d)}
                for (m, n), r, q, d in zip(
                    self.indices, self.recurrence, self.quadrature,
                    self.deviation)
            ],
        }

    def to_json(self, file):
        """Write the report as JSON."""
        with open(file, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)

    def print_report(self):
        """Print a summary of the report."""
        print('')
        print('--------------------------------')
        print('Certification of matrix elements')
        print('--------------------------------')
        print('')
        print('Sampled elements: ' + str(len(self.indices)))
        print('Threshold: ' + str(self.threshold))
        print('Worst deviation: ' + str(self.worst)
              + ' at ' + str(self.worst_index))
        print('Result: ' + ('PASS' if self.passed else 'FAIL'))


@lru_cache(maxsize=64)
def _rule(npoints, exponent):
    return gauss_laguerre(npoints, exponent)


def _weighted_basis(nmax, alpha, rule):
    # sqrt(w_k) l_n(y_k) for n = 0..nmax, evaluated in log space
    sign, logabs = log_abs_orthonormal_laguerre(nmax, alpha, rule.nodes)
    with np.errstate(under='ignore'):
        return sign*np.exp(logabs + 0.5*rule.log_weights)


def _terms(params, m, n, beta, npoints):
    # Integrand factors of the moment with weight y**beta exp(-y)
    rule = _rule(npoints, beta)
    u = _weighted_basis(max(m, n), 2*params.sigma - 1, rule)
    return rule.nodes, u[m], u[n]


def _moment(params, m, n, beta, npoints):
    _, um, un = _terms(params, m, n, beta, npoints)
    return float(np.sum(um*un)), math.sqrt(np.sum(um**2)*np.sum(un**2))


def _log_moment_direct(params, m, n, beta, npoints):
    y, um, un = _terms(params, m, n, beta, npoints)
    ly = np.log(y)
    ref = math.sqrt(np.sum((um*ly)**2)*np.sum(un**2))
    return float(np.sum(um*un*ly)), ref


def _log_moment_richardson(params, m, n, beta, npoints):
    # Derivative of the moment with respect to the weight exponent
    h = min(1e-3, (beta + 1)/4)

    def D(step):
        up = _moment(params, m, n, beta + step, npoints)[0]
        dn = _moment(params, m, n, beta - step, npoints)[0]
        return (up - dn)/(2*step)

    return (4*D(h/2) - D(h))/3


def _agree(v1, v2, ref, tol=CONVERGENCE):
    return abs(v1 - v2) <= tol*max(abs(v2), ref)


def _log_moment(params, m, n, beta, npoints):
    J1, ref = _log_moment_direct(params, m, n, beta, npoints)
    J2, ref = _log_moment_direct(params, m, n, beta, 2*npoints)
    if _agree(J1, J2, ref, DIRECT_CONVERGENCE):
        return J2
    R1 = _log_moment_richardson(params, m, n, beta, npoints)
    R2 = _log_moment_richardson(params, m, n, beta, 2*npoints)
    if not _agree(R1, R2, ref):
        raise OracleError(
            'Quadrature of the log moment of (' + str(m) + ', ' + str(n)
            + ') does not converge: estimates ' + str(R1) + ' and '
            + str(R2) + '.')
    return R2


def oracle_element(params: MorseParameters, m: int, n: int,
                   term: DipoleTerm, npoints=None) -> float:
    """Matrix element <phi_m|(a X + d) exp(-gamma X)|phi_n> by quadrature.

    In the variable y the element is an integral against the weight
    y**(2 sigma + gamma - 1) exp(-y), with X = ln(2s+1) - ln(y). The
    polynomial part is integrated exactly by generalized Gauss-Laguerre
    quadrature. The logarithmic part is checked by doubling the number of
    nodes, and falls back on differentiation with respect to the weight
    exponent when the direct estimate does not converge.

    Args:
        params (MorseParameters): oscillator parameters.
        m (int): row index, at most 200.
        n (int): column index, at most 200.
        term (DipoleTerm): dipole term.
        npoints (int, optional): number of nodes. Defaults to m+n+40.

    Raises:
        ValueError: if an index is out of range or the weight is not
          integrable.
        OracleError: if the quadrature does not converge.

    Returns:
        float: the matrix element.

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> round(md.oracle_element(p, 3, 3, md.DipoleTerm(0, 1, 0)), 12)
        1.0
    """
    for i in (m, n):
        if not 0 <= i <= MAX_INDEX:
            raise ValueError(
                'Quadrature indices must be in the range 0 to '
                + str(MAX_INDEX) + '. Got ' + str(i) + '.')
    beta = 2*params.sigma - 1 + term.gamma
    if not beta > -1:
        raise ValueError(
            'The weight exponent 2*sigma + gamma - 1 must be larger than '
            '-1. Got ' + str(beta) + '.')
    if npoints is None:
        npoints = m + n + EXTRA_NODES
    ln2s = math.log(2*params.s + 1)
    I, ref = _moment(params, m, n, beta, npoints)
    I2, _ = _moment(params, m, n, beta, 2*npoints)
    if not _agree(I, I2, ref):
        raise OracleError(
            'Quadrature of (' + str(m) + ', ' + str(n) + ') does not '
            'converge: estimates ' + str(I) + ' and ' + str(I2) + '.')
    value = (term.d + term.a*ln2s)*I
    if term.a != 0:
        value -= term.a*_log_moment(params, m, n, beta, npoints)
    return math.exp(-term.gamma*ln2s)*value


def oracle_model_element(params, m, n, model: DipoleModel, npoints=None):
    """Matrix element of a full dipole model by quadrature."""
    return sum(oracle_element(params, m, n, t, npoints) for t in model.terms)


def oracle_gram(params: MorseParameters, nmax: int) -> np.ndarray:
    """Gram matrix of the basis functions phi_0..phi_nmax by quadrature.

    Returns:
        np.ndarray: matrix of overlaps, the identity up to rounding.
    """
    if not 0 <= nmax <= MAX_INDEX:
        raise ValueError(
            'nmax must be in the range 0 to ' + str(MAX_INDEX) + '.')
    alpha = 2*params.sigma - 1
    rule = _rule(2*nmax + EXTRA_NODES, alpha)
    U = _weighted_basis(nmax, alpha, rule)
    return U @ U.T


def bound_overlaps(params: MorseParameters, nmax=None) -> np.ndarray:
    """Overlaps <phi_n|psi_m> of basis functions with bound states.

    Args:
        params (MorseParameters): oscillator parameters.
        nmax (int, optional): highest basis index. Defaults to floor(s).

    Returns:
        np.ndarray: array of shape (nmax+1, n_bound). Rows with n > floor(s)
        vanish up to rounding.
    """
    if nmax is None:
        nmax = params.floor_s
    if not 0 <= nmax <= MAX_INDEX:
        raise ValueError(
            'nmax must be in the range 0 to ' + str(MAX_INDEX) + '.')
    alpha = 2*params.sigma - 1
    out = np.empty((nmax + 1, params.n_bound))
    for m in range(params.n_bound):
        a = 2*(params.s - m)
        rule = _rule(nmax + m + EXTRA_NODES, params.sigma + params.s - m - 1)
        sn, ln = log_abs_orthonormal_laguerre(nmax, alpha, rule.nodes)
        sm, lm = log_abs_orthonormal_laguerre(m, a, rule.nodes)
        with np.errstate(under='ignore'):
            v = sn*sm[m]*np.exp(ln + lm[m] + rule.log_weights)
        out[:, m] = math.sqrt(a)*np.sum(v, axis=1)
    return out


def relative_deviation(recurrence, quadrature) -> np.ndarray:
    """Deviation of recurrence values from quadrature values.

    Each deviation is |r - q| divided by max(|q|, DEVIATION_FLOOR*max|q|).
    The criterion is relative for elements above 1e-3 of the largest
    sampled element, and absolute on that scale for the smaller ones.

    Args:
        recurrence (array-like): matrix elements from the recurrences.
        quadrature (array-like): the same elements from quadrature.

    Returns:
        np.ndarray: deviation per element.
    """
    r = np.asarray(recurrence, dtype=float)
    q = np.asarray(quadrature, dtype=float)
    floor = DEVIATION_FLOOR*np.amax(np.abs(q))
    return np.abs(r - q)/np.maximum(np.abs(q), floor)


def sample_indices(top: int, count: int, seed=0) -> list:
    """Random and near-diagonal index pairs for certification.

    Args:
        top (int): highest index.
        count (int): number of random pairs.
        seed (int, optional): seed of the random generator. Defaults to 0.

    Returns:
        list: sorted list of distinct (m, n) pairs with m <= n <= top.
    """
    rng = np.random.default_rng(seed)
    idx = set()
    for k in sorted({0, 1, top//4, top//2, top}):
        for j in (0, 1, 2):
            if k + j <= top:
                idx.add((k, k + j))
    pairs = rng.integers(0, top + 1, size=(count, 2))
    for m, n in pairs:
        idx.add((int(min(m, n)), int(max(m, n))))
    return sorted(idx)


def _oracle_task(args):
    params, m, n, model = args
    return oracle_model_element(params, m, n, model)


def certify(params: MorseParameters, model: DipoleModel, N: int,
            sample_count=50, threshold=1e-6, seed=0, max_index=MAX_INDEX,
            matrix=None, extended=False, parallel=False,
            verbose=0) -> OracleReport:
    """Certify the recurrence dipole matrix against quadrature.

    Args:
        params (MorseParameters): oscillator parameters.
        model (DipoleModel): dipole function.
        N (int): highest basis index of the matrix.
        sample_count (int, optional): number of random elements. Defaults
          to 50.
        threshold (float, optional): largest accepted relative deviation.
          Defaults to 1e-6. Deviations are measured with
          `relative_deviation`.
        seed (int, optional): seed for the random selection. Defaults to 0.
        max_index (int, optional): highest sampled index. Defaults to 200.
        matrix (np.ndarray, optional): matrix to certify. Defaults to the
          output of `assemble_mu`.
        extended (bool, optional): build the matrix in extended precision.
          Defaults to False.
        parallel (bool, optional): evaluate quadratures in parallel.
          Defaults to False.
        verbose (int, optional): show a progress bar if 1. Defaults to 0.

    Raises:
        ValueError: if threshold is not positive.

    Returns:
        OracleReport: the comparison. A failure is reported, not raised.
    """
    if not threshold > 0:
        raise ValueError('The certification threshold must be positive.')
    if not 0 < max_index <= MAX_INDEX:
        raise ValueError(
            'max_index must be in the range 1 to ' + str(MAX_INDEX) + '.')
    if matrix is None:
        matrix = assemble_mu(params, model, N, extended=extended,
                             verbose=verbose)
    top = min(N, max_index)
    idx = sample_indices(top, sample_count, seed=seed)
    args = [(params, m, n, model) for m, n in idx]
    if parallel:
        pool = multiprocessing.Pool(processes=ui.num_workers)
        q = pool.map(_oracle_task, args)
        pool.close()
        pool.join()
    else:
        if verbose > 0:
            args = tqdm(args, desc='Certifying matrix elements')
        q = [_oracle_task(a) for a in args]
    q = np.array(q)
    r = np.array([matrix[m, n] for m, n in idx])
    return OracleReport(idx, r, q, relative_deviation(r, q), threshold)
