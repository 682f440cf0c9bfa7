"""Special functions and Gauss-Laguerre quadrature."""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, digamma as _digamma, logsumexp
from scipy.linalg import eigh_tridiagonal


# Threshold for the running rescale of orthonormal recurrences
_RESCALE = 1e150


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre rule for the weight y**exponent * exp(-y) on (0, inf).

    Attributes:
        nodes (np.ndarray): quadrature nodes in ascending order.
        weights (np.ndarray): positive weights. These may underflow to zero
          for large rules, in which case log_weights remains exact.
        exponent (float): power of y in the weight function.
        log_weights (np.ndarray): natural logarithm of the weights.
    """
    nodes: np.ndarray
    weights: np.ndarray
    exponent: float
    log_weights: np.ndarray

    @property
    def size(self):
        return self.nodes.size

    def integrate(self, values) -> float:
        """Weighted sum of function values at the nodes.

        Args:
            values (array-like): function values at the nodes.

        Returns:
            float: quadrature estimate of the weighted integral.
        """
        return float(np.sum(self.weights*np.asarray(values)))


def _out(v):
    # Return a scalar for 0-d input
    if np.ndim(v) == 0:
        return float(v)
    return v


def log_gamma(z):
    """Natural logarithm of the Gamma function for positive arguments.

    Args:
        z (float or array-like): positive argument.

    Raises:
        ValueError: if any argument is not positive.

    Returns:
        float or np.ndarray: ln Gamma(z).

    Example:
        >>> import morsedyn as md
        >>> md.log_gamma(5.0)
        3.1780538303479458
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError(
            'log_gamma is only defined here for positive arguments.')
    return _out(gammaln(z))


def digamma(z):
    """Logarithmic derivative of the Gamma function for positive arguments.

    Args:
        z (float or array-like): positive argument.

    Raises:
        ValueError: if any argument is not positive.

    Returns:
        float or np.ndarray: psi(z).

    Example:
        >>> import morsedyn as md
        >>> md.digamma(1.0)
        -0.5772156649015329
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError(
            'digamma is only defined here for positive arguments.')
    return _out(_digamma(z))


def _check_laguerre(n, alpha):
    if n < 0:
        raise ValueError(
            'Laguerre degree must be non-negative. Got ' + str(n) + '.')
    if alpha <= -1:
        raise ValueError(
            'Laguerre parameter must be larger than -1. Got '
            + str(alpha) + '.')


def laguerre(n: int, alpha: float, y):
    """Generalized Laguerre polynomial L_n^alpha(y).

    The polynomial is evaluated with the standard three-term recurrence,
    normalised so that L_0 = 1 and L_1 = 1 + alpha - y.

    Args:
        n (int): degree (non-negative).
        alpha (float): parameter, larger than -1.
        y (float or array-like): evaluation points.

    Raises:
        ValueError: if n < 0 or alpha <= -1.

    Returns:
        float or np.ndarray: polynomial values with the shape of y.

    Example:
        >>> import morsedyn as md
        >>> md.laguerre(2, 0, 1.0)
        -0.5
    """
    _check_laguerre(n, alpha)
    y = np.asarray(y, dtype=float)
    L0 = np.ones_like(y)
    if n == 0:
        return _out(L0)
    L1 = 1 + alpha - y
    for k in range(1, n):
        L0, L1 = L1, ((2*k + 1 + alpha - y)*L1 - (k + alpha)*L0)/(k + 1)
    return _out(L1)


def laguerre_table(nmax: int, alpha: float, y) -> np.ndarray:
    """Generalized Laguerre polynomials of all degrees up to nmax.

    Args:
        nmax (int): highest degree.
        alpha (float): parameter, larger than -1.
        y (array-like): evaluation points.

    Returns:
        np.ndarray: array of shape (nmax+1,) + shape(y).
    """
    _check_laguerre(nmax, alpha)
    y = np.asarray(y, dtype=float)
    L = np.empty((nmax+1,) + y.shape)
    L[0] = 1
    if nmax > 0:
        L[1] = 1 + alpha - y
    for k in range(1, nmax):
        L[k+1] = ((2*k + 1 + alpha - y)*L[k] - (k + alpha)*L[k-1])/(k + 1)
    return L


def orthonormal_laguerre(nmax: int, alpha: float, y):
    """Orthonormal Laguerre polynomials with a running log-scale.

    The polynomials l_n are orthonormal under the weight y**alpha exp(-y).
    To avoid overflow at large y, values are returned as a mantissa and a
    logarithmic scale, so that l_n(y) = values[n] * exp(logscale[n]).

    Args:
        nmax (int): highest degree.
        alpha (float): parameter, larger than -1.
        y (array-like): evaluation points.

    Returns:
        tuple: (values, logscale), both of shape (nmax+1, size(y)).
    """
    _check_laguerre(nmax, alpha)
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    values = np.empty((nmax+1, y.size))
    logscale = np.empty((nmax+1, y.size))
    prev = np.zeros(y.size)
    curr = np.full(y.size, np.exp(-0.5*gammaln(alpha + 1)))
    scale = np.zeros(y.size)
    values[0], logscale[0] = curr, scale
    for n in range(nmax):
        nxt = ((2*n + alpha + 1 - y)*curr - np.sqrt(n*(n + alpha))*prev)
        nxt /= np.sqrt((n + 1)*(n + alpha + 1))
        prev, curr = curr, nxt
        big = np.abs(curr) > _RESCALE
        if np.any(big):
            f = np.abs(curr[big])
            curr[big] /= f
            prev[big] /= f
            scale[big] += np.log(f)
        values[n+1] = curr
        logscale[n+1] = scale
    return values, logscale


def log_abs_orthonormal_laguerre(nmax: int, alpha: float, y):
    """Signs and log-magnitudes of the orthonormal Laguerre polynomials.

    Args:
        nmax (int): highest degree.
        alpha (float): parameter, larger than -1.
        y (array-like): evaluation points.

    Returns:
        tuple: (sign, logabs), both of shape (nmax+1, size(y)).
    """
    values, logscale = orthonormal_laguerre(nmax, alpha, y)
    with np.errstate(divide='ignore'):
        logabs = np.log(np.abs(values)) + logscale
    return np.sign(values), logabs


def _refine_nodes(y, npoints, exponent, steps=2):
    # Newton polish of the zeros of the degree-npoints polynomial
    for _ in range(steps):
        q_prev = np.zeros(y.size)
        q = np.ones(y.size)
        d_prev = np.zeros(y.size)
        d = np.zeros(y.size)
        for n in range(npoints):
            a = np.sqrt(n*(n + exponent))
            b = np.sqrt((n + 1)*(n + exponent + 1))
            q_next = ((2*n + exponent + 1 - y)*q - a*q_prev)/b
            d_next = ((2*n + exponent + 1 - y)*d - q - a*d_prev)/b
            q_prev, q, d_prev, d = q, q_next, d, d_next
            f = np.maximum(np.abs(q), 1.0)
            big = f > _RESCALE
            if np.any(big):
                q_prev[big] /= f[big]
                q[big] /= f[big]
                d_prev[big] /= f[big]
                d[big] /= f[big]
        with np.errstate(divide='ignore', invalid='ignore'):
            step = q/d
        ok = np.isfinite(step)
        y = np.where(ok, y - np.where(ok, step, 0), y)
    return np.sort(y)


def gauss_laguerre(npoints: int, exponent: float = 0.0) -> QuadratureRule:
    """Gauss-Laguerre quadrature for the weight y**exponent * exp(-y).

    The nodes are the eigenvalues of the Jacobi matrix, polished with
    Newton steps. Weights follow from the Christoffel formula and are
    computed in log space, so the rule remains usable when the largest
    weights overflow or the smallest underflow.

    Args:
        npoints (int): number of nodes (positive).
        exponent (float, optional): power of y in the weight function,
          larger than -1. Defaults to 0.

    Raises:
        ValueError: if npoints < 1 or exponent <= -1.

    Returns:
        QuadratureRule: nodes, weights and log-weights. The rule integrates
        polynomials up to degree 2*npoints-1 exactly.

    Example:
        >>> import morsedyn as md
        >>> rule = md.gauss_laguerre(1)
        >>> rule.nodes, rule.weights
        (array([1.]), array([1.]))
    """
    if npoints < 1:
        raise ValueError(
            'The number of quadrature nodes must be positive. Got '
            + str(npoints) + '.')
    if exponent <= -1:
        raise ValueError(
            'The weight exponent must be larger than -1. Got '
            + str(exponent) + '.')
    if npoints == 1:
        lw = np.array([gammaln(exponent + 1)])
        return QuadratureRule(
            np.array([exponent + 1.0]), np.exp(lw), exponent, lw)
    k = np.arange(npoints, dtype=float)
    diag = 2*k + exponent + 1
    off = np.sqrt(k[1:]*(k[1:] + exponent))
    nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    nodes = _refine_nodes(nodes, npoints, exponent)
    _, logabs = log_abs_orthonormal_laguerre(npoints-1, exponent, nodes)
    logw = -logsumexp(2*logabs, axis=0)
    return QuadratureRule(nodes, np.exp(logw), exponent, logw)
