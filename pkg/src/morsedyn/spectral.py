"""Diagonalisation of the field-free Hamiltonian and reduction of the basis."""

import os
import hashlib
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.linalg import eigh_tridiagonal, block_diag, LinAlgError

from morsedyn import ui
from morsedyn.morse import MorseParameters, TridiagonalMatrix, h0_matrix
from morsedyn.dipole import DipoleModel, assemble_mu


# Elements of each recurrence matrix checked against quadrature on a build
VALIDATION_SAMPLES = 20


class SpectralError(RuntimeError):
    """Raised when a block of the Hamiltonian cannot be diagonalised."""


@dataclass
class SpectralBasis:
    """Eigenpairs of the truncated field-free Hamiltonian.

    The eigenvector matrix is block diagonal: the first n_bound columns
    span the bound states, the remaining columns the positive-energy
    states. Within each block energies are ascending.

    Attributes:
        energies (np.ndarray): eigenvalues, length N+1. Bound energies are
          the exact values -(s-m)**2.
        bound_vectors (np.ndarray): eigenvectors of the bound block.
        positive_vectors (np.ndarray): eigenvectors of the positive block.
        bound_numeric (np.ndarray): numerical eigenvalues of the bound
          block, before replacement by the exact values.
        params (MorseParameters): oscillator parameters.
    """
    energies: np.ndarray
    bound_vectors: np.ndarray
    positive_vectors: np.ndarray
    bound_numeric: np.ndarray
    params: MorseParameters = field(repr=False)

    @property
    def n_bound(self) -> int:
        return self.params.n_bound

    @property
    def size(self) -> int:
        return self.energies.size

    @property
    def vectors(self) -> np.ndarray:
        """Full block-diagonal eigenvector matrix."""
        return block_diag(self.bound_vectors, self.positive_vectors)


@dataclass
class ReducedSystem:
    """Energies and dipole matrix in the reduced eigenbasis.

    Attributes:
        E (np.ndarray): dimensionless energies, length M+1. The first
          n_bound entries are the bound energies.
        mu (np.ndarray): symmetric dipole matrix, shape (M+1, M+1).
        params (MorseParameters): oscillator parameters.
        n_bound (int): number of bound states.
        q_e (float, optional): normalisation charge in Debye/nm of the
          dipole model the matrix was built from.
        kept (np.ndarray, optional): indices of the kept positive states
          within the positive block.
    """
    E: np.ndarray
    mu: np.ndarray
    params: MorseParameters
    n_bound: int
    q_e: float = None
    kept: np.ndarray = None

    def __post_init__(self):
        self.E = np.asarray(self.E, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)
        if self.mu.shape != (self.E.size, self.E.size):
            raise ValueError(
                'The dipole matrix must have shape '
                + str((self.E.size, self.E.size)) + '. Got '
                + str(self.mu.shape) + '.')

    @property
    def size(self) -> int:
        return self.E.size

    def save(self, file):
        """Save the reduced system as a pickle."""
        return ui._save(self, str(file))

    def load(self, file):
        """Load a reduced system saved with `save`."""
        return ui._load(self, str(file))


def _block(diag, offdiag, name, offset):
    if diag.size == 1:
        return diag.copy(), np.ones((1, 1))
    try:
        w, v = eigh_tridiagonal(diag, offdiag)
    except LinAlgError as e:
        raise SpectralError(
            'Diagonalisation of the ' + name + ' block failed (block '
            'starts at basis index ' + str(offset) + '): ' + str(e))
    if not np.all(np.isfinite(w)):
        bad = int(np.argmax(~np.isfinite(w)))
        raise SpectralError(
            'Diagonalisation of the ' + name + ' block produced a '
            'non-finite eigenvalue at index ' + str(offset + bad) + '.')
    imax = np.argmax(np.abs(v), axis=0)
    v *= np.sign(v[imax, np.arange(v.shape[1])])
    return w, v


def diagonalize(h0: TridiagonalMatrix, exact_bound=True) -> SpectralBasis:
    """Diagonalise the truncated field-free Hamiltonian.

    The bound and positive-energy blocks are diagonalised independently.
    Eigenvector signs are fixed so the largest-magnitude component of each
    vector is positive.

    Args:
        h0 (TridiagonalMatrix): Hamiltonian from `h0_matrix`.
        exact_bound (bool, optional): replace the numerical bound energies
          by the exact values -(s-m)**2. Defaults to True.

    Raises:
        ValueError: if the off-diagonal element coupling the two blocks is
          not zero.
        SpectralError: if a block does not converge.

    Returns:
        SpectralBasis: eigenpairs of both blocks.
    """
    params = h0.params
    nb = params.n_bound
    if h0.offdiag[nb - 1] != 0:
        raise ValueError(
            'The Hamiltonian does not decouple at index ' + str(nb - 1)
            + ': off-diagonal element is ' + str(h0.offdiag[nb - 1]) + '.')
    Eb, Vb = _block(h0.diag[:nb], h0.offdiag[:nb - 1], 'bound', 0)
    Ep, Vp = _block(h0.diag[nb:], h0.offdiag[nb:], 'positive', nb)
    numeric = Eb.copy()
    if exact_bound:
        Eb = -(params.s - np.arange(nb))**2
    return SpectralBasis(np.concatenate((Eb, Ep)), Vb, Vp, numeric, params)


def reduce(basis: SpectralBasis, mu_full, M: int, selection='lowest',
           q_e=None) -> ReducedSystem:
    """Restrict the dipole matrix to bound states and selected positive states.

    Args:
        basis (SpectralBasis): eigenpairs of the field-free Hamiltonian.
        mu_full (np.ndarray): dipole matrix in the supersymmetric basis.
        M (int): highest index of the reduced basis, floor(s) < M <= N.
        selection (str, optional): 'lowest' keeps the M-floor(s) lowest
          positive energies. 'coupling' keeps the M-floor(s) positive states
          with the strongest dipole coupling to any bound state. Defaults to
          'lowest'.
        q_e (float, optional): normalisation charge to carry along.

    Raises:
        ValueError: if M is out of range or selection is unknown.

    Returns:
        ReducedSystem: energies and dipole matrix of M+1 states.
    """
    nb = basis.n_bound
    N = basis.size - 1
    if not nb - 1 < M <= N:
        raise ValueError(
            'M must satisfy floor(s) < M <= N, i.e. ' + str(nb - 1)
            + ' < M <= ' + str(N) + '. Got ' + str(M) + '.')
    mu_full = np.asarray(mu_full, dtype=float)
    if mu_full.shape != (N + 1, N + 1):
        raise ValueError(
            'The dipole matrix must have shape ' + str((N + 1, N + 1))
            + '. Got ' + str(mu_full.shape) + '.')
    npos = M + 1 - nb
    Vb = basis.bound_vectors
    Vp = basis.positive_vectors
    mu_bp = Vb.T @ mu_full[:nb, nb:] @ Vp
    if selection == 'lowest':
        keep = np.arange(npos)
    elif selection == 'coupling':
        strength = np.amax(np.abs(mu_bp), axis=0)
        keep = np.sort(np.argsort(strength)[::-1][:npos])
    else:
        raise ValueError(
            selection + ' is not a valid selection. '
            'Options are lowest or coupling.')
    Vk = Vp[:, keep]
    mu = np.empty((M + 1, M + 1))
    mu[:nb, :nb] = Vb.T @ mu_full[:nb, :nb] @ Vb
    mu[:nb, nb:] = mu_bp[:, keep]
    mu[nb:, :nb] = mu_bp[:, keep].T
    mu[nb:, nb:] = Vk.T @ mu_full[nb:, nb:] @ Vk
    mu = (mu + mu.T)/2
    E = np.concatenate((basis.energies[:nb], basis.energies[nb:][keep]))
    return ReducedSystem(E, mu, basis.params, nb, q_e=q_e, kept=keep)


def couplings(reduced: ReducedSystem, k=1) -> np.ndarray:
    """Magnitudes |mu_{m,m+k}| of the bound-to-bound couplings.

    Args:
        reduced (ReducedSystem): reduced system.
        k (int, optional): index step. Defaults to 1.

    Returns:
        np.ndarray: array of length n_bound-k, entry m is |mu_{m,m+k}|.
    """
    if not 1 <= k < reduced.n_bound:
        raise ValueError(
            'k must be in the range 1 to ' + str(reduced.n_bound - 1) + '.')
    m = np.arange(reduced.n_bound - k)
    return np.abs(reduced.mu[m, m + k])


def trap_state(reduced: ReducedSystem, m_range=(5, 50), k=1) -> int:
    """Bound state with the weakest coupling to the next level.

    Args:
        reduced (ReducedSystem): reduced system.
        m_range (tuple, optional): inclusive range of states to search.
          Defaults to (5, 50).
        k (int, optional): index step. Defaults to 1.

    Returns:
        int: index m where |mu_{m,m+k}| is smallest over m_range.
    """
    c = couplings(reduced, k)
    lo, hi = m_range
    hi = min(hi, c.size - 1)
    if lo > hi:
        raise ValueError('Empty search range ' + str(m_range) + '.')
    return lo + int(np.argmin(c[lo:hi + 1]))


def cache_key(params: MorseParameters, model: DipoleModel, N, M,
              selection='lowest') -> str:
    """SHA-256 hash identifying a reduced system."""
    terms = [(t.a, t.d, t.gamma) for t in model.terms]
    text = repr((sorted(asdict(params).items()), terms, model.q_e, N, M,
                 selection))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def reduced_system(params: MorseParameters, model: DipoleModel, N: int,
                   M: int, selection='lowest', extended=False,
                   cache_dir=None, validate=VALIDATION_SAMPLES,
                   verbose=0) -> ReducedSystem:
    """Build the reduced system from oscillator and dipole model.

    This builds the Hamiltonian and dipole matrices in the supersymmetric
    basis of size N+1, diagonalises the Hamiltonian and keeps M+1 states.

    Args:
        params (MorseParameters): oscillator parameters.
        model (DipoleModel): dipole function.
        N (int): highest index of the supersymmetric basis.
        M (int): highest index of the reduced basis.
        selection (str, optional): see `reduce`. Defaults to 'lowest'.
        extended (bool, optional): build the dipole matrix in extended
          precision. Defaults to False.
        cache_dir (str, optional): directory where reduced systems are
          cached. Defaults to None (no caching).
        validate (int, optional): number of sampled elements of each
          recurrence matrix that are checked against quadrature. Set to 0
          to skip the check. Defaults to 20.
        verbose (int, optional): show progress bars if 1. Defaults to 0.

    Raises:
        RecurrenceError: if a sampled element deviates from quadrature
          by more than RECURRENCE_TOLERANCE.

    Returns:
        ReducedSystem: the reduced system.
    """
    file = None
    if cache_dir is not None:
        key = cache_key(params, model, N, M, selection)
        file = os.path.join(cache_dir, 'reduced_' + key[:16] + '.pkl')
        if os.path.exists(file):
            empty = ReducedSystem(np.zeros(1), np.zeros((1, 1)), params, 0)
            return empty.load(file)
    basis = diagonalize(h0_matrix(params, N))
    mu = assemble_mu(params, model, N, extended=extended, validate=validate,
                     verbose=verbose)
    reduced = reduce(basis, mu, M, selection=selection, q_e=model.q_e)
    if file is not None:
        os.makedirs(cache_dir, exist_ok=True)
        reduced.save(file)
    return reduced


def check_reduced(reduced: ReducedSystem):
    """Check the invariants of a reduced system.

    Warns:
        UserWarning: if a positive-state energy is negative, which signals
          a truncation that is too small.

    Raises:
        ValueError: if mu is not symmetric or bound energies do not
          increase.
    """
    mu = reduced.mu
    tol = 1e-10*max(1, np.amax(np.abs(mu)))
    if not np.allclose(mu, mu.T, rtol=0, atol=tol):
        raise ValueError('The reduced dipole matrix is not symmetric.')
    if np.any(np.diff(reduced.E[:reduced.n_bound]) <= 0):
        raise ValueError('Bound energies must be strictly increasing.')
    if np.any(reduced.E[reduced.n_bound:] < 0):
        warnings.warn(
            'Some positive-block energies are negative. Increase N.')
