"""Integration of the equations of motion in the reduced eigenbasis."""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from tqdm import tqdm

from morsedyn.spectral import ReducedSystem, check_reduced
from morsedyn.pulse import PulseSpec, field_function, pulse_support


class IntegrationError(RuntimeError):
    """Raised when the integrator fails or the norm is not conserved.

    Attributes:
        t (float): last time reached, in units of T.
    """

    def __init__(self, msg, t=None):
        super().__init__(msg)
        self.t = t


PICTURES = ['schrodinger', 'interaction']


@dataclass
class SimulationState:
    """State vector at a given time.

    Attributes:
        t (float): time in units of T.
        b (np.ndarray): complex coefficients in the reduced eigenbasis.
    """
    t: float
    b: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.b)**2))


@dataclass
class TrajectoryRecord:
    """Sampled solution of the equations of motion.

    Attributes:
        times (np.ndarray): sample times in units of T.
        populations (np.ndarray): |b_n|**2, shape (times, states).
        dissociation (np.ndarray): probability outside the bound states.
        norm_drift (np.ndarray): |1 - sum |b_n|**2| at each sample.
        n_bound (int): number of bound states.
        final_state (np.ndarray): complex state vector at the last sample.
    """
    times: np.ndarray
    populations: np.ndarray
    dissociation: np.ndarray
    norm_drift: np.ndarray
    n_bound: int
    final_state: np.ndarray

    @property
    def max_norm_drift(self) -> float:
        return float(np.amax(self.norm_drift))

    @property
    def final_dissociation(self) -> float:
        return float(self.dissociation[-1])

    def at(self, t) -> float:
        """Dissociation probability interpolated at time t."""
        return float(np.interp(t, self.times, self.dissociation))

    def increments(self, windows) -> list:
        """Change of the dissociation probability over time windows.

        Args:
            windows (list): list of (t_start, t_end) pairs, for instance
              the supports of the pulses.

        Returns:
            list: P(t_end) - P(t_start) for each window.
        """
        return [self.at(t1) - self.at(t0) for t0, t1 in windows]

    def to_csv(self, file, K=None):
        """Write the trajectory as CSV.

        Columns are t, P, norm_drift and the populations of states 0..K.

        Args:
            file (str): path of the CSV file.
            K (int, optional): highest state index to include. Defaults to
              the highest bound state.
        """
        if K is None:
            K = self.n_bound - 1
        K = min(K, self.populations.shape[1] - 1)
        cols = ['t', 'P', 'norm_drift'] + ['b' + str(n) for n in range(K+1)]
        data = np.column_stack((self.times, self.dissociation,
                                self.norm_drift, self.populations[:, :K+1]))
        np.savetxt(file, data, delimiter=',', header=','.join(cols),
                   comments='', encoding='utf-8')

    def summary(self, windows=None) -> dict:
        """Summary of the trajectory as a dictionary."""
        out = {
            't_start': float(self.times[0]),
            't_end': float(self.times[-1]),
            'final_dissociation': self.final_dissociation,
            'max_norm_drift': self.max_norm_drift,
            'final_bound_populations':
                self.populations[-1, :self.n_bound].tolist(),
        }
        if windows is not None:
            out['pulse_increments'] = self.increments(windows)
        return out

    def to_json(self, file, windows=None):
        """Write the summary as JSON."""
        with open(file, 'w', encoding='utf-8') as f:
            json.dump(self.summary(windows), f, indent=2)

    def print_summary(self, windows=None):
        """Print a summary of the trajectory."""
        s = self.summary(windows)
        print('')
        print('--------------------------------')
        print('Propagation summary')
        print('--------------------------------')
        print('')
        print('Time span: ' + str(s['t_start']) + ' to ' + str(s['t_end'])
              + ' T')
        print('Final dissociation probability: '
              + str(s['final_dissociation']))
        print('Maximum norm drift: ' + str(s['max_norm_drift']))
        if windows is not None:
            for i, v in enumerate(s['pulse_increments']):
                print('Increment during pulse ' + str(i+1) + ': ' + str(v))


def _field(pulses, reduced):
    # A callable is used as is, a list of pulses is converted
    if callable(pulses):
        return pulses
    if reduced.q_e is None:
        raise ValueError(
            'The reduced system carries no normalisation charge q_e, which '
            'is needed to convert pulses in V/cm.')
    return field_function(pulses, reduced.params, reduced.q_e)


def rhs(b, t, reduced: ReducedSystem, pulses):
    """Time derivative of the state vector.

    db_n/dt = -i (2 pi/(2s+1)) [E_n b_n - F(t) sum_m mu_nm b_m]

    Args:
        b (np.ndarray): complex state vector.
        t (float): time in units of T.
        reduced (ReducedSystem): energies and dipole matrix.
        pulses (list or callable): list of PulseSpec, or a function
          returning the dimensionless field at time t.

    Returns:
        np.ndarray: complex derivative.
    """
    F = _field(pulses, reduced)(t)
    b = np.asarray(b)
    return -1j*reduced.params.kappa*(reduced.E*b - F*(reduced.mu @ b))


def dissociation_probability(b, n_bound: int) -> float:
    """Probability outside the bound states, clamped to [0, 1].

    Example:
        >>> import numpy as np
        >>> import morsedyn as md
        >>> md.dissociation_probability(np.array([1, 0, 0]), 2)
        0.0
    """
    b = np.asarray(b)
    p = 1 - np.sum(np.abs(b[..., :n_bound])**2, axis=-1)
    p = np.clip(p, 0, 1)
    return float(p) if np.ndim(p) == 0 else p


def _initial_state(initial, size):
    if np.isscalar(initial):
        if not 0 <= initial < size:
            raise ValueError(
                'Initial state index ' + str(initial) + ' is out of range.')
        b0 = np.zeros(size, dtype=complex)
        b0[int(initial)] = 1
        return b0
    b0 = np.asarray(initial, dtype=complex)
    if b0.shape != (size,):
        raise ValueError(
            'The initial state must have length ' + str(size) + '. Got '
            + str(b0.shape) + '.')
    norm = np.sum(np.abs(b0)**2)
    if abs(1 - norm) > 1e-8:
        raise ValueError(
            'The initial state must be normalised. Got norm ' + str(norm)
            + '.')
    return b0


def _sample_times(t0, t1, stride):
    direction = 1 if t1 >= t0 else -1
    n = int(np.floor(abs(t1 - t0)/stride + 1e-9))
    t = t0 + direction*stride*np.arange(n + 1)
    if not np.isclose(t[-1], t1, rtol=0, atol=1e-9*stride):
        t = np.append(t, t1)
    else:
        t[-1] = t1
    return t


def propagate(reduced: ReducedSystem, pulses, t_span, initial=0, tol=1e-9,
              stride=1.0, method='DOP853', picture='schrodinger',
              max_drift=None, verbose=0) -> TrajectoryRecord:
    """Integrate the equations of motion over a time span.

    The coefficients are integrated with an adaptive embedded Runge-Kutta
    method. The norm is monitored at every step but never restored, and
    the integration stops as soon as it drifts by more than max_drift.

    Args:
        reduced (ReducedSystem): energies and dipole matrix.
        pulses (list or callable): list of PulseSpec, or a function
          returning the dimensionless field at time t.
        t_span (tuple): (t_start, t_end) in units of T. Backward
          integration is allowed.
        initial (int or array-like, optional): index of the initial
          eigenstate, or a normalised state vector. Defaults to 0.
        tol (float, optional): relative tolerance of the integrator.
          Defaults to 1e-9.
        stride (float, optional): sampling interval of the output in units
          of T. Defaults to 1.
        method (str, optional): 'DOP853' or 'RK45'. Defaults to 'DOP853'.
        picture (str, optional): 'schrodinger' integrates the coefficients
          directly; 'interaction' removes the free phases analytically.
          Defaults to 'schrodinger'.
        max_drift (float, optional): largest accepted norm drift
          |1 - sum |b|**2|. Defaults to 100*tol.
        verbose (int, optional): show a progress bar over time if 1.
          Defaults to 0.

    Raises:
        ValueError: if arguments are invalid or mu is not symmetric.
        IntegrationError: if the integrator fails, or the norm drifts by
          more than max_drift. The error carries the time of failure.

    Returns:
        TrajectoryRecord: the sampled trajectory.
    """
    if not tol > 0:
        raise ValueError('tol must be positive. Got ' + str(tol) + '.')
    if not stride > 0:
        raise ValueError('stride must be positive. Got ' + str(stride) + '.')
    if max_drift is None:
        max_drift = 100*tol
    if not max_drift > 0:
        raise ValueError(
            'max_drift must be positive. Got ' + str(max_drift) + '.')
    if picture not in PICTURES:
        raise ValueError(
            str(picture) + ' is not a valid picture. Options are '
            + ', '.join(PICTURES) + '.')
    check_reduced(reduced)
    F = _field(pulses, reduced)
    t0, t1 = float(t_span[0]), float(t_span[1])
    b0 = _initial_state(initial, reduced.size)
    t_eval = _sample_times(t0, t1, stride)
    kappa = reduced.params.kappa
    E = reduced.E
    mu = reduced.mu

    def matvec(b):
        return mu @ b.real + 1j*(mu @ b.imag)

    if picture == 'schrodinger':
        def fun(t, b):
            return -1j*kappa*(E*b - F(t)*matvec(b))
    else:
        def fun(t, a):
            p = np.exp(-1j*kappa*E*t)
            return 1j*kappa*F(t)*np.conj(p)*matvec(p*a)
        b0 = np.exp(1j*kappa*E*t0)*b0

    if verbose > 0:
        bar = tqdm(total=abs(t1 - t0), desc='Propagating')
        f0 = fun

        def fun(t, b):
            done = abs(t - t0)
            if done > bar.n:
                bar.update(done - bar.n)
            return f0(t, b)

    # Both pictures preserve the norm
    def drift_event(t, b):
        return max_drift - abs(1 - np.vdot(b, b).real)

    drift_event.terminal = True
    drift_event.direction = -1

    try:
        sol = solve_ivp(fun, (t0, t1), b0, method=method, t_eval=t_eval,
                        rtol=tol, atol=tol*1e-3, events=drift_event)
    finally:
        if verbose > 0:
            bar.close()
    if sol.status < 0:
        t_reached = float(sol.t[-1]) if sol.t.size else t0
        raise IntegrationError(
            'Integration failed at t = ' + str(t_reached) + ': '
            + sol.message, t_reached)
    if sol.status == 1:
        t_stop = float(sol.t_events[0][0])
        b = sol.y_events[0][0]
        raise IntegrationError(
            'Norm drift ' + str(abs(1 - np.vdot(b, b).real)) + ' exceeds '
            + str(max_drift) + ' at t = ' + str(t_stop) + '. Check that '
            'the dipole matrix is symmetric and the step control is '
            'adequate.', t_stop)
    Y = sol.y.T
    if picture == 'interaction':
        Y = np.exp(-1j*kappa*np.outer(sol.t, E))*Y
    pop = np.abs(Y)**2
    drift = np.abs(1 - np.sum(pop, axis=1))
    if np.amax(drift) > max_drift:
        i = int(np.argmax(drift > max_drift))
        raise IntegrationError(
            'Norm drift ' + str(drift[i]) + ' exceeds ' + str(max_drift)
            + ' at t = ' + str(sol.t[i]) + '. Check that the dipole matrix '
            'is symmetric and the step control is adequate.',
            float(sol.t[i]))
    P = dissociation_probability(Y, reduced.n_bound)
    return TrajectoryRecord(sol.t, pop, np.atleast_1d(P), drift,
                            reduced.n_bound, Y[-1].copy())


def pulse_windows(pulses, fraction=0.01) -> list:
    """Support of each pulse, used to report per-pulse increments.

    Args:
        pulses (list): list of PulseSpec.
        fraction (float, optional): envelope threshold. Defaults to 0.01.

    Returns:
        list: (t_start, t_end) per pulse.
    """
    return [pulse_support(p, fraction) for p in pulses
            if isinstance(p, PulseSpec)]
