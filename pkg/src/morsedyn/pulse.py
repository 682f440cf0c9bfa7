"""Laser pulses: envelopes, chirps and carrier fields."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.optimize import brentq
from scipy.integrate import quad, cumulative_trapezoid

from morsedyn.morse import MorseParameters
from morsedyn.dipole import debye_to_coulomb_metre


CHIRP_KINDS = ['constant', 'linear', 'piecewise', 'ladder']

# Adiabaticity below which a designed chirp triggers a warning
MIN_ADIABATICITY = 1.0


@dataclass
class ChirpSchedule:
    """Carrier frequency as a piecewise-linear function of time.

    Outside the knots the frequency is constant. A single knot gives a
    constant frequency.

    Attributes:
        kind (str): one of 'constant', 'linear', 'piecewise' or 'ladder'.
        times (np.ndarray): knot times in units of T, strictly increasing.
        omegas (np.ndarray): frequencies at the knots in units of omega0.
        adiabaticity (float): Landau-Zener exponent of each crossing for
          chirps built by `adiabatic_chirp`, None otherwise.
    """
    kind: str
    times: np.ndarray
    omegas: np.ndarray
    adiabaticity: float = None

    def __post_init__(self):
        if self.kind not in CHIRP_KINDS:
            raise ValueError(
                str(self.kind) + ' is not a valid chirp. Options are '
                + ', '.join(CHIRP_KINDS) + '.')
        self.times = np.atleast_1d(np.asarray(self.times, dtype=float))
        self.omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        if self.times.size == 0 or self.times.size != self.omegas.size:
            raise ValueError(
                'A chirp needs the same non-zero number of times and '
                'frequencies. Got ' + str(self.times.size) + ' and '
                + str(self.omegas.size) + '.')
        if np.any(np.diff(self.times) <= 0):
            raise ValueError('Chirp knot times must be strictly increasing.')
        if np.any(self.omegas <= 0):
            raise ValueError('Chirp frequencies must be positive.')
        # Antiderivative of the frequency at the knots
        self._cum = np.concatenate(([0.0], np.cumsum(
            np.diff(self.times)*(self.omegas[1:] + self.omegas[:-1])/2)))

    def frequency(self, t):
        """Instantaneous frequency in units of omega0 at times t."""
        if self.times.size == 1:
            return self.omegas[0]*np.ones(np.shape(t))
        return np.interp(t, self.times, self.omegas)

    def _antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        tk, wk, ck = self.times, self.omegas, self._cum
        if tk.size == 1:
            return wk[0]*(t - tk[0])
        i = np.clip(np.searchsorted(tk, t, side='right') - 1, 0, tk.size - 2)
        dt = np.clip(t, tk[0], tk[-1]) - tk[i]
        rate = (wk[i+1] - wk[i])/(tk[i+1] - tk[i])
        F = ck[i] + wk[i]*dt + rate*dt**2/2
        F = np.where(t < tk[0], wk[0]*(t - tk[0]), F)
        F = np.where(t > tk[-1], ck[-1] + wk[-1]*(t - tk[-1]), F)
        return F

    def phase(self, t):
        """Carrier phase 2*pi times the integral of the frequency from 0 to t."""
        return 2*np.pi*(self._antiderivative(t) - self._antiderivative(0.0))


def chirp_constant(omega) -> ChirpSchedule:
    """Chirp with a constant frequency omega (units of omega0)."""
    return ChirpSchedule('constant', [0.0], [omega])


def chirp_linear(omega_start, omega_end, t_start, t_end) -> ChirpSchedule:
    """Linear frequency sweep between two times (units of T)."""
    return ChirpSchedule('linear', [t_start, t_end], [omega_start, omega_end])


def chirp_piecewise(times, omegas) -> ChirpSchedule:
    """Piecewise-linear frequency through the knots (times, omegas)."""
    return ChirpSchedule('piecewise', times, omegas)


@dataclass
class PulseSpec:
    """Laser pulse with a distorted secant-hyperbolic envelope.

    Attributes:
        peak_field (float): maximum of the envelope in V/cm.
        tau_f (float): front time constant in units of T.
        tau_t (float): tail time constant in units of T.
        t0 (float): envelope centre in units of T.
        chirp (ChirpSchedule): carrier frequency schedule.
        carrier_phase0 (float): carrier phase at t = 0 in radians.
    """
    peak_field: float
    tau_f: float
    tau_t: float
    t0: float
    chirp: ChirpSchedule
    carrier_phase0: float = 0.0

    def __post_init__(self):
        if self.peak_field < 0:
            raise ValueError(
                'The peak field must be non-negative. Got '
                + str(self.peak_field) + '.')
        for name in ['tau_f', 'tau_t']:
            if not getattr(self, name) > 0:
                raise ValueError(
                    name + ' must be positive. Got '
                    + str(getattr(self, name)) + '.')

    @property
    def peak_time(self) -> float:
        """Time of the envelope maximum in units of T."""
        tf, tt = self.tau_f, self.tau_t
        return self.t0 + math.log(tt/tf)*tf*tt/(tf + tt)


def field_to_dimensionless(params: MorseParameters, q_e, E):
    """Convert an electric field in V/cm to dimensionless units.

    The dimensionless field is (2s+1) q_e E/(hbar omega0 alpha).

    Args:
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.
        E (float or array-like): field strength in V/cm.

    Returns:
        float or np.ndarray: dimensionless field.

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> md.field_to_dimensionless(p, 20.0, 0.0)
        0.0
    """
    charge = debye_to_coulomb_metre(q_e)/constants.nano
    alpha = params.alpha/constants.nano
    scale = (2*params.s + 1)*charge*100/(constants.hbar*params.omega0*alpha)
    E = np.asarray(E, dtype=float)
    v = scale*E
    return float(v) if v.ndim == 0 else v


def envelope_shape(spec: PulseSpec, t):
    """Envelope normalised to a maximum of 1.

    Args:
        spec (PulseSpec): the pulse.
        t (float or array-like): times in units of T.

    Returns:
        float or np.ndarray: 1/[exp((t0-t)/tau_f) + exp((t-t0)/tau_t)],
        divided by its maximum.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(over='ignore'):
        f = 1/(np.exp((spec.t0 - t)/spec.tau_f)
               + np.exp((t - spec.t0)/spec.tau_t))
    tp = spec.peak_time
    fmax = 1/(math.exp((spec.t0 - tp)/spec.tau_f)
              + math.exp((tp - spec.t0)/spec.tau_t))
    v = f/fmax
    return float(v) if v.ndim == 0 else v


def envelope_amplitude(spec: PulseSpec, params: MorseParameters, q_e):
    """Dimensionless prefactor E_a of the envelope formula.

    E_a is chosen so that the maximum of the envelope over time equals the
    dimensionless peak field.
    """
    tp = spec.peak_time
    fmax = 1/(math.exp((spec.t0 - tp)/spec.tau_f)
              + math.exp((tp - spec.t0)/spec.tau_t))
    return field_to_dimensionless(params, q_e, spec.peak_field)/fmax


def envelope(spec: PulseSpec, t, params: MorseParameters, q_e):
    """Dimensionless envelope of the pulse at times t.

    Args:
        spec (PulseSpec): the pulse.
        t (float or array-like): times in units of T.
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.

    Returns:
        float or np.ndarray: envelope values. The maximum over time is the
        dimensionless peak field.
    """
    peak = field_to_dimensionless(params, q_e, spec.peak_field)
    return peak*envelope_shape(spec, t)


def instantaneous_frequency(spec: PulseSpec, t):
    """Carrier frequency of the pulse in units of omega0 at times t."""
    return spec.chirp.frequency(t)


def field(spec: PulseSpec, params: MorseParameters, q_e, t):
    """Dimensionless field of a single pulse at times t.

    Args:
        spec (PulseSpec): the pulse.
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.
        t (float or array-like): times in units of T.

    Returns:
        float or np.ndarray: envelope(t)*cos(phase(t) + carrier_phase0).
    """
    env = envelope(spec, t, params, q_e)
    return env*np.cos(spec.chirp.phase(t) + spec.carrier_phase0)


def field_function(pulses, params: MorseParameters, q_e):
    """Total field of a pulse sequence as a function of time.

    Args:
        pulses (list): list of PulseSpec instances.
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.

    Returns:
        callable: function of t returning the sum of the individual fields.
    """
    pulses = list(pulses)
    peaks = [field_to_dimensionless(params, q_e, p.peak_field)
             for p in pulses]

    def total(t):
        v = 0.0
        for p, peak in zip(pulses, peaks):
            if peak == 0:
                continue
            v = v + peak*envelope_shape(p, t)*np.cos(
                p.chirp.phase(t) + p.carrier_phase0)
        return v

    return total


def pulse_support(spec: PulseSpec, fraction=0.01):
    """Time interval where the envelope exceeds a fraction of its maximum.

    Args:
        spec (PulseSpec): the pulse.
        fraction (float, optional): threshold relative to the maximum,
          between 0 and 1. Defaults to 0.01.

    Returns:
        tuple: (t_start, t_end) in units of T.
    """
    if not 0 < fraction < 1:
        raise ValueError('fraction must be between 0 and 1.')
    tp = spec.peak_time

    def g(t):
        return envelope_shape(spec, t) - fraction

    width = -math.log(fraction) + 5
    lo = tp - width*spec.tau_f
    while g(lo) > 0:
        lo -= width*spec.tau_f
    hi = tp + width*spec.tau_t
    while g(hi) > 0:
        hi += width*spec.tau_t
    return brentq(g, lo, tp), brentq(g, tp, hi)


def pulse_area(spec: PulseSpec, params: MorseParameters, q_e, coupling=1.0):
    """Area of the pulse envelope in the units of the equations of motion.

    This is 2*pi/(2s+1) * coupling * integral of the envelope. With the
    coupling set to a transition dipole, it is the Rabi rotation angle of
    that transition at resonance in the rotating-wave approximation,
    which is about pi for efficient transfer.

    Args:
        spec (PulseSpec): the pulse.
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.
        coupling (float, optional): transition dipole in dimensionless
          units. Defaults to 1.

    Returns:
        float: the pulse area.
    """
    lo, hi = pulse_support(spec, 1e-12)
    val, _ = quad(lambda t: envelope(spec, t, params, q_e), lo, hi,
                  points=[spec.peak_time], limit=200)
    return params.kappa*coupling*val


def ladder_frequency(params: MorseParameters, x, step=1):
    """Transition frequency step*(2(s-x)-step)/(2s+1) for a real level x.

    This continues `ladder_resonance` between and beyond the bound states
    without range checks.

    Args:
        params (MorseParameters): oscillator parameters.
        x (float or array-like): lower level, not necessarily an integer.
        step (int, optional): level step. Defaults to 1.

    Returns:
        float or np.ndarray: frequency in units of omega0.
    """
    x = np.asarray(x, dtype=float)
    v = step*(2*(params.s - x) - step)/(2*params.s + 1)
    return float(v) if v.ndim == 0 else v


def ladder_resonance(params: MorseParameters, m: int, step=1) -> float:
    """Frequency of the bound transition m -> m+step in units of omega0.

    Args:
        params (MorseParameters): oscillator parameters.
        m (int): lower state.
        step (int, optional): 1 or 2. Defaults to 1.

    Raises:
        ValueError: if step is not 1 or 2, or m+step is not bound.

    Returns:
        float: step*(2(s-m)-step)/(2s+1).

    Example:
        >>> import morsedyn as md
        >>> p = md.derive_params(7.46643, 6.497, 27.68)
        >>> round(md.ladder_resonance(p, 0), 4)
        0.9818
    """
    if step not in (1, 2):
        raise ValueError('step must be 1 or 2. Got ' + str(step) + '.')
    if not (0 <= m and m + step <= params.floor_s):
        raise ValueError(
            'The transition ' + str(m) + ' -> ' + str(m + step)
            + ' is not between bound states (highest bound state is '
            + str(params.floor_s) + ').')
    return ladder_frequency(params, m, step)


def _ladder_levels(params, m_start, m_end, step, margin):
    if not 0 <= m_start <= m_end:
        raise ValueError(
            'Need 0 <= m_start <= m_end. Got ' + str(m_start) + ' and '
            + str(m_end) + '.')
    if not margin >= 0:
        raise ValueError('margin must be non-negative. Got '
                         + str(margin) + '.')
    ladder_resonance(params, m_start, step)
    ladder_resonance(params, m_end, step)
    if ladder_frequency(params, m_end + margin, step) <= 0:
        raise ValueError(
            'A margin of ' + str(margin) + ' levels sweeps the carrier '
            'to zero frequency.')


def design_chirp(params: MorseParameters, m_start, m_end, step,
                 t_start, t_end, margin=0.0) -> ChirpSchedule:
    """Ladder-resonant chirp climbing from m_start to m_end.

    The knots are the transition frequencies of m -> m+step for
    m = m_start, m_start+step, ..., up to m_end, spread uniformly over
    [t_start, t_end]. With a margin, the sweep starts that many levels
    above the first resonance and ends that many levels below the last.

    Args:
        params (MorseParameters): oscillator parameters.
        m_start (int): first lower state.
        m_end (int): last lower state (inclusive).
        step (int): 1 or 2.
        t_start (float): time of the first knot in units of T.
        t_end (float): time of the last knot in units of T.
        margin (float, optional): detuning of the end knots in levels.
          Defaults to 0.

    Raises:
        ValueError: if the range is empty or leaves the bound spectrum.

    Returns:
        ChirpSchedule: piecewise-linear chirp of kind 'ladder'.
    """
    _ladder_levels(params, m_start, m_end, step, margin)
    x = np.arange(m_start, m_end + 1, step, dtype=float)
    if margin > 0:
        x = np.concatenate(([x[0] - margin], x, [x[-1] + margin]))
    omegas = ladder_frequency(params, x, step)
    if x.size == 1:
        return ChirpSchedule('ladder', [t_start], omegas)
    if not t_end > t_start:
        raise ValueError('t_end must be later than t_start.')
    times = t_start + (x - x[0])/(x[-1] - x[0])*(t_end - t_start)
    return ChirpSchedule('ladder', times, omegas)


def adiabatic_chirp(spec: PulseSpec, params: MorseParameters, q_e,
                    coupling, m_start, m_end, step=1, margin=0.5,
                    fraction=0.01, points=4001) -> ChirpSchedule:
    """Ladder chirp with the same Landau-Zener exponent at every crossing.

    The carrier passes the resonances m -> m+step for all levels m from
    m_start - margin to m_end + margin. Its speed in levels per unit time
    is proportional to envelope(t)**2 * coupling[m]**2, so the sweep
    slows down where the field or the coupling is weak. In the
    rotating-wave approximation each crossing then has the same
    adiabaticity

        L = (kappa F)**2 H / (4 df G)

    where F is the dimensionless peak field, H the integral of the squared
    normalised envelope, df = 2*step/(2s+1) the frequency spacing of
    successive resonances and G the sum of 1/coupling**2 over the swept
    levels. The population follows a crossing with probability
    1 - exp(-L).

    Args:
        spec (PulseSpec): the pulse. Its chirp is ignored.
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.
        coupling (array-like): coupling[m] = |mu_{m,m+step}| between bound
          eigenstates, for instance `morsedyn.couplings(reduced, step)`.
        m_start (int): first lower state.
        m_end (int): last lower state (inclusive).
        step (int, optional): 1 or 2. Defaults to 1.
        margin (float, optional): the sweep starts and ends this many
          levels beyond the first and last resonance. Defaults to 0.5.
        fraction (float, optional): envelope fraction that delimits the
          sweep. Defaults to 0.01.
        points (int, optional): size of the time grid used to integrate
          the envelope. Defaults to 4001.

    Raises:
        ValueError: if the levels are out of range or a coupling vanishes.

    Warns:
        UserWarning: if the adiabaticity is below 1.

    Returns:
        ChirpSchedule: piecewise-linear chirp of kind 'ladder' with the
        adiabaticity attribute set.
    """
    _ladder_levels(params, m_start, m_end, step, margin)
    c = np.asarray(coupling, dtype=float)
    if c.size <= m_end:
        raise ValueError(
            'Couplings are needed up to m = ' + str(m_end) + '. Got '
            + str(c.size) + ' values.')
    if margin == 0 and m_start == m_end:
        return ChirpSchedule(
            'ladder', [spec.peak_time],
            [ladder_resonance(params, m_start, step)])
    x = np.arange(m_start, m_end) + 0.5
    x = np.concatenate(([m_start - margin], x[x > m_start - margin],
                        [m_end + margin]))
    cell = np.clip(np.rint((x[:-1] + x[1:])/2), m_start, m_end).astype(int)
    if np.any(c[cell] == 0):
        raise ValueError(
            'The coupling of a swept level vanishes, so no chirp can '
            'drive it.')
    G = np.concatenate(([0.0], np.cumsum(np.diff(x)/c[cell]**2)))
    lo, hi = pulse_support(spec, fraction)
    t = np.linspace(lo, hi, points)
    H = cumulative_trapezoid(envelope_shape(spec, t)**2, t, initial=0)
    times = np.interp(G/G[-1]*H[-1], H, t)
    omegas = ladder_frequency(params, x, step)
    peak = field_to_dimensionless(params, q_e, spec.peak_field)
    spacing = 2*step/(2*params.s + 1)
    L = (params.kappa*peak)**2*H[-1]/(4*spacing*G[-1])
    if L < MIN_ADIABATICITY:
        warnings.warn(
            'The chirp from m = ' + str(m_start) + ' to ' + str(m_end)
            + ' has adiabaticity ' + str(L) + '. Population will be left '
            'behind at the crossings.')
    return ChirpSchedule('ladder', times, omegas, float(L))
