import numpy as np
import matplotlib.pyplot as plt
from scipy import constants

from morsedyn.morse import MorseParameters, morse_potential, bound_energies
from morsedyn.dipole import DipoleModel, DipoleSamples
from morsedyn.spectral import ReducedSystem, couplings
from morsedyn.pulse import envelope, instantaneous_frequency
from morsedyn.propagate import TrajectoryRecord


def _finish(fname, show):
    if fname is not None:
        plt.savefig(fname=fname)
    if show:
        plt.show()
    else:
        plt.close()


def plot_potential_dipole(params: MorseParameters, model: DipoleModel,
                          equilibrium, samples: DipoleSamples = None,
                          xlim=(-1.5, 8.0), fname=None, show=True):
    """Plot the Morse potential with its bound levels, and the dipole moment.

    Args:
        params (MorseParameters): oscillator parameters.
        model (DipoleModel): dipole function.
        equilibrium (float): equilibrium separation in nm.
        samples (DipoleSamples, optional): measured dipole moments to
          overlay. Defaults to None.
        xlim (tuple, optional): range of X. Defaults to (-1.5, 8).
        fname (path, optional): Filepath to save the image. If no value
          is provided, the image is not saved. Defaults to None.
        show (bool, optional): If True, the plot is shown. Defaults
          to True.
    """
    X = np.linspace(xlim[0], xlim[1], 500)
    r = equilibrium + X/params.alpha
    V = morse_potential(params, X)*params.energy_unit/constants.eV
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    ax0.set_title('Morse potential')
    ax0.plot(r, V, 'k-')
    D = params.well_depth
    for E in bound_energies(params)*params.energy_unit/constants.eV:
        # Classical turning points of the level
        x_in = -np.log(1 + np.sqrt(1 + E/D))
        x_out = -np.log(1 - np.sqrt(1 + E/D)) if E < 0 else xlim[1]
        ax0.plot(equilibrium + np.array([x_in, x_out])/params.alpha,
                 [E, E], 'b-', linewidth=0.5)
    ax0.set_ylim(-1.05*D, 0.2*D)
    ax0.set_xlabel('Separation (nm)')
    ax0.set_ylabel('Energy (eV)')
    ax1.set_title('Dipole moment')
    ax1.plot(r, model.physical(r, params.alpha, equilibrium), 'r--',
             label='Fit')
    if samples is not None:
        ax1.plot(samples.separation, samples.dipole, 'ko',
                 markerfacecolor='none', label='Samples')
    ax1.set_xlabel('Separation (nm)')
    ax1.set_ylabel('Dipole (Debye)')
    ax1.legend()
    _finish(fname, show)


def plot_couplings(reduced: ReducedSystem, kmax=3, fname=None, show=True):
    """Plot the bound-to-bound dipole couplings |mu_{m,m+k}|.

    Args:
        reduced (ReducedSystem): reduced system.
        kmax (int, optional): plot k = 1..kmax. Defaults to 3.
        fname (path, optional): Filepath to save the image. Defaults to
          None.
        show (bool, optional): If True, the plot is shown. Defaults
          to True.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.set_title('Dipole couplings between bound states')
    for k, style in zip(range(1, kmax + 1), ['k-', 'k--', 'k:', 'k-.']):
        c = couplings(reduced, k)
        ax.plot(np.arange(c.size), c, style, label='k = ' + str(k))
    ax.set_xlabel('m')
    ax.set_ylabel('|mu(m, m+k)|')
    ax.legend()
    _finish(fname, show)


def plot_trajectory(record: TrajectoryRecord, pulses, params: MorseParameters,
                    q_e, fname=None, show=True):
    """Plot pulse envelopes, carrier frequencies and dissociation probability.

    Args:
        record (TrajectoryRecord): propagation result.
        pulses (list): list of PulseSpec.
        params (MorseParameters): oscillator parameters.
        q_e (float): normalisation charge in Debye/nm.
        fname (path, optional): Filepath to save the image. Defaults to
          None.
        show (bool, optional): If True, the plot is shown. Defaults
          to True.
    """
    t = record.times
    fig, ax = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    for i, p in enumerate(pulses):
        env = envelope(p, t, params, q_e)
        ax[0].plot(t, env, label='Pulse ' + str(i + 1))
        on = env > 0.01*np.amax(env)
        ax[1].plot(t[on], instantaneous_frequency(p, t[on]))
    ax[0].set_ylabel('Envelope')
    if pulses:
        ax[0].legend()
    ax[1].set_ylabel('Frequency (omega0)')
    ax[2].plot(t, record.dissociation, 'k-')
    ax[2].set_ylabel('Dissociation probability')
    ax[2].set_xlabel('Time (T)')
    _finish(fname, show)
