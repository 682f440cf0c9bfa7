import numpy as np

from morsedyn import lib
from morsedyn.dipole import DipoleModel, DipoleSamples


def fake_dipole(
    model: DipoleModel = None,
    alpha=lib.NO_MOLECULE['alpha_per_nm'],
    equilibrium=lib.NO_MOLECULE['equilibrium_nm'],
    separation=None,
    sdev=0.0,
    seed=None,
):
    """Synthetic dipole moment samples with noise.

    Args:
        model (DipoleModel, optional): dipole function to sample. Defaults
          to the two-term function of nitric oxide.
        alpha (float, optional): range parameter in 1/nm. Defaults to the
          value of nitric oxide.
        equilibrium (float, optional): equilibrium separation in nm.
          Defaults to the value of nitric oxide.
        separation (array-like, optional): separations in nm. Defaults to
          55 points from 0.08 to 0.35 nm.
        sdev (float, optional): standard deviation of Gaussian noise in
          Debye. Defaults to 0.
        seed (int, optional): seed of the random generator. Defaults to
          None.

    Returns:
        DipoleSamples: samples carrying the normalisation charge of the
        model.

    Example:
        >>> import morsedyn as md
        >>> samples = md.fake_dipole(md.DipoleModel([(1, 0, 0)], q_e=10.0))
        >>> len(samples)
        55
    """
    if model is None:
        model = lib.no_dipole_model()
    if separation is None:
        separation = np.linspace(0.08, 0.35, 55)
    separation = np.asarray(separation, dtype=float)
    dipole = model.physical(separation, alpha, equilibrium)
    if sdev > 0:
        rng = np.random.default_rng(seed)
        dipole = dipole + rng.normal(0, sdev, dipole.size)
    return DipoleSamples(separation, dipole, equilibrium, model.q_e)
