import json

import importlib_resources

from morsedyn.morse import MorseParameters, derive_params, reduced_mass
from morsedyn.dipole import DipoleModel, read_dipole_samples


# Nitric oxide, 14N16O
NO_MOLECULE = {
    'mass_u': reduced_mass(14.003074, 15.994915),
    'D0_eV': 6.497,
    'alpha_per_nm': 27.68,
    'equilibrium_nm': 0.1151,
}

# Normalisation charge in Debye/nm. With the shipped terms the slope of
# the dimensionless dipole at equilibrium is about 1, so q_e is the slope
# dmu/dr of the NO dipole at r_e: 20 Debye/nm = 2.0 Debye/A. This is the
# slope consistent with the fundamental band radiative rate of NO (about
# 12 /s), scaled from the CO band (about 33 /s at 3.1 Debye/A). The
# coupling strength of every pulse scales linearly with q_e.
NO_Q_E = 20.0

# Two-term dipole function of NO, fitted in dimensionless units
NO_DIPOLE_TERMS = [(-9.66, 0.0, 0.927), (10.64, 0.0, 0.870)]

DATASETS = {
    'no_dipole': 'no_dipole.txt',
    'no_paper': 'no_paper.json',
    'no_tuned': 'no_tuned.json',
}


def no_params() -> MorseParameters:
    """Oscillator parameters of nitric oxide.

    Example:
        >>> import morsedyn as md
        >>> round(md.no_params().s, 2)
        54.54
    """
    return derive_params(NO_MOLECULE['mass_u'], NO_MOLECULE['D0_eV'],
                         NO_MOLECULE['alpha_per_nm'])


def no_dipole_model(q_e=NO_Q_E) -> DipoleModel:
    """Two-term dipole function of nitric oxide.

    Args:
        q_e (float, optional): normalisation charge in Debye/nm. Defaults
          to the value used for the shipped samples.

    Returns:
        DipoleModel: model with terms (a, d, gamma) = (-9.66, 0, 0.927) and
        (10.64, 0, 0.870).
    """
    return DipoleModel(NO_DIPOLE_TERMS, q_e=q_e, fix_d_zero=True)


def datafile(dataset: str) -> str:
    """Path of a file shipped with morsedyn.

    Args:
        dataset (str): name of the dataset, see `fetch`.

    Raises:
        ValueError: if the dataset does not exist.

    Returns:
        str: path to the file.
    """
    if dataset not in DATASETS:
        raise ValueError(
            dataset + ' is not a morsedyn dataset. Options are '
            + ', '.join(DATASETS) + '.')
    f = importlib_resources.files('morsedyn.datafiles')
    return str(f.joinpath(DATASETS[dataset]))


def fetch(dataset: str):
    """Fetch a dataset included in morsedyn

    Args:
        dataset (str): name of the dataset, listed below.

    Returns:
        DipoleSamples or dict: the data.

    Notes:

        Available datasets:

        **no_dipole**

            Synthetic dipole moment of nitric oxide against interatomic
            separation, tabulated from the two-term exponential dipole
            function over 0.08 to 0.35 nm. The samples are not measured
            values, so a fit to them recovers the model terms. Separations are in nm and dipole moments in
            Debye. The header records the equilibrium separation and the
            normalisation charge q_e used to scale the dimensionless
            function.

            **Data format**: a `DipoleSamples` instance.

        **no_paper**

            Scenario configuration for ladder climbing of nitric oxide with
            three chirped pulses: a first-neighbour climb from the ground
            state, a second-neighbour climb through the trapping state and
            a final unchirped pulse near the top of the well.

            **Data format**: a dictionary with the structure accepted by
            `morsedyn.parse_config`.

        **no_tuned**

            The no_paper scenario with the unchirped third pulse replaced
            by a first-neighbour climb from m = 45 to the top of the well.

            **Data format**: a dictionary with the structure accepted by
            `morsedyn.parse_config`.

    Example:

        Fit the NO dipole samples:

    .. code-block:: python

        >>> import morsedyn as md
        >>> samples = md.fetch('no_dipole')
        >>> samples.equilibrium
        0.1151
    """
    file = datafile(dataset)
    if file.endswith('.txt'):
        return read_dipole_samples(file)
    with open(file, 'r', encoding='utf-8') as fp:
        return json.load(fp)
