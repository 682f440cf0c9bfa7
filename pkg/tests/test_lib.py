import os

import numpy as np

import morsedyn as md


def test_fetch():
    samples = md.fetch('no_dipole')
    assert len(samples) == 55
    assert samples.equilibrium == 0.1151
    assert samples.q_e == 20.0
    assert samples.separation[0] == 0.08
    # The samples are synthetic: they follow the shipped dipole function
    model = md.no_dipole_model()
    ref = model.physical(samples.separation, 27.68, 0.1151)
    assert np.allclose(samples.dipole, ref, rtol=0, atol=1e-9)

    data = md.fetch('no_paper')
    assert len(data['pulses']) == 3
    assert data['truncation']['N'] == 3000
    assert data['integrator']['picture'] == 'interaction'
    tuned = md.fetch('no_tuned')
    assert tuned['pulses'][:2] == data['pulses'][:2]
    assert tuned['pulses'][2]['chirp']['kind'] == 'adiabatic'


def test_datafile():
    file = md.datafile('no_paper')
    assert os.path.isfile(file)
    assert file.endswith('no_paper.json')
    try:
        md.datafile('no_spectrum')
    except ValueError:
        assert True
    else:
        assert False


def test_no_params():
    p = md.no_params()
    assert abs(p.s - 54.539) < 0.01
    assert p.n_bound == 55
    assert p.floor_s == 54
    assert abs(p.kappa - 2*np.pi/(2*p.s + 1)) < 1e-15
    mu = md.reduced_mass(14.003074, 15.994915)
    assert abs(mu - 7.466432) < 1e-5


def test_no_dipole_model():
    model = md.no_dipole_model()
    assert len(model.terms) == 2
    assert model.q_e == md.NO_Q_E
    assert model.fix_d_zero
    assert abs(model.slope() - 0.98) < 1e-12
    assert md.no_dipole_model(q_e=15.0).q_e == 15.0


if __name__ == "__main__":

    test_fetch()
    test_datafile()
    test_no_params()
    test_no_dipole_model()

    print('All lib tests passed!!')
