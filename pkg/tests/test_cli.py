import os
import json
import shutil
import warnings

import numpy as np

import morsedyn as md
from morsedyn import cli


def tmp():
    return os.path.join(os.getcwd(), 'tmp')


def make_tmp():
    os.makedirs(tmp(), exist_ok=True)


def delete_tmp():
    shutil.rmtree(tmp())


def write_config(**changes):
    data = {
        'molecule': dict(md.NO_MOLECULE),
        'dipole': {
            'terms': [{'a': -9.66, 'gamma': 0.927},
                      {'a': 10.64, 'gamma': 0.870}],
            'q_e_debye_per_nm': 20.0,
        },
        'truncation': {'N': 80, 'M': 70},
        'pulses': [{
            'peak_V_per_cm': 1e6,
            'tau_f_T': 2.0,
            'tau_t_T': 2.0,
            't0_T': 5.0,
            'chirp': {'kind': 'resonance', 'm': 0},
        }],
        'integrator': {'t_end_T': 10.0, 'tol': 1e-8,
                       'picture': 'interaction'},
        'certify': {'samples': 10, 'max_index': 20},
        'sweep': {'field_scale': [0.5, 1.0]},
    }
    for key, value in changes.items():
        if isinstance(value, dict):
            data[key].update(value)
        else:
            data[key] = value
    file = os.path.join(tmp(), 'scenario.json')
    with open(file, 'w') as f:
        json.dump(data, f)
    return file


def run(command, *args):
    out = os.path.join(tmp(), 'out')
    argv = [command, '--config', os.path.join(tmp(), 'scenario.json'),
            '--out', out, '--quiet'] + list(args)
    return cli.main(argv), out


def test_spectrum():
    make_tmp()
    write_config()
    code, out = run('spectrum')
    assert code == 0
    bound = np.loadtxt(os.path.join(out, 'bound_energies.csv'),
                       delimiter=',', skiprows=1)
    assert bound.shape == (55, 3)
    assert np.array_equal(bound[:, 0], np.arange(55))
    assert np.allclose(bound[:, 1], bound[:, 2], rtol=1e-9)
    positive = np.loadtxt(os.path.join(out, 'positive_energies.csv'),
                          delimiter=',', skiprows=1)
    assert positive.shape == (16, 2)
    assert np.all(positive[:, 1] >= 0)
    delete_tmp()


def test_spectrum_single_bound_state():
    make_tmp()
    mass, alpha = md.NO_MOLECULE['mass_u'], md.NO_MOLECULE['alpha_per_nm']
    file = write_config(
        molecule={'D0_eV': md.well_depth_for(0.5, mass, alpha)},
        truncation={'N': 10, 'M': 5}, zero_field=True, pulses=[])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter('always')
        cfg = md.load_config(file)
    assert len(w) > 0
    assert 'single bound state' in str(w[0].message)
    cfg.outputs['dir'] = os.path.join(tmp(), 'out')
    files = cli.cmd_spectrum(cfg)
    bound = np.loadtxt(files[0], delimiter=',', skiprows=1, ndmin=2)
    assert bound.shape == (1, 3)
    assert abs(bound[0, 1] + 0.25) < 1e-12
    positive = np.loadtxt(files[1], delimiter=',', skiprows=1, ndmin=2)
    assert positive.shape == (5, 2)
    delete_tmp()


def test_dipole():
    make_tmp()
    write_config()
    code, out = run('dipole')
    assert code == 0
    table = np.loadtxt(os.path.join(out, 'couplings.csv'), delimiter=',',
                       skiprows=1)
    assert table.shape == (54, 4)
    with open(os.path.join(out, 'dipole.json')) as f:
        report = json.load(f)
    assert report['trap_state'] == 43
    assert abs(report['slope'] - 0.98) < 1e-12
    assert len(report['terms']) == 2
    delete_tmp()


def test_simulate():
    make_tmp()
    write_config()
    code, out = run('simulate')
    assert code == 0
    with open(os.path.join(out, 'trajectory.csv')) as f:
        header = f.readline().strip().split(',')
    assert header[:3] == ['t', 'P', 'norm_drift']
    assert header[-1] == 'b54'
    data = np.loadtxt(os.path.join(out, 'trajectory.csv'), delimiter=',',
                      skiprows=1)
    assert data.shape == (11, 58)
    assert np.all(data[:, 2] < 1e-6)
    with open(os.path.join(out, 'summary.json')) as f:
        summary = json.load(f)
    assert summary['t_end'] == 10.0
    assert len(summary['pulse_increments']) == 1
    assert 0 <= summary['final_dissociation'] < 0.01
    delete_tmp()


def test_simulate_deterministic():
    make_tmp()
    write_config()
    code, out = run('simulate')
    assert code == 0
    with open(os.path.join(out, 'trajectory.csv'), 'rb') as f:
        first = f.read()
    code, out = run('simulate')
    assert code == 0
    with open(os.path.join(out, 'trajectory.csv'), 'rb') as f:
        second = f.read()
    assert first == second
    delete_tmp()


def test_simulate_zero_field():
    make_tmp()
    write_config(zero_field=True, pulses=[])
    code, out = run('simulate')
    assert code == 0
    data = np.loadtxt(os.path.join(out, 'trajectory.csv'), delimiter=',',
                      skiprows=1)
    assert data.shape == (11, 58)
    assert np.all(data[:, 1] == 0)
    assert np.amax(np.abs(data[:, 3] - 1)) < 1e-10
    assert np.amax(np.abs(data[:, 4:])) < 1e-10
    with open(os.path.join(out, 'summary.json')) as f:
        summary = json.load(f)
    assert summary['final_dissociation'] == 0
    assert summary['pulse_increments'] == []
    delete_tmp()


def test_simulate_preset():
    # The shipped scenario at low truncation over the start of pulse 1
    make_tmp()
    cfg = md.preset('no-paper')
    assert cfg.integrator['picture'] == 'interaction'
    cfg.truncation.update({'N': 80, 'M': 70})
    cfg.integrator['t_end_T'] = 30.0
    cfg.outputs['dir'] = os.path.join(tmp(), 'preset')
    files = cli.cmd_simulate(cfg)
    with open(files[1]) as f:
        summary = json.load(f)
    assert summary['t_end'] == 30.0
    assert summary['max_norm_drift'] < 1e-6
    assert 0 <= summary['final_dissociation'] < 0.05
    delete_tmp()


def test_design_chirp():
    make_tmp()
    write_config()
    code, out = run('design-chirp', '--m-start', '31', '--m-end', '43',
                    '--step', '2', '--t-start', '1200', '--t-end', '1400')
    assert code == 0
    with open(os.path.join(out, 'chirp.json')) as f:
        chirp = json.load(f)
    assert chirp['kind'] == 'piecewise'
    assert chirp['times_T'][0] == 1200 and chirp['times_T'][-1] == 1400
    ref = [md.ladder_resonance(md.no_params(), m, 2) for m in range(31, 44, 2)]
    assert np.allclose(chirp['omegas'], ref, rtol=1e-12)

    # Support of the configured pulse, single resonance
    code, out = run('design-chirp', '--m-start', '0', '--m-end', '0')
    assert code == 0
    with open(os.path.join(out, 'chirp.json')) as f:
        chirp = json.load(f)
    assert chirp['kind'] == 'constant'

    # Paced by the couplings of the configured pulse
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        code, out = run('design-chirp', '--m-start', '0', '--m-end', '5',
                        '--adiabatic', '--margin', '0.5')
    assert code == 0
    with open(os.path.join(out, 'chirp.json')) as f:
        chirp = json.load(f)
    assert chirp['kind'] == 'piecewise'
    assert len(chirp['omegas']) == 7
    assert np.all(np.diff(chirp['times_T']) > 0)
    assert np.all(np.diff(chirp['omegas']) < 0)
    p = md.no_params()
    assert abs(chirp['omegas'][0] - md.ladder_frequency(p, -0.5)) < 1e-12
    assert abs(chirp['omegas'][-1] - md.ladder_frequency(p, 5.5)) < 1e-12

    code, out = run('design-chirp', '--m-start', '50', '--m-end', '54')
    assert code == cli.EXIT_ERROR
    code, out = run('design-chirp', '--m-start', '0', '--m-end', '3',
                    '--pulse', '4')
    assert code == cli.EXIT_ERROR
    delete_tmp()


def test_certify():
    make_tmp()
    write_config()
    code, out = run('certify', '--seed', '2')
    assert code == 0
    with open(os.path.join(out, 'certify.json')) as f:
        report = json.load(f)
    assert report['passed'] is True
    write_config(certify={'threshold': 1e-300})
    code, out = run('certify')
    assert code == cli.EXIT_CERTIFY
    delete_tmp()


def test_sweep():
    make_tmp()
    write_config()
    code, out = run('sweep')
    assert code == 0
    data = np.loadtxt(os.path.join(out, 'sweep.csv'), delimiter=',',
                      skiprows=1)
    assert data.shape == (2, 3)
    assert np.array_equal(data[:, 0], [0.5, 1.0])
    delete_tmp()


def test_config_errors():
    make_tmp()
    code, out = run('spectrum')
    assert code == cli.EXIT_CONFIG
    write_config(truncation={'M': 90})
    code, out = run('spectrum')
    assert code == cli.EXIT_CONFIG
    write_config()
    code, out = run('simulate', '--tol', '-1')
    assert code == cli.EXIT_CONFIG
    delete_tmp()


if __name__ == "__main__":

    test_spectrum()
    test_spectrum_single_bound_state()
    test_dipole()
    test_simulate()
    test_simulate_deterministic()
    test_simulate_zero_field()
    test_simulate_preset()
    test_design_chirp()
    test_certify()
    test_sweep()
    test_config_errors()

    print('All cli tests passed!!')
