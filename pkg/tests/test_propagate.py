import os
import json
import shutil

import numpy as np

import morsedyn as md


# Set MORSEDYN_SLOW=1 to run the full three-pulse scenario
SLOW = os.environ.get('MORSEDYN_SLOW', '0') == '1'


def tmp():
    return os.path.join(os.getcwd(), 'tmp')


def make_tmp():
    os.makedirs(tmp(), exist_ok=True)


def delete_tmp():
    shutil.rmtree(tmp())


def toy_params(s=5.3):
    mass, alpha = 7.466432, 27.68
    return md.derive_params(mass, md.well_depth_for(s, mass, alpha), alpha)


def toy_system():
    p = toy_params()
    model = md.DipoleModel([(1.0, 0.0, 0.5)], q_e=20.0)
    return md.reduced_system(p, model, 40, 25)


def two_level(F0):
    # Resonant two-level system: the transition frequency is omega0
    p = toy_params()
    E = [0.0, 2*p.s + 1]
    mu = [[0.0, 1.0], [1.0, 0.0]]
    red = md.ReducedSystem(E, mu, p, 1)
    return red, (lambda t: F0*np.cos(2*np.pi*t))


def test_rhs():
    red = toy_system()
    k = red.params.kappa
    b = np.zeros(red.size, dtype=complex)
    assert np.array_equal(md.rhs(b, 0.0, red, lambda t: 0.3), b)
    b[3] = 1
    db = md.rhs(b, 0.0, red, lambda t: 0.0)
    ref = np.zeros(red.size, dtype=complex)
    ref[3] = -1j*k*red.E[3]
    assert np.allclose(db, ref, rtol=1e-15, atol=0)

    rng = np.random.default_rng(1)
    b = rng.normal(size=red.size) + 1j*rng.normal(size=red.size)
    F = 0.7
    db = md.rhs(b, 0.0, red, lambda t: F)
    ref = -1j*k*((np.diag(red.E) - F*red.mu) @ b)
    assert np.allclose(db, ref, rtol=1e-14, atol=1e-14*np.amax(np.abs(ref)))


def test_rhs_pulses():
    red = toy_system()
    spec = md.PulseSpec(1e7, 5.0, 5.0, 10.0, md.chirp_constant(1.0))
    b = np.zeros(red.size, dtype=complex)
    b[0] = 1
    F = md.field(spec, red.params, red.q_e, 12.3)
    db1 = md.rhs(b, 12.3, red, [spec])
    db2 = md.rhs(b, 12.3, red, lambda t: F)
    assert np.allclose(db1, db2, rtol=1e-14)
    red.q_e = None
    try:
        md.rhs(b, 12.3, red, [spec])
    except ValueError:
        assert True
    else:
        assert False


def test_dissociation_probability():
    assert md.dissociation_probability(np.array([1, 0, 0]), 2) == 0.0
    assert md.dissociation_probability(np.array([0, 0, 1j]), 2) == 1.0
    b = np.array([0.6, 0, 0.8])
    assert abs(md.dissociation_probability(b, 1) - 0.64) < 1e-15
    # Clamped at the rounding margin
    assert md.dissociation_probability(np.array([1 + 1e-12, 0]), 1) == 0.0
    P = md.dissociation_probability(np.array([[1, 0], [0, 1]]), 1)
    assert np.array_equal(P, [0.0, 1.0])


def test_zero_field():
    red = toy_system()
    k = red.params.kappa
    n = 4
    rec = md.propagate(red, lambda t: 0.0, (0, 20), initial=n, tol=1e-13,
                       max_drift=1e-10)
    assert np.amax(np.abs(rec.populations[:, n] - 1)) < 1e-10
    assert np.amax(np.abs(np.delete(rec.populations, n, axis=1))) == 0
    phase = np.exp(-1j*k*red.E[n]*20)
    assert abs(rec.final_state[n] - phase) < 1e-9
    assert rec.final_dissociation == 0.0

    rec = md.propagate(red, lambda t: 0.0, (0, 20), initial=0,
                       picture='interaction')
    assert np.amax(np.abs(rec.populations[:, 0] - 1)) < 1e-12
    assert abs(rec.final_state[0] - np.exp(-1j*k*red.E[0]*20)) < 1e-10


def test_rabi():
    p = toy_params()
    F0 = 0.004*(2*p.s + 1)
    red, F = two_level(F0)
    # Rotating-wave Rabi frequency is kappa*F0
    t_pi = np.pi/(p.kappa*F0)
    rec = md.propagate(red, F, (0, t_pi), stride=t_pi/10)
    P = np.sin(p.kappa*F0*rec.times/2)**2
    assert np.amax(np.abs(rec.dissociation - P)) < 1e-3
    assert abs(rec.final_dissociation - 1) < 1e-3
    assert rec.max_norm_drift < 1e-7


def test_time_reversal():
    red = toy_system()

    def F(t):
        return 2.0*np.cos(2*np.pi*0.9*t)

    fwd = md.propagate(red, F, (0, 3), initial=0, tol=1e-11)
    bwd = md.propagate(red, F, (3, 0), initial=fwd.final_state, tol=1e-11)
    assert bwd.times[0] == 3 and bwd.times[-1] == 0
    b0 = np.zeros(red.size)
    b0[0] = 1
    assert np.amax(np.abs(bwd.final_state - b0)) < 1e-5
    # The field has changed the state on the way
    assert fwd.populations[-1, 0] < 1 - 1e-6


def test_pictures_agree():
    red = toy_system()

    def F(t):
        return 2.0*np.cos(2*np.pi*0.9*t)

    r1 = md.propagate(red, F, (0, 4), tol=1e-10, stride=0.5)
    r2 = md.propagate(red, F, (0, 4), tol=1e-10, stride=0.5,
                      picture='interaction')
    assert np.array_equal(r1.times, r2.times)
    assert np.amax(np.abs(r1.populations - r2.populations)) < 1e-6
    r3 = md.propagate(red, F, (0, 4), tol=1e-10, stride=0.5, method='RK45')
    assert np.amax(np.abs(r1.populations - r3.populations)) < 1e-6


def test_tolerance_convergence():
    # The error against a tight reference shrinks with the tolerance
    red = toy_system()

    def F(t):
        return 2.0*np.cos(2*np.pi*0.9*t)

    ref = md.propagate(red, F, (0, 4), tol=1e-12).final_state
    err = []
    for tol in [1e-6, 1e-8]:
        b = md.propagate(red, F, (0, 4), tol=tol).final_state
        err.append(np.amax(np.abs(b - ref)))
    assert err[1] < err[0]


def test_sampling():
    red = toy_system()
    rec = md.propagate(red, lambda t: 0.0, (0, 2.5), stride=1.0)
    assert np.array_equal(rec.times, [0, 1, 2, 2.5])
    assert rec.populations.shape == (4, red.size)
    assert rec.norm_drift.shape == (4,)


def test_propagate_errors():
    red = toy_system()
    F = lambda t: 0.0
    for kwargs in [{'tol': 0}, {'stride': -1}, {'picture': 'heisenberg'},
                   {'initial': red.size}, {'initial': np.ones(3)},
                   {'initial': np.ones(red.size)}]:
        try:
            md.propagate(red, F, (0, 1), **kwargs)
        except ValueError:
            assert True
        else:
            assert False
    red.mu[0, 1] += 1
    try:
        md.propagate(red, F, (0, 1))
    except ValueError:
        assert True
    else:
        assert False


def test_norm_drift_error():
    # An imaginary field makes the generator non-Hermitian
    red, F = two_level(0.0)
    try:
        md.propagate(red, lambda t: 0.5j, (0, 5))
    except md.IntegrationError as e:
        # Stopped as soon as the drift passes 100*tol
        assert 0 < e.t < 0.1
        assert 'Norm drift' in str(e)
    else:
        assert False
    rec = md.propagate(red, lambda t: 0.5j, (0, 5), max_drift=10.0)
    assert rec.times[-1] == 5
    assert rec.max_norm_drift > 1e-3
    try:
        md.propagate(red, F, (0, 5), max_drift=0)
    except ValueError:
        assert True
    else:
        assert False


def test_trajectory_record():
    red, F = two_level(0.05)
    rec = md.propagate(red, F, (0, 20), stride=1.0)
    assert rec.at(0) == 0
    inc = rec.increments([(0, 10), (10, 20)])
    assert abs(sum(inc) - rec.final_dissociation) < 1e-12
    s = rec.summary([(0, 10)])
    assert s['t_end'] == 20
    assert len(s['final_bound_populations']) == 1
    assert len(s['pulse_increments']) == 1
    rec.print_summary([(0, 10)])

    make_tmp()
    file = os.path.join(tmp(), 'trajectory.csv')
    rec.to_csv(file, K=1)
    data = np.loadtxt(file, delimiter=',', skiprows=1)
    assert data.shape == (21, 5)
    with open(file) as f:
        assert f.readline().strip() == 't,P,norm_drift,b0,b1'
    assert np.allclose(data[:, 1], rec.dissociation)
    file = os.path.join(tmp(), 'summary.json')
    rec.to_json(file)
    with open(file) as f:
        assert json.load(f)['final_dissociation'] == rec.final_dissociation
    delete_tmp()

    state = md.SimulationState(0.0, np.array([0.6, 0.8j]))
    assert abs(state.norm - 1) < 1e-15


def test_pulse_windows():
    spec = md.PulseSpec(1e7, 5.0, 5.0, 50.0, md.chirp_constant(1.0))
    w = md.pulse_windows([spec])
    assert len(w) == 1
    assert w[0][0] < 50 < w[0][1]


def run_preset(name, N=None, M=None):
    cfg = md.preset(name)
    N = cfg.truncation['N'] if N is None else N
    M = cfg.truncation['M'] if M is None else M
    reduced = md.reduced_system(cfg.params(), cfg.dipole_model(), N, M)
    pulses = cfg.pulse_specs()
    i = cfg.integrator
    rec = md.propagate(reduced, pulses, cfg.t_span(), tol=i['tol'],
                       picture=i['picture'])
    return rec, md.pulse_windows(pulses)


def test_no_scenario():
    if not SLOW:
        return
    rec, windows = run_preset('no-paper')
    assert rec.max_norm_drift < 1e-6
    # Practically no dissociation before the third pulse
    assert rec.at(windows[2][0]) < 0.05
    assert rec.final_dissociation > 0.25


def test_no_tuned_scenario():
    if not SLOW:
        return
    rec, windows = run_preset('no-tuned')
    assert rec.at(windows[2][0]) < 0.05
    assert rec.final_dissociation > 0.40


def test_no_scenario_truncation():
    if not SLOW:
        return
    small, _ = run_preset('no-paper', 1500, 150)
    large, _ = run_preset('no-paper', 3000, 250)
    assert abs(small.final_dissociation - large.final_dissociation) < 1e-3


if __name__ == "__main__":

    test_rhs()
    test_rhs_pulses()
    test_dissociation_probability()
    test_zero_field()
    test_rabi()
    test_time_reversal()
    test_pictures_agree()
    test_tolerance_convergence()
    test_sampling()
    test_propagate_errors()
    test_norm_drift_error()
    test_trajectory_record()
    test_pulse_windows()
    test_no_scenario()
    test_no_tuned_scenario()
    test_no_scenario_truncation()

    print('All propagate tests passed!!')
