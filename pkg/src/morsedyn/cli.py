"""Command-line interface.

Usage examples::

    morsedyn spectrum --preset no-paper --out results
    morsedyn dipole --config scenario.json
    morsedyn simulate --preset no-paper --tol 1e-8
    morsedyn design-chirp --preset no-paper --m-start 29 --m-end 44 --step 2
    morsedyn design-chirp --preset no-paper --m-start 45 --m-end 53 --adiabatic
    morsedyn certify --preset no-paper --seed 3
    morsedyn sweep --preset no-paper
"""

import os
import sys
import json
import logging
import argparse
import multiprocessing

import numpy as np

from morsedyn import ui
from morsedyn.config import ConfigError, load_config, preset, LADDER_SUPPORT
from morsedyn.morse import h0_matrix
from morsedyn.dipole import DipoleFitError, RecurrenceError
from morsedyn.spectral import (
    SpectralError,
    diagonalize,
    reduced_system,
    couplings,
    trap_state,
)
from morsedyn.pulse import design_chirp, adiabatic_chirp, pulse_support
from morsedyn.propagate import IntegrationError, propagate, pulse_windows
from morsedyn.oracle import OracleError, certify


log = logging.getLogger('morsedyn')

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_CERTIFY = 3


def _outdir(cfg):
    out = cfg.outputs['dir']
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(file, data):
    with open(file, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
    log.info('Wrote %s', file)


def _write_csv(file, data, columns, fmt='%.12g'):
    np.savetxt(file, data, delimiter=',', header=','.join(columns),
               comments='', fmt=fmt, encoding='utf-8')
    log.info('Wrote %s', file)


def _reduced(cfg, model, verbose=0):
    params = cfg.params()
    t = cfg.truncation
    log.info('Building reduced system (N = %d, M = %d)', t['N'], t['M'])
    return reduced_system(params, model, t['N'], t['M'],
                          selection=t['selection'],
                          cache_dir=cfg.outputs['cache_dir'], verbose=verbose)


def cmd_spectrum(cfg, verbose=0) -> list:
    """Write bound energies and the lowest positive energies as CSV.

    Args:
        cfg (ScenarioConfig): scenario configuration.

    Returns:
        list: files written.
    """
    params = cfg.params()
    out = _outdir(cfg)
    N, M = cfg.truncation['N'], cfg.truncation['M']
    log.info('Diagonalising H0 with N = %d (s = %.6f, %d bound states)',
             N, params.s, params.n_bound)
    basis = diagonalize(h0_matrix(params, N))
    nb = params.n_bound
    bound = np.column_stack((np.arange(nb), basis.energies[:nb],
                             basis.bound_numeric))
    npos = M + 1 - nb
    positive = np.column_stack((np.arange(nb, nb + npos),
                                basis.energies[nb:nb + npos]))
    files = [os.path.join(out, 'bound_energies.csv'),
             os.path.join(out, 'positive_energies.csv')]
    _write_csv(files[0], bound, ['m', 'E_exact', 'E_numeric'])
    _write_csv(files[1], positive, ['n', 'E'])
    return files


def cmd_dipole(cfg, verbose=0) -> list:
    """Write the bound-state couplings for k = 1, 2, 3 and the dipole report.

    Args:
        cfg (ScenarioConfig): scenario configuration.

    Returns:
        list: files written.
    """
    params = cfg.params()
    out = _outdir(cfg)
    model = cfg.dipole_model()
    reduced = _reduced(cfg, model, verbose)
    nb = reduced.n_bound
    kmax = min(3, nb - 1)
    table = np.full((nb - 1, kmax + 1), np.nan)
    table[:, 0] = np.arange(nb - 1)
    for k in range(1, kmax + 1):
        c = couplings(reduced, k)
        table[:c.size, k] = c
    files = [os.path.join(out, 'couplings.csv'),
             os.path.join(out, 'dipole.json')]
    _write_csv(files[0], table,
               ['m'] + ['k' + str(k) for k in range(1, kmax + 1)])
    report = {
        'terms': [{'a': t.a, 'd': t.d, 'gamma': t.gamma}
                  for t in model.terms],
        'q_e_debye_per_nm': model.q_e,
        'slope': model.slope(),
        'residual_rms_debye': model.residual_rms,
    }
    if nb > 6:
        report['trap_state'] = trap_state(
            reduced, (5, min(50, nb - 2)))
        log.info('Weakest nearest-neighbour coupling at m = %d',
                 report['trap_state'])
    _write_json(files[1], report)
    if cfg.outputs['plots']:
        from morsedyn.plot import plot_couplings, plot_potential_dipole
        files.append(os.path.join(out, 'couplings.png'))
        plot_couplings(reduced, kmax, fname=files[-1], show=False)
        files.append(os.path.join(out, 'dipole.png'))
        plot_potential_dipole(params, model,
                              cfg.molecule['equilibrium_nm'],
                              fname=files[-1], show=False)
    return files


def _propagate(cfg, reduced, pulses, verbose=0):
    i = cfg.integrator
    return propagate(reduced, pulses, cfg.t_span(), initial=0, tol=i['tol'],
                     stride=i['output_stride_T'], method=i['method'],
                     picture=i['picture'], max_drift=i['max_drift'],
                     verbose=verbose)


def cmd_simulate(cfg, verbose=0) -> list:
    """Propagate the scenario and write the trajectory and a summary.

    Args:
        cfg (ScenarioConfig): scenario configuration.

    Returns:
        list: files written.
    """
    out = _outdir(cfg)
    model = cfg.dipole_model()
    reduced = _reduced(cfg, model, verbose)
    pulses = cfg.pulse_specs()
    for k, p in enumerate(pulses):
        if p.chirp.adiabaticity is not None:
            log.info('Pulse %d climbs with adiabaticity %.2f per crossing',
                     k, p.chirp.adiabaticity)
    log.info('Propagating %d pulse(s) over %s T', len(pulses), cfg.t_span())
    record = _propagate(cfg, reduced, pulses, verbose)
    windows = pulse_windows(pulses)
    log.info('Final dissociation probability %.6f (max norm drift %.2e)',
             record.final_dissociation, record.max_norm_drift)
    files = [os.path.join(out, 'trajectory.csv'),
             os.path.join(out, 'summary.json')]
    record.to_csv(files[0], cfg.outputs['population_columns'])
    log.info('Wrote %s', files[0])
    _write_json(files[1], record.summary(windows))
    if cfg.outputs['plots']:
        from morsedyn.plot import plot_trajectory
        files.append(os.path.join(out, 'trajectory.png'))
        plot_trajectory(record, pulses, reduced.params, reduced.q_e,
                        fname=files[-1], show=False)
    return files


def cmd_design_chirp(cfg, m_start, m_end, step, pulse=0, t_start=None,
                     t_end=None, margin=0.0, adiabatic=False) -> dict:
    """Design a ladder-resonant chirp across the support of a pulse.

    Args:
        cfg (ScenarioConfig): scenario configuration.
        m_start (int): first lower state.
        m_end (int): last lower state.
        step (int): 1 or 2.
        pulse (int, optional): index of the pulse whose envelope is used.
          Defaults to 0.
        t_start (float, optional): start of the sweep in units of T,
          overrides the pulse support.
        t_end (float, optional): end of the sweep in units of T.
        margin (float, optional): detuning of the end knots in levels.
          Defaults to 0.
        adiabatic (bool, optional): pace the sweep so that every crossing
          has the same adiabaticity. Defaults to False.

    Returns:
        dict: chirp description in configuration format.
    """
    specs = []
    if adiabatic or t_start is None or t_end is None:
        specs = cfg.pulse_specs()
        if not 0 <= pulse < len(specs):
            raise ValueError(
                'Pulse index ' + str(pulse) + ' is out of range; give '
                '--t-start and --t-end instead.')
    if adiabatic:
        model = cfg.dipole_model()
        chirp = adiabatic_chirp(
            specs[pulse], cfg.params(), model.q_e, cfg.bound_couplings(step),
            m_start, m_end, step, margin=margin)
        if chirp.adiabaticity is not None:
            log.info('Adiabaticity per crossing %.3f', chirp.adiabaticity)
    else:
        if t_start is None or t_end is None:
            t0, t1 = pulse_support(specs[pulse], LADDER_SUPPORT)
            t_start = t0 if t_start is None else t_start
            t_end = t1 if t_end is None else t_end
        chirp = design_chirp(cfg.params(), m_start, m_end, step, t_start,
                             t_end, margin=margin)
    if chirp.times.size == 1:
        return {'kind': 'constant', 'omega': float(chirp.omegas[0])}
    return {'kind': 'piecewise', 'times_T': chirp.times.tolist(),
            'omegas': chirp.omegas.tolist()}


def cmd_certify(cfg, verbose=0):
    """Certify the dipole recurrences against quadrature.

    Args:
        cfg (ScenarioConfig): scenario configuration.

    Returns:
        tuple: (report, file written).
    """
    out = _outdir(cfg)
    c = cfg.certify
    # Elements up to max_index do not depend on the truncation
    N = min(cfg.truncation['N'], c['max_index'])
    report = certify(cfg.params(), cfg.dipole_model(), N,
                     sample_count=c['samples'], threshold=c['threshold'],
                     seed=c['seed'], max_index=c['max_index'],
                     verbose=verbose)
    file = os.path.join(out, 'certify.json')
    report.to_json(file)
    log.info('Wrote %s', file)
    log.info('Worst deviation %.3e at %s: %s', report.worst,
             report.worst_index, 'PASS' if report.passed else 'FAIL')
    return report, file


def _sweep_task(args):
    cfg, reduced, scale = args
    record = _propagate(cfg, reduced, cfg.pulse_specs(scale))
    return record.final_dissociation, record.max_norm_drift


def cmd_sweep(cfg, verbose=0) -> list:
    """Final dissociation probability for scaled peak fields.

    Args:
        cfg (ScenarioConfig): scenario configuration.

    Returns:
        list: files written.
    """
    out = _outdir(cfg)
    reduced = _reduced(cfg, cfg.dipole_model(), verbose)
    scales = list(cfg.sweep['field_scale'])
    args = [(cfg, reduced, s) for s in scales]
    if cfg.sweep['parallel']:
        pool = multiprocessing.Pool(processes=ui.num_workers)
        results = pool.map(_sweep_task, args)
        pool.close()
        pool.join()
    else:
        results = []
        for a in args:
            log.info('Field scale %g', a[2])
            results.append(_sweep_task(a))
    table = np.column_stack((scales, np.array(results)))
    file = os.path.join(out, 'sweep.csv')
    _write_csv(file, table, ['field_scale', 'P_final', 'max_norm_drift'])
    return [file]


def _parser():
    parser = argparse.ArgumentParser(
        prog='morsedyn',
        description='Ladder climbing and dissociation of Morse oscillators '
        'driven by chirped laser pulses.')
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group(required=True)
    source.add_argument('--config', help='scenario configuration (JSON)')
    source.add_argument('--preset', help='shipped configuration, e.g. '
                        'no-paper')
    common.add_argument('--out', help='output directory')
    common.add_argument('--seed', type=int, help='certification seed')
    common.add_argument('--tol', type=float, help='integrator tolerance')
    common.add_argument('--quiet', action='store_true',
                        help='only report warnings and errors')
    common.add_argument('--verbose', action='store_true',
                        help='show progress bars')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('spectrum', parents=[common],
                   help='bound and positive energies')
    sub.add_parser('dipole', parents=[common],
                   help='dipole couplings between bound states')
    sub.add_parser('simulate', parents=[common],
                   help='propagate the pulse sequence')
    p = sub.add_parser('design-chirp', parents=[common],
                       help='ladder-resonant chirp for a pulse')
    p.add_argument('--m-start', type=int, required=True)
    p.add_argument('--m-end', type=int, required=True)
    p.add_argument('--step', type=int, default=1, choices=[1, 2])
    p.add_argument('--pulse', type=int, default=0,
                   help='index of the pulse whose support is used')
    p.add_argument('--t-start', type=float)
    p.add_argument('--t-end', type=float)
    p.add_argument('--margin', type=float, default=0.0,
                   help='detuning of the end knots in levels')
    p.add_argument('--adiabatic', action='store_true',
                   help='equal adiabaticity at every crossing')
    sub.add_parser('certify', parents=[common],
                   help='check recurrences against quadrature')
    sub.add_parser('sweep', parents=[common],
                   help='final dissociation against field scale')
    return parser


def _config(args):
    cfg = load_config(args.config) if args.config else preset(args.preset)
    if args.out is not None:
        cfg.outputs['dir'] = args.out
    if args.seed is not None:
        cfg.certify['seed'] = args.seed
    if args.tol is not None:
        if not args.tol > 0:
            raise ConfigError('--tol must be positive.')
        cfg.integrator['tol'] = args.tol
    return cfg


def main(argv=None) -> int:
    """Run the command line interface.

    Args:
        argv (list, optional): arguments. Defaults to sys.argv[1:].

    Returns:
        int: exit code. 0 on success, 1 on a computation error, 2 on an
        invalid configuration and 3 when certification fails.
    """
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)
    verbose = 1 if args.verbose else 0
    try:
        cfg = _config(args)
        if args.command == 'spectrum':
            cmd_spectrum(cfg, verbose)
        elif args.command == 'dipole':
            cmd_dipole(cfg, verbose)
        elif args.command == 'simulate':
            cmd_simulate(cfg, verbose)
        elif args.command == 'design-chirp':
            chirp = cmd_design_chirp(cfg, args.m_start, args.m_end,
                                     args.step, args.pulse, args.t_start,
                                     args.t_end, args.margin,
                                     args.adiabatic)
            _write_json(os.path.join(_outdir(cfg), 'chirp.json'), chirp)
            print(json.dumps(chirp, indent=2))
        elif args.command == 'certify':
            report, _ = cmd_certify(cfg, verbose)
            if not report.passed:
                return EXIT_CERTIFY
        elif args.command == 'sweep':
            cmd_sweep(cfg, verbose)
    except ConfigError as e:
        log.error('%s', e)
        return EXIT_CONFIG
    except (DipoleFitError, RecurrenceError, SpectralError,
            IntegrationError, OracleError, ValueError) as e:
        log.error('%s: %s', type(e).__name__, e)
        return EXIT_ERROR
    return 0


if __name__ == '__main__':
    sys.exit(main())
