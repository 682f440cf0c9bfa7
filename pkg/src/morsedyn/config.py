"""Scenario configuration files."""

import os
import json
import copy
from dataclasses import dataclass, field

import numpy as np

from morsedyn import lib
from morsedyn.morse import MorseParameters, derive_params
from morsedyn.dipole import DipoleModel, fit_dipole, read_dipole_samples
from morsedyn.spectral import ReducedSystem, reduced_system, couplings
from morsedyn.pulse import (
    PulseSpec,
    ChirpSchedule,
    chirp_constant,
    chirp_linear,
    chirp_piecewise,
    design_chirp,
    adiabatic_chirp,
    ladder_resonance,
    pulse_support,
)


class ConfigError(ValueError):
    """Raised when a configuration file cannot be parsed or is invalid."""


PRESETS = {
    'no-paper': 'no_paper',
    'no-tuned': 'no_tuned',
}

# Envelope fraction that delimits the sweep of a ladder chirp
LADDER_SUPPORT = 0.05

DEFAULTS = {
    'dipole': {'n_terms': 2, 'fix_d_zero': True},
    'truncation': {'selection': 'lowest'},
    'zero_field': False,
    'integrator': {
        'tol': 1e-9,
        'output_stride_T': 1.0,
        't_start_T': 0.0,
        'method': 'DOP853',
        'picture': 'schrodinger',
        'max_drift': None,
    },
    'outputs': {
        'dir': 'output',
        'population_columns': None,
        'plots': False,
        'cache_dir': None,
    },
    'certify': {
        'samples': 50,
        'threshold': 1e-6,
        'seed': 0,
        'max_index': 60,
    },
    'sweep': {
        'field_scale': [1.0],
        'parallel': False,
    },
}


@dataclass
class ScenarioConfig:
    """Validated scenario configuration.

    Attributes:
        molecule (dict): mass_u, D0_eV, alpha_per_nm, equilibrium_nm.
        dipole (dict): explicit terms or a fit file.
        truncation (dict): N, M and selection.
        pulses (list): pulse descriptions.
        zero_field (bool): run without pulses.
        integrator (dict): tol, output_stride_T, t_start_T, t_end_T, method,
          picture, max_drift.
        outputs (dict): dir, population_columns, plots, cache_dir.
        certify (dict): samples, threshold, seed, max_index.
        sweep (dict): field_scale, parallel.
        source (str): file the configuration was read from.
    """
    molecule: dict
    dipole: dict
    truncation: dict
    pulses: list
    zero_field: bool
    integrator: dict
    outputs: dict
    certify: dict
    sweep: dict
    source: str = '<dict>'
    _params: MorseParameters = field(default=None, repr=False)
    _model: DipoleModel = field(default=None, repr=False)
    _bound: ReducedSystem = field(default=None, repr=False)

    def params(self) -> MorseParameters:
        """Oscillator parameters of the molecule."""
        if self._params is None:
            m = self.molecule
            self._params = derive_params(
                m['mass_u'], m['D0_eV'], m['alpha_per_nm'])
        return self._params

    def dipole_model(self) -> DipoleModel:
        """Dipole model from explicit terms, or fitted to the sample file."""
        if self._model is None:
            self._model = self._dipole_model()
        return self._model

    def _dipole_model(self):
        d = self.dipole
        if 'terms' in d:
            terms = [(t.get('a', 0.0), t.get('d', 0.0), t['gamma'])
                     for t in d['terms']]
            return DipoleModel(terms, q_e=d['q_e_debye_per_nm'],
                               fix_d_zero=d['fix_d_zero'])
        file = d['fit_file']
        if not os.path.isabs(file) and os.path.isfile(self.source):
            file = os.path.join(os.path.dirname(self.source), file)
        samples = read_dipole_samples(file)
        return fit_dipole(
            samples, d['n_terms'], self.molecule['alpha_per_nm'],
            fix_d_zero=d['fix_d_zero'], p0=d.get('p0'),
            q_e=d.get('q_e_debye_per_nm'))

    def bound_couplings(self, step=1) -> np.ndarray:
        """Couplings |mu_{m,m+step}| between the bound states.

        These do not depend on the truncation, so they are computed once
        in the smallest basis that holds all bound states.

        Args:
            step (int, optional): index step. Defaults to 1.

        Returns:
            np.ndarray: entry m is |mu_{m,m+step}|.
        """
        if self._bound is None:
            nb = self.params().n_bound
            self._bound = reduced_system(
                self.params(), self.dipole_model(), nb + 2, nb + 1)
        return couplings(self._bound, step)

    def pulse_specs(self, scale=1.0) -> list:
        """Pulse sequence with chirps resolved.

        Args:
            scale (float, optional): factor applied to all peak fields.
              Defaults to 1.

        Returns:
            list: list of PulseSpec instances. Empty if zero_field is set.
        """
        if self.zero_field:
            return []
        return [_pulse(p, self, scale, 'pulses[' + str(i) + ']')
                for i, p in enumerate(self.pulses)]

    def t_span(self) -> tuple:
        """Integration interval (t_start, t_end) in units of T."""
        return (self.integrator['t_start_T'], self.integrator['t_end_T'])

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in [
            'molecule', 'dipole', 'truncation', 'pulses', 'zero_field',
            'integrator', 'outputs', 'certify', 'sweep']}


def _fail(source, path, msg):
    raise ConfigError(source + ': ' + path + ': ' + msg)


def _require(d, key, source, path, kind=(int, float)):
    if not isinstance(d, dict) or key not in d:
        _fail(source, path + '.' + key, 'missing required key')
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, kind):
        _fail(source, path + '.' + key, 'wrong type ' + type(v).__name__)
    return v


def _positive(d, key, source, path):
    v = _require(d, key, source, path)
    if not v > 0:
        _fail(source, path + '.' + key, 'must be positive, got ' + str(v))
    return v


def _chirp(c, cfg, envelope, path) -> ChirpSchedule:
    params = cfg.params()
    kind = c.get('kind')
    if kind == 'constant':
        return chirp_constant(c['omega'])
    if kind == 'resonance':
        return chirp_constant(ladder_resonance(
            params, c['m'], c.get('step', 1)))
    if kind == 'linear':
        return chirp_linear(c['omega_start'], c['omega_end'],
                            c['t_start_T'], c['t_end_T'])
    if kind == 'piecewise':
        return chirp_piecewise(c['times_T'], c['omegas'])
    if kind == 'ladder':
        if 't_start_T' in c and 't_end_T' in c:
            t0, t1 = c['t_start_T'], c['t_end_T']
        else:
            t0, t1 = pulse_support(
                envelope, c.get('support_fraction', LADDER_SUPPORT))
        return design_chirp(params, c['m_start'], c['m_end'],
                            c.get('step', 1), t0, t1,
                            margin=c.get('margin', 0.0))
    if kind == 'adiabatic':
        step = c.get('step', 1)
        return adiabatic_chirp(
            envelope, params, cfg.dipole_model().q_e,
            cfg.bound_couplings(step), c['m_start'], c['m_end'], step,
            margin=c.get('margin', 0.5),
            fraction=c.get('support_fraction', 0.01))
    raise ValueError(
        path + '.chirp.kind: ' + str(kind) + ' is not a valid chirp. '
        'Options are constant, resonance, linear, piecewise, ladder or '
        'adiabatic.')


def _pulse(p, cfg, scale, path) -> PulseSpec:
    # The ladder chirps depend on the envelope only
    envelope = PulseSpec(
        scale*p['peak_V_per_cm'], p['tau_f_T'], p['tau_t_T'], p['t0_T'],
        chirp_constant(1.0), p.get('phase0_rad', 0.0))
    try:
        chirp = _chirp(p['chirp'], cfg, envelope, path)
    except KeyError as e:
        raise ConfigError(path + '.chirp: missing key ' + str(e))
    envelope.chirp = chirp
    return envelope


def _merge(defaults, values):
    out = copy.deepcopy(defaults)
    out.update(values)
    return out


def parse_config(data: dict, source='<dict>') -> ScenarioConfig:
    """Validate a configuration dictionary.

    Args:
        data (dict): configuration with the keys of `ScenarioConfig`.
        source (str, optional): name of the source used in error messages.

    Raises:
        ConfigError: if a key is missing, has the wrong type or violates a
          constraint. The message names the key path.

    Returns:
        ScenarioConfig: the validated configuration.
    """
    if not isinstance(data, dict):
        _fail(source, '<root>', 'the configuration must be an object')
    unknown = set(data) - {'molecule', 'dipole', 'truncation', 'pulses',
                           'zero_field', 'integrator', 'outputs', 'certify',
                           'sweep', 'description'}
    if unknown:
        _fail(source, '<root>', 'unknown keys ' + ', '.join(sorted(unknown)))

    molecule = data.get('molecule')
    for key in ['mass_u', 'D0_eV', 'alpha_per_nm', 'equilibrium_nm']:
        _positive(molecule, key, source, 'molecule')

    dipole = _merge(DEFAULTS['dipole'], data.get('dipole', {}))
    if 'terms' in dipole:
        if not isinstance(dipole['terms'], list) or not dipole['terms']:
            _fail(source, 'dipole.terms', 'must be a non-empty list')
        for i, t in enumerate(dipole['terms']):
            _require(t, 'gamma', source, 'dipole.terms[' + str(i) + ']')
        _require(dipole, 'q_e_debye_per_nm', source, 'dipole')
    elif 'fit_file' in dipole:
        _require(dipole, 'fit_file', source, 'dipole', str)
        _require(dipole, 'n_terms', source, 'dipole', int)
    else:
        _fail(source, 'dipole', 'needs either terms or fit_file')

    truncation = _merge(DEFAULTS['truncation'], data.get('truncation', {}))
    N = _require(truncation, 'N', source, 'truncation', int)
    M = _require(truncation, 'M', source, 'truncation', int)
    if truncation['selection'] not in ('lowest', 'coupling'):
        _fail(source, 'truncation.selection',
              'must be lowest or coupling, got '
              + str(truncation['selection']))

    zero_field = data.get('zero_field', DEFAULTS['zero_field'])
    if not isinstance(zero_field, bool):
        _fail(source, 'zero_field', 'must be true or false')
    pulses = data.get('pulses', [])
    if not isinstance(pulses, list):
        _fail(source, 'pulses', 'must be a list')
    if not pulses and not zero_field:
        _fail(source, 'pulses',
              'at least one pulse is needed unless zero_field is true')
    for i, p in enumerate(pulses):
        path = 'pulses[' + str(i) + ']'
        _require(p, 'peak_V_per_cm', source, path)
        _positive(p, 'tau_f_T', source, path)
        _positive(p, 'tau_t_T', source, path)
        _require(p, 't0_T', source, path)
        if not isinstance(p.get('chirp'), dict):
            _fail(source, path + '.chirp', 'missing chirp description')

    integrator = _merge(DEFAULTS['integrator'], data.get('integrator', {}))
    _positive(integrator, 'tol', source, 'integrator')
    _positive(integrator, 'output_stride_T', source, 'integrator')
    _require(integrator, 't_end_T', source, 'integrator')
    if integrator['method'] not in ('DOP853', 'RK45'):
        _fail(source, 'integrator.method', 'must be DOP853 or RK45')
    if integrator['picture'] not in ('schrodinger', 'interaction'):
        _fail(source, 'integrator.picture',
              'must be schrodinger or interaction')
    if integrator['max_drift'] is not None:
        _positive(integrator, 'max_drift', source, 'integrator')

    outputs = _merge(DEFAULTS['outputs'], data.get('outputs', {}))
    certify = _merge(DEFAULTS['certify'], data.get('certify', {}))
    _positive(certify, 'threshold', source, 'certify')
    sweep = _merge(DEFAULTS['sweep'], data.get('sweep', {}))

    cfg = ScenarioConfig(molecule, dipole, truncation, pulses, zero_field,
                         integrator, outputs, certify, sweep, source)
    try:
        params = cfg.params()
    except ValueError as e:
        _fail(source, 'molecule', str(e))
    if not N > M > params.floor_s + 1:
        _fail(source, 'truncation',
              'need N > M > floor(s)+1 = ' + str(params.floor_s + 1)
              + ', got N = ' + str(N) + ' and M = ' + str(M))
    try:
        cfg.pulse_specs()
    except ConfigError:
        raise
    except ValueError as e:
        _fail(source, 'pulses', str(e))
    return cfg


def load_config(file) -> ScenarioConfig:
    """Read and validate a JSON configuration file.

    Args:
        file (str or path): the configuration file.

    Raises:
        ConfigError: on syntax errors (with file and line) or invalid
          content (with the key path).

    Returns:
        ScenarioConfig: the validated configuration.
    """
    file = str(file)
    try:
        with open(file, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(
            file + ':' + str(e.lineno) + ':' + str(e.colno) + ': ' + e.msg)
    except OSError as e:
        raise ConfigError(file + ': cannot be read (' + str(e) + ')')
    return parse_config(data, source=file)


def preset(name: str) -> ScenarioConfig:
    """Configuration shipped with morsedyn.

    Args:
        name (str): name of the preset. 'no-paper' is the three-pulse
          scenario with a fixed third pulse, 'no-tuned' replaces the third
          pulse by a ladder climb to the top of the well.

    Raises:
        ConfigError: if the preset does not exist.

    Returns:
        ScenarioConfig: the validated configuration.
    """
    if name not in PRESETS:
        raise ConfigError(
            name + ' is not a preset. Options are '
            + ', '.join(PRESETS) + '.')
    dataset = PRESETS[name]
    return parse_config(lib.fetch(dataset), source=lib.datafile(dataset))
