# Copyright 2024 Efabless Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import os
import dataclasses

import yaml

from .channel import ChannelParams, SystemConfig
from .errors import ConfigError
from .metrics import PowerModel
from ..precoder.core import SolverOptions
from ..scheme import ExperimentSpec, registered_schemes
from ..logging import dbg, info, warn, err

SECTIONS = {
    'system': SystemConfig,
    'channel': ChannelParams,
    'solver_opts': SolverOptions,
    'power_model': PowerModel,
}

TOP_LEVEL = {
    'system',
    'channel',
    'schemes',
    'snr_grid_db',
    'trials',
    'solver_opts',
    'power_model',
    'master_seed',
    'n_ps_grid',
    'groups_grid',
    'noise_var',
    'record_timing',
}


def read_experiment(filename, seed=None) -> ExperimentSpec:
    """
    Reads an experiment file (YAML).

    :param seed: Overrides ``master_seed`` of the file if given
    """
    if not os.path.isfile(filename):
        err(f'No such file {filename}')
        raise ConfigError(f'No such file {filename}')

    try:
        with open(filename, 'r') as ifile:
            data = yaml.safe_load(ifile)
    except yaml.YAMLError as e:
        err(f'Could not parse {filename}: {e}')
        raise ConfigError(f'Could not parse {filename}') from e

    if data is None:
        data = {}

    if seed is not None:
        data['master_seed'] = seed

    dbg(f'Read experiment from {filename}.')
    return validate_experiment(data)


def _section(name, cls, data, problems):
    if name not in data:
        warn(f'No {name} section given, using the defaults.')
        return cls()

    section = data[name]
    if not isinstance(section, dict):
        problems.append(f'Section "{name}" must be a mapping.')
        return None

    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(section) - known)
    for key in unknown:
        problems.append(f'Unknown key "{key}" in section "{name}".')
    if unknown:
        return None

    try:
        return cls(**section)
    except (ConfigError, TypeError) as e:
        problems.append(f'Invalid section "{name}": {e}')
        return None


def validate_experiment(data) -> ExperimentSpec:
    """
    Builds an ExperimentSpec from parsed YAML. Every problem is logged,
    then a single ConfigError is raised.
    """
    if not isinstance(data, dict):
        err('Experiment file must contain a mapping.')
        raise ConfigError('Experiment file must contain a mapping.')

    problems = []

    for key in sorted(set(data) - TOP_LEVEL):
        problems.append(f'Unknown key "{key}".')

    kwargs = {}
    for name, cls in SECTIONS.items():
        kwargs[name] = _section(name, cls, data, problems)

    for key in (
        'schemes',
        'snr_grid_db',
        'trials',
        'master_seed',
        'n_ps_grid',
        'groups_grid',
        'noise_var',
        'record_timing',
    ):
        if key in data:
            kwargs[key] = data[key]

    for key in ('schemes', 'snr_grid_db', 'n_ps_grid', 'groups_grid'):
        if key in kwargs and not isinstance(kwargs[key], list):
            problems.append(f'"{key}" must be a list.')

    for name in kwargs.get('schemes', None) or []:
        if name not in registered_schemes:
            problems.append(
                f'Unknown scheme "{name}". Known schemes are: {", ".join(registered_schemes)}'
            )

    if 'record_timing' in kwargs and not isinstance(
        kwargs['record_timing'], bool
    ):
        problems.append('"record_timing" must be true or false.')

    if 'snr_grid_db' in kwargs and isinstance(kwargs['snr_grid_db'], list):
        if not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in kwargs['snr_grid_db']
        ):
            problems.append('"snr_grid_db" must hold numbers.')
        else:
            kwargs['snr_grid_db'] = [float(v) for v in kwargs['snr_grid_db']]

    spec = None
    if not problems:
        try:
            spec = ExperimentSpec(**kwargs)
        except (ConfigError, TypeError) as e:
            problems.append(str(e))

    if not problems:
        grouped = [
            s for s in spec.schemes if registered_schemes[s].grouped
        ]
        if grouped:
            for q in spec.groups_values:
                try:
                    dataclasses.replace(spec.system, groups=q).receiver()
                except ConfigError as e:
                    problems.append(f'Group count {q} does not fit: {e}')

    if problems:
        for problem in problems:
            err(problem)
        raise ConfigError(
            f'Invalid experiment ({len(problems)} problem(s)): {problems[0]}'
        )

    info(
        f'Experiment: {", ".join(spec.schemes)} over {len(spec.snr_grid_db)} SNR points, {spec.trials} trials.'
    )
    return spec
