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
import csv
import json
import math

import numpy as np

from .errors import ConfigError, OutputError
from .misc import mkdirp
from ..logging import dbg, info

FORMATS = ('csv', 'jsonl')

# CSV column and the ResultRow attribute it is read from
RESULT_COLUMNS = [
    ('scheme', 'scheme'),
    ('snr_db', 'snr_db'),
    ('n_c', 'n_c'),
    ('q', 'q'),
    ('trials', 'trials'),
    ('se_mean', 'se_mean'),
    ('se_std', 'se_stddev'),
    ('ee_mean', 'ee_mean'),
    ('wall_s', 'wall_time_seconds'),
    ('residual_mean', 'residual_mean'),
    ('failures', 'failures'),
]


def format_value(value):
    """Floats with 6 significant digits, everything else as is."""
    if isinstance(value, float):
        return format(value, '.6g')
    return value


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(format(value, '.6g'))
    return value


def write_table(records, header, path, format='csv'):
    """
    Writes tuples of values under the given header as CSV or JSON lines.
    """
    if format not in FORMATS:
        raise ConfigError(
            f'Unknown output format {format!r}, expected one of {", ".join(FORMATS)}.'
        )

    try:
        directory = os.path.dirname(os.path.abspath(path))
        mkdirp(directory)
        with open(path, 'w', newline='') as ofile:
            if format == 'csv':
                writer = csv.writer(ofile, lineterminator='\n')
                writer.writerow(header)
                for record in records:
                    writer.writerow([format_value(v) for v in record])
            else:
                for record in records:
                    entry = {
                        key: _json_value(value)
                        for key, value in zip(header, record)
                    }
                    ofile.write(json.dumps(entry) + '\n')
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e

    dbg(f"Wrote {len(records)} records to '{os.path.relpath(path)}'.")


def emit_results(rows, path, format='csv'):
    """
    Writes sweep results sorted by scheme and SNR, one row per line.
    """
    header = [column for column, _ in RESULT_COLUMNS]
    records = [
        tuple(getattr(row, attribute) for _, attribute in RESULT_COLUMNS)
        for row in sorted(rows, key=lambda r: r.sort_key())
    ]
    write_table(records, header, path, format)
    info(f"Results written to '{os.path.relpath(path)}'.")


def emit_power_report(rows, path, format='csv'):
    header = ['architecture', 'n_ps', 'ps_power_w', 'n_sw', 'sw_power_w', 'total_w']
    write_table([tuple(row) for row in rows], header, path, format)


def emit_convergence(points, path, format='csv'):
    header = ['scheme', 'iteration', 'objective', 'residual']
    write_table([tuple(point) for point in points], header, path, format)


def write_matrix(path, matrix):
    """
    Dumps a complex matrix as text: a ``rows cols`` header line, then one
    line per row with real and imaginary part of every entry.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    rows, cols = matrix.shape
    pairs = np.empty((rows, 2 * cols))
    pairs[:, 0::2] = matrix.real
    pairs[:, 1::2] = matrix.imag
    try:
        np.savetxt(
            path, pairs, fmt='%.12e', header=f'{rows} {cols}', comments=''
        )
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e


def read_matrix(path) -> np.ndarray:
    with open(path, 'r') as ifile:
        rows, cols = (int(v) for v in ifile.readline().split())
        pairs = np.loadtxt(ifile, ndmin=2).reshape(rows, 2 * cols)
    return pairs[:, 0::2] + 1j * pairs[:, 1::2]


def markdown_summary(rows, title='hpdsim Summary'):
    """
    Returns the sweep results as a Markdown table, to be printed
    with rich or saved next to the results.
    """
    sp = [16, 8, 5, 4, 10, 10, 12, 10, 9]

    result = f'\n# {title}\n\n'
    result += ''.join(
        [
            f'| {"Scheme": ^{sp[0]}} ',
            f'| {"SNR dB": ^{sp[1]}} ',
            f'| {"N_c": ^{sp[2]}} ',
            f'| {"q": ^{sp[3]}} ',
            f'| {"SE": ^{sp[4]}} ',
            f'| {"SE std": ^{sp[5]}} ',
            f'| {"EE": ^{sp[6]}} ',
            f'| {"Wall s": ^{sp[7]}} ',
            f'| {"Failures": ^{sp[8]}} |\n',
        ]
    )
    result += ''.join(
        [f'| :{"-"*(sp[0]-1)} ']
        + [f'| {"-"*(width-1)}: ' for width in sp[1:-1]]
        + [f'| {"-"*(sp[-1]-1)}: |\n']
    )

    for row in sorted(rows, key=lambda r: r.sort_key()):
        result += ''.join(
            [
                f'| {row.scheme: <{sp[0]}} ',
                f'| {format_value(row.snr_db): >{sp[1]}} ',
                f'| {row.n_c: >{sp[2]}} ',
                f'| {row.q: >{sp[3]}} ',
                f'| {format_value(row.se_mean): >{sp[4]}} ',
                f'| {format_value(row.se_stddev): >{sp[5]}} ',
                f'| {format_value(row.ee_mean): >{sp[6]}} ',
                f'| {format_value(row.wall_time_seconds): >{sp[7]}} ',
                f'| {row.failures: >{sp[8]}} |\n',
            ]
        )

    return result


def markdown_power_report(rows):
    result = '\n# Power Consumption of the Analog Networks\n\n'
    result += '| Architecture | PS / power | SW / power | Total |\n'
    result += '| :--- | ---: | ---: | ---: |\n'
    for row in rows:
        result += (
            f'| {row.architecture} '
            f'| {row.n_ps} / {row.ps_power:.4g} W '
            f'| {row.n_sw} / {row.sw_power:.4g} W '
            f'| {row.total:.4g} W |\n'
        )
    return result
