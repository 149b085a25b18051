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
import sys
import time
import signal
import logging
import argparse
import dataclasses
from typing import List
from datetime import timedelta
from rich.markdown import Markdown

from .__version__ import __version__
from .common.config_read import read_experiment
from .common.errors import (
    ConfigError,
    ExitCode,
    HpdsimError,
    exit_code_for,
)
from .common.misc import mkdirp
from .common.results_write import (
    emit_convergence,
    emit_power_report,
    emit_results,
    markdown_power_report,
    markdown_summary,
    write_matrix,
)
from .scheme import (
    ExperimentSpec,
    SchemeManager,
    convergence_trace,
    design_pair,
    power_report,
    registered_schemes,
)
from .scheme.scheme import ResultType
from .logging import (
    LevelFilter,
    console,
    set_log_level,
    register_additional_handler,
    deregister_additional_handler,
)
from .logging import (
    dbg,
    info,
    success,
    warn,
    err,
)


def build_parser() -> argparse.ArgumentParser:
    # Flags shared by all subcommands
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-c',
        '--config',
        type=str,
        help='experiment file (YAML), the defaults are used if omitted',
    )
    common.add_argument(
        '-o',
        '--out',
        type=str,
        help='output file, or output directory for "design"',
    )
    common.add_argument(
        '--format',
        type=str,
        choices=['csv', 'jsonl'],
        default='csv',
        help='format of the result tables',
    )
    common.add_argument(
        '--seed',
        type=int,
        help='master seed, overrides the value of the experiment file',
    )
    common.add_argument(
        '-j',
        '--threads',
        type=int,
        help='maximum number of worker threads, by default one per core',
    )
    common.add_argument(
        '-l',
        '--log-level',
        type=str,
        choices=['ALL', 'DEBUG', 'TRACE', 'VERBOSE', 'INFO', 'WARNING', 'ERROR'],
        default='INFO',
        help='set the log level for a more fine-grained output',
    )

    parser = argparse.ArgumentParser(
        prog='hpdsim',
        description="""Designs hybrid precoders with switch and phase shifter
        networks and evaluates them in seeded Monte Carlo experiments.""",
    )
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {__version__}'
    )

    subparsers = parser.add_subparsers(dest='command', required=True)

    design = subparsers.add_parser(
        'design',
        parents=[common],
        help='design one precoder and combiner and dump the matrices',
    )
    design.add_argument(
        '-s',
        '--scheme',
        choices=sorted(registered_schemes),
        default='vps_hpd',
        help='the precoding scheme',
    )
    design.add_argument(
        '--trial',
        type=int,
        default=0,
        help='index of the channel realization',
    )

    subparsers.add_parser(
        'sweep',
        parents=[common],
        help='run the Monte Carlo SNR sweep of the experiment',
    )

    power = subparsers.add_parser(
        'power',
        parents=[common],
        help='report the power of the analog networks',
    )
    power.add_argument(
        '-q',
        '--groups',
        type=int,
        nargs='+',
        default=[2, 4],
        help='group counts of the group connected rows',
    )

    convergence = subparsers.add_parser(
        'convergence',
        parents=[common],
        help='trace objective and residual per iteration of one design',
    )
    convergence.add_argument(
        '-s',
        '--scheme',
        choices=sorted(registered_schemes),
        default='vps_hpd',
        help='the precoding scheme',
    )
    convergence.add_argument(
        '--trial',
        type=int,
        default=0,
        help='index of the channel realization',
    )

    return parser


def load_spec(args) -> ExperimentSpec:
    if args.config:
        return read_experiment(args.config, seed=args.seed)

    info('No experiment file given, using the default experiment.')
    spec = ExperimentSpec()
    if args.seed is not None:
        spec = dataclasses.replace(spec, master_seed=args.seed)
    return spec


def output_path(args) -> str:
    if args.out:
        return args.out
    if args.command == 'design':
        return 'design'
    return f'{args.command}.{args.format}'


def log_handlers(directory) -> List[logging.Handler]:
    """Logs warnings, errors and everything down to VERBOSE to files."""
    mkdirp(directory)

    handlers: List[logging.Handler] = []
    for level in ['WARNING', 'ERROR']:
        path = os.path.join(directory, f'{level.lower()}.log')
        handler = logging.FileHandler(path, mode='a+')
        handler.setLevel(level)
        handler.addFilter(LevelFilter([level]))
        handlers.append(handler)
        register_additional_handler(handler)

    path = os.path.join(directory, 'run.log')
    handler = logging.FileHandler(path, mode='a+')
    handler.setLevel('VERBOSE')
    handlers.append(handler)
    register_additional_handler(handler)

    return handlers


def run_design(args, spec) -> ExitCode:
    out = output_path(args)
    mkdirp(out)

    tx, rx = design_pair(spec, args.scheme, args.trial)

    matrices = {}
    for prefix, precoder in (('F', tx), ('W', rx)):
        # The fully digital scheme has no analog network
        if hasattr(precoder, 'switches'):
            matrices[f'{prefix}_S'] = precoder.switches.entries
            matrices[f'{prefix}_P'] = precoder.phases.entries
            matrices[f'{prefix}_BB'] = precoder.digital
        else:
            matrices[f'{prefix}_BB'] = precoder

    names = {'F_S': 'S_t', 'F_P': 'P_t'}
    for key, matrix in matrices.items():
        path = os.path.join(out, f'{names.get(key, key)}.txt')
        write_matrix(path, matrix)
        dbg(f"Wrote '{path}'.")

    report = getattr(tx, 'report', None)
    if report is not None and report.residual:
        info(
            f'{args.scheme}: {report.iterations} iterations, residual {report.residual[-1]:.6g} ({report.stop_reason}).'
        )
    success(f"Matrices written to '{out}'.")
    return ExitCode.SUCCESS


def run_sweep(args, spec) -> ExitCode:
    out = output_path(args)
    manager = SchemeManager(spec, args.threads)

    # Ctrl+C to cancel the remaining trials
    previous = signal.signal(
        signal.SIGINT, lambda sig, frame: manager.cancel()
    )
    try:
        rows = manager.run()
    finally:
        signal.signal(signal.SIGINT, previous)

    if manager.result_type == ResultType.CANCELED:
        return ExitCode.CANCELED

    emit_results(rows, out, args.format)

    summary = markdown_summary(rows)
    console.print(Markdown(summary))

    with open(
        os.path.join(os.path.dirname(os.path.abspath(out)), 'summary.md'), 'w'
    ) as ofile:
        ofile.write(summary)

    if manager.result_type == ResultType.ERROR:
        return ExitCode.SOLVER
    return ExitCode.SUCCESS


def run_power(args, spec) -> ExitCode:
    rows = power_report(spec.system, spec.power_model, args.groups)
    console.print(Markdown(markdown_power_report(rows)))
    if args.out:
        emit_power_report(rows, args.out, args.format)
    return ExitCode.SUCCESS


def run_convergence(args, spec) -> ExitCode:
    points = convergence_trace(spec, args.scheme, args.trial)
    if not points:
        warn(f'{args.scheme} does not iterate, nothing to trace.')
    emit_convergence(points, output_path(args), args.format)
    return ExitCode.SUCCESS


COMMANDS = {
    'design': run_design,
    'sweep': run_sweep,
    'power': run_power,
    'convergence': run_convergence,
}


def main(argv=None) -> int:
    """
    Runs one subcommand and returns its exit code.
    """

    parser = build_parser()
    args = parser.parse_args(argv)

    # Set the log level
    if args.log_level:
        set_log_level(args.log_level)

    # Log files go next to the output
    handlers = []
    if args.command != 'power' or args.out:
        out = output_path(args)
        directory = (
            out
            if args.command == 'design'
            else os.path.dirname(os.path.abspath(out))
        )
        try:
            handlers = log_handlers(directory)
        except OSError as e:
            err(f"Could not create the log files in '{directory}': {e}")
            return ExitCode.IO

    timestamp_start = time.time()

    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError(f'--threads must be positive, got {args.threads}.')

        spec = load_spec(args)
        returncode = COMMANDS[args.command](args, spec)
    except (HpdsimError, OSError) as e:
        returncode = exit_code_for(e)
        err(f'{type(e).__name__}: {e}')
    finally:
        for registered_handler in handlers:
            deregister_additional_handler(registered_handler)
            registered_handler.close()

    delta = str(timedelta(seconds=time.time() - timestamp_start)).split('.')[0]
    dbg(f'{args.command} finished in {delta} with exit code {int(returncode)}.')

    return int(returncode)


def cli():
    sys.exit(main())


if __name__ == '__main__':
    cli()
