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
import time
import threading
import dataclasses
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from numpy.random import SeedSequence, default_rng

from .experiment import ExperimentSpec, ResultRow
from .scheme import ResultType
from ..common.channel import (
    ChannelRealization,
    DigitalTarget,
    SystemConfig,
    generate_channel,
    optimal_precoder_combiner,
)
from ..common.errors import ConfigError, HpdsimError
from ..common.metrics import metrics_record, spectral_efficiency
from ..common.misc import derive_seed
from ..logging import (
    dbg,
    verbose,
    info,
    rule,
    warn,
    err,
)

registered_schemes = {}


def register_scheme(name):
    def inner(cls):
        cls.name = name
        registered_schemes[name] = cls
        return cls

    return inner


class Case(NamedTuple):
    scheme: str
    n_c: int
    q: int


@dataclass
class TrialOutcome:
    case: Case
    se: Optional[List[float]] = None
    ee: Optional[List[float]] = None
    residual: float = 0.0
    wall: float = 0.0
    error: Optional[str] = None


class SchemeManager:
    """
    The SchemeManager runs the Monte Carlo trials of an experiment.

    Every trial draws its channel from ``(master_seed, trial)`` and every
    scheme designs from a seed derived from ``(master_seed, trial,
    scheme)``, so results do not depend on the order of the schemes or
    on the number of threads.
    """

    def __init__(self, spec: ExperimentSpec, threads: Optional[int] = None):
        self.spec = spec

        unknown = [s for s in spec.schemes if s not in registered_schemes]
        if unknown:
            raise ConfigError(
                f'Unknown schemes {", ".join(unknown)}. Known schemes are: {", ".join(registered_schemes)}'
            )

        # Set the number of threads to the number of cores
        # if threads=None
        if not threads:
            threads = os.cpu_count()

        # Fallback threads
        if not threads:
            threads = 4

        self.threads = threads
        self.canceled = threading.Event()
        self.result_type = ResultType.UNKNOWN

        self.cases = self.enumerate_cases()
        for case in self.cases:
            # Raises for group counts that do not fit either side
            self.case_config(case).receiver()

        dbg(
            f'Scheme manager: {len(self.cases)} cases, {spec.trials} trials, {threads} threads'
        )

    def scheme(self, name):
        return registered_schemes[name](self.spec.solver_opts)

    def enumerate_cases(self) -> List[Case]:
        cases = []
        for name in self.spec.schemes:
            cls = registered_schemes[name]
            if cls.architecture == 'fully_digital':
                cases.append(Case(name, self.spec.system.n_ps, 1))
                continue
            for n_c in self.spec.n_ps_values:
                if cls.grouped:
                    for q in self.spec.groups_values:
                        cases.append(Case(name, n_c, q))
                else:
                    cases.append(Case(name, n_c, 1))
        return cases

    def case_config(self, case: Case) -> SystemConfig:
        return dataclasses.replace(
            self.spec.system, n_ps=case.n_c, groups=case.q
        )

    def target(self, trial: int) -> Tuple[ChannelRealization, DigitalTarget]:
        rng = default_rng(SeedSequence([self.spec.master_seed, trial]))
        channel = generate_channel(self.spec.system, self.spec.channel, rng)
        return channel, optimal_precoder_combiner(
            channel, self.spec.system.n_streams
        )

    def design(self, case: Case, target: DigitalTarget, trial: int):
        """Designs the precoder and the combiner of one case."""
        scheme = self.scheme(case.scheme)
        cfg = self.case_config(case)
        seed = derive_seed(self.spec.master_seed, trial, case.scheme)
        tx = scheme.design(target.f_opt, cfg, seed)
        rx = scheme.design(
            target.w_opt,
            cfg.receiver(),
            derive_seed(self.spec.master_seed, trial, case.scheme, 'rx'),
            normalize=False,
        )
        return tx, rx

    def run_case(self, case: Case, channel, target, trial) -> TrialOutcome:
        spec = self.spec
        scheme = self.scheme(case.scheme)
        cfg = self.case_config(case)

        try:
            start = time.perf_counter()
            tx, rx = self.design(case, target, trial)
            wall = time.perf_counter() - start

            counts = scheme.counts(cfg)
            se, ee = [], []
            for snr_db in spec.snr_grid_db:
                p_tx = spec.noise_var * 10 ** (snr_db / 10)
                record = metrics_record(
                    spectral_efficiency(channel, tx, rx, p_tx, spec.noise_var),
                    p_tx,
                    spec.noise_var,
                    cfg,
                    counts,
                    spec.power_model,
                    scheme.rf_chains(cfg),
                )
                se.append(record.se)
                ee.append(record.ee)
        except (HpdsimError, np.linalg.LinAlgError) as e:
            err(f'Trial {trial} of {case.scheme} (n_c={case.n_c}, q={case.q}) failed: {e}')
            return TrialOutcome(case, error=str(e))

        return TrialOutcome(
            case,
            se=se,
            ee=ee,
            residual=scheme.residual(target.f_opt, tx),
            wall=wall if spec.record_timing else 0.0,
        )

    def run_trial(self, trial: int) -> Optional[List[TrialOutcome]]:
        if self.canceled.is_set():
            return None

        channel, target = self.target(trial)
        outcomes = []
        for case in self.cases:
            if self.canceled.is_set():
                return None
            outcomes.append(self.run_case(case, channel, target, trial))

        verbose(f'Trial {trial} done.')
        return outcomes

    def cancel(self):
        info('Canceling the remaining trials.')
        self.canceled.set()

    def run(self) -> List[ResultRow]:
        spec = self.spec
        rule(f'Running {spec.trials} trials')

        if self.threads > 1 and spec.trials > 1:
            with ThreadPool(processes=min(self.threads, spec.trials)) as pool:
                pending = [
                    pool.apply_async(self.run_trial, (trial,))
                    for trial in range(spec.trials)
                ]
                results = [result.get() for result in pending]
        else:
            results = [self.run_trial(trial) for trial in range(spec.trials)]

        if self.canceled.is_set() or any(r is None for r in results):
            self.result_type = ResultType.CANCELED
            warn('Experiment canceled, no results.')
            return []

        rows = self.aggregate(results)
        failures = sum(row.failures for row in rows)
        self.result_type = ResultType.ERROR if failures else ResultType.SUCCESS
        rule(f'Completed {spec.trials} trials: {self.result_type}')
        return rows

    def aggregate(self, results: List[List[TrialOutcome]]) -> List[ResultRow]:
        spec = self.spec
        rows = []
        for index, case in enumerate(self.cases):
            outcomes = [trial[index] for trial in results]
            good = [o for o in outcomes if o.error is None]
            failures = len(outcomes) - len(good)
            if failures:
                warn(f'{case.scheme}: {failures} of {spec.trials} trials failed.')

            shape = (len(good), len(spec.snr_grid_db))
            se = np.array([o.se for o in good], dtype=float).reshape(shape)
            ee = np.array([o.ee for o in good], dtype=float).reshape(shape)
            wall = sum(o.wall for o in good)
            residual = (
                float(np.mean([o.residual for o in good])) if good else np.nan
            )

            for j, snr_db in enumerate(spec.snr_grid_db):
                rows.append(
                    ResultRow(
                        scheme=case.scheme,
                        snr_db=float(snr_db),
                        n_c=case.n_c,
                        q=case.q,
                        trials=spec.trials,
                        se_mean=float(np.mean(se[:, j])) if good else np.nan,
                        se_stddev=float(np.std(se[:, j])) if good else np.nan,
                        ee_mean=float(np.mean(ee[:, j])) if good else np.nan,
                        wall_time_seconds=wall,
                        residual_mean=residual,
                        failures=failures,
                    )
                )

        return sorted(rows, key=ResultRow.sort_key)


def run_experiment(
    spec: ExperimentSpec, threads: Optional[int] = None
) -> List[ResultRow]:
    return SchemeManager(spec, threads).run()


class ConvergencePoint(NamedTuple):
    scheme: str
    iteration: int
    objective: float
    residual: float


def convergence_trace(
    spec: ExperimentSpec, scheme: str, trial: int = 0
) -> List[ConvergencePoint]:
    """Per iteration objective and residual of one transmit design."""
    manager = SchemeManager(dataclasses.replace(spec, schemes=[scheme]), 1)
    _, target = manager.target(trial)
    case = manager.cases[0]
    tx = manager.scheme(scheme).design(
        target.f_opt,
        manager.case_config(case),
        derive_seed(spec.master_seed, trial, scheme),
    )
    report = getattr(tx, 'report', None)
    if report is None:
        return []
    return [
        ConvergencePoint(scheme, n + 1, objective, residual)
        for n, (objective, residual) in enumerate(
            zip(report.objective, report.residual)
        )
    ]


def design_pair(spec: ExperimentSpec, scheme: str, trial: int = 0):
    """Precoder and combiner of the first case of one scheme."""
    manager = SchemeManager(dataclasses.replace(spec, schemes=[scheme]), 1)
    _, target = manager.target(trial)
    return manager.design(manager.cases[0], target, trial)
