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
"""
Group connected architecture: the antennas are split into ``q`` equal
groups, every group is served by its own ``n_rf / q`` RF chains and the
per group precoders are stacked block diagonally.
"""

import time
import dataclasses
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import List, Optional

import numpy as np
from numpy.random import Generator, default_rng

from .core import (
    HybridPrecoder,
    PhaseMatrix,
    SolverOptions,
    SolverReport,
    SwitchMatrix,
    normalize_digital,
)
from .frozen_phase import frozen_phase_baseline
from .vps_hpd import vps_hpd
from .vps_lc_hpd import vps_lc_hpd
from ..common.channel import SystemConfig
from ..common.errors import ConfigError, InvalidDimensionError
from ..logging import dbg

SOLVERS = {
    'hpd': vps_hpd,
    'lc_hpd': vps_lc_hpd,
    'frozen_phase': frozen_phase_baseline,
}


@dataclass(frozen=True)
class GroupPlan:
    q: int
    antennas: int
    rf_chains: int
    n_streams: int

    @classmethod
    def from_config(cls, cfg: SystemConfig, n_streams: Optional[int] = None):
        q = cfg.groups
        if q > cfg.n_rf or cfg.n_tx % q or cfg.n_rf % q:
            raise InvalidDimensionError(
                f'{q} groups do not fit {cfg.n_tx} antennas and {cfg.n_rf} RF chains.'
            )
        return cls(
            q=q,
            antennas=cfg.n_tx // q,
            rf_chains=cfg.n_rf // q,
            n_streams=n_streams or cfg.n_streams,
        )

    def group_config(self, cfg: SystemConfig) -> SystemConfig:
        # Fewer RF chains than streams per group is allowed, the stream
        # count of a group config is only used for validation
        return dataclasses.replace(
            cfg,
            n_tx=self.antennas,
            n_rf=self.rf_chains,
            n_streams=min(self.n_streams, self.rf_chains),
            groups=1,
        )


def partition_target(f_opt, q: int) -> List[np.ndarray]:
    """Splits the target into q equal blocks of consecutive rows."""
    f_opt = np.asarray(f_opt)
    n_tx = f_opt.shape[0]
    if isinstance(q, bool) or q < 1 or n_tx % q:
        raise InvalidDimensionError(
            f'Cannot split {n_tx} antennas into {q} equal groups.'
        )
    rows = n_tx // q
    return [f_opt[k * rows : (k + 1) * rows] for k in range(q)]


def _assemble(parts: List[HybridPrecoder], plan: GroupPlan, n_ps: int):
    q, rows, chains = plan.q, plan.antennas, plan.rf_chains
    cols = n_ps * chains

    switches = np.zeros((q * rows, q * cols), dtype=np.uint8)
    phases = np.zeros((q * cols, q * chains), dtype=complex)
    for k, part in enumerate(parts):
        switches[k * rows : (k + 1) * rows, k * cols : (k + 1) * cols] = (
            part.switches.entries
        )
        phases[k * cols : (k + 1) * cols, k * chains : (k + 1) * chains] = (
            part.phases.entries
        )
    digital = np.vstack([part.digital for part in parts])
    return SwitchMatrix(switches), PhaseMatrix(phases, n_ps), digital


def gc_vps(
    f_opt,
    cfg: SystemConfig,
    solver: str = 'hpd',
    opts: Optional[SolverOptions] = None,
    rng: Optional[Generator] = None,
) -> HybridPrecoder:
    """
    Solves every group with the chosen base solver and stacks the
    results. Group k draws from ``default_rng(seed + k)`` where the seed
    is ``opts.rng_seed``, or drawn from ``rng`` when one is given. The
    assembled precoder is normalized once.

    :param solver: ``'hpd'``, ``'lc_hpd'`` or ``'frozen_phase'``
    """
    if solver not in SOLVERS:
        raise ConfigError(
            f'Unknown base solver {solver!r}, expected one of {", ".join(SOLVERS)}.'
        )
    opts = opts or SolverOptions()
    f_opt = np.asarray(f_opt, dtype=complex)

    plan = GroupPlan.from_config(cfg, f_opt.shape[1])
    group_cfg = plan.group_config(cfg)
    group_opts = dataclasses.replace(opts, normalize=False)
    base = opts.rng_seed if rng is None else int(rng.integers(0, 2**62))

    start = time.perf_counter()
    blocks = partition_target(f_opt, plan.q)
    solve = SOLVERS[solver]
    args = [
        (block, group_cfg, group_opts, default_rng(base + k))
        for k, block in enumerate(blocks)
    ]

    if opts.threads > 1 and plan.q > 1:
        with ThreadPool(processes=min(opts.threads, plan.q)) as pool:
            pending = [pool.apply_async(solve, a) for a in args]
            parts = [result.get() for result in pending]
    else:
        parts = [solve(*a) for a in args]

    switches, phases, digital = _assemble(parts, plan, cfg.n_ps)

    report = SolverReport(scheme=f'gc_vps_{solver}')
    report.groups = [part.report for part in parts]
    report.iterations = max(r.iterations for r in report.groups)
    for r in report.groups:
        report.flags |= r.flags
    if all(r.initial_residual is not None for r in report.groups):
        report.initial_residual = sum(r.initial_residual for r in report.groups)
    # Group traces have different lengths, a finished group keeps its last value
    for n in range(report.iterations):
        report.objective.append(
            sum(r.objective[min(n, len(r.objective) - 1)] for r in report.groups)
        )
        report.residual.append(
            sum(r.residual[min(n, len(r.residual) - 1)] for r in report.groups)
        )
    if all(r.stop_reason == 'rel_tol' for r in report.groups):
        report.stop_reason = 'rel_tol'

    precoder = HybridPrecoder(switches, phases, digital, report)
    if opts.normalize:
        precoder = normalize_digital(precoder)
    report.wall_time = time.perf_counter() - start
    dbg(f'{report.scheme} with {plan.q} groups done after {report.iterations} iterations.')
    return precoder
