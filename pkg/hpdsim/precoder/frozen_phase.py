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
import time
from typing import Optional

import numpy as np
from numpy.random import Generator, default_rng

from .core import HybridPrecoder, PhaseMatrix, SolverOptions, SolverReport
from .vps_lc_hpd import alternate_stages, finish
from ..common.channel import SystemConfig


def fixed_phases(n_rf: int, n_ps: int) -> PhaseMatrix:
    """Fixed phase network: slot l is set to 2π(l - 1)/n_ps."""
    angles = 2 * np.pi * np.arange(n_ps) / n_ps
    return PhaseMatrix.from_angles(np.tile(angles, (n_rf, 1)))


def frozen_phase_baseline(
    f_opt,
    cfg: SystemConfig,
    opts: Optional[SolverOptions] = None,
    rng: Optional[Generator] = None,
) -> HybridPrecoder:
    """
    Fixed phase shifter reference design. Only the semi-unitary factor,
    the switches and the scale are optimized, the phases never change.
    """
    opts = opts or SolverOptions()
    if rng is None:
        rng = default_rng(opts.rng_seed)

    start = time.perf_counter()
    report = SolverReport(scheme='frozen_phase')
    states = alternate_stages(
        f_opt,
        cfg,
        opts,
        rng,
        fixed_phases(cfg.n_rf, cfg.n_ps),
        report,
        update_phases=False,
    )
    return finish(f_opt, states[-1], report, opts, start)
