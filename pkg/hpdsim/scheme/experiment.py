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
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from ..common.channel import ChannelParams, SystemConfig
from ..common.errors import ConfigError
from ..common.metrics import PowerModel
from ..precoder.core import SolverOptions


@dataclass
class ExperimentSpec:
    """
    Everything a sweep depends on. The output of a sweep is a pure
    function of this object, apart from the wall times.
    """

    system: SystemConfig = field(default_factory=SystemConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    schemes: List[str] = field(
        default_factory=lambda: ['vps_hpd', 'vps_lc_hpd']
    )
    snr_grid_db: List[float] = field(
        default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0]
    )
    trials: int = 200
    solver_opts: SolverOptions = field(default_factory=SolverOptions)
    power_model: PowerModel = field(default_factory=PowerModel)
    master_seed: int = 0
    n_ps_grid: Optional[List[int]] = None
    groups_grid: Optional[List[int]] = None
    noise_var: float = 1.0
    record_timing: bool = True

    def __post_init__(self):
        if isinstance(self.trials, bool) or self.trials < 1:
            raise ConfigError(f'trials must be at least 1, got {self.trials}.')
        if not self.snr_grid_db:
            raise ConfigError('snr_grid_db must not be empty.')
        if not all(math.isfinite(snr) for snr in self.snr_grid_db):
            raise ConfigError('snr_grid_db entries must be finite.')
        if not self.schemes:
            raise ConfigError('At least one scheme is required.')
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError(f'Duplicate schemes in {self.schemes}.')
        if not self.noise_var > 0:
            raise ConfigError(f'noise_var must be positive, got {self.noise_var}.')
        if self.master_seed < 0:
            raise ConfigError('master_seed must be unsigned.')
        for name in ('n_ps_grid', 'groups_grid'):
            grid = getattr(self, name)
            if grid is not None and (
                not grid or any(isinstance(v, bool) or v < 1 for v in grid)
            ):
                raise ConfigError(f'{name} must hold positive integers.')

    @property
    def n_ps_values(self) -> List[int]:
        return list(self.n_ps_grid or [self.system.n_ps])

    @property
    def groups_values(self) -> List[int]:
        return list(self.groups_grid or [self.system.groups])


@dataclass
class ResultRow:
    scheme: str
    snr_db: float
    n_c: int
    q: int
    trials: int
    se_mean: float
    se_stddev: float
    ee_mean: float
    wall_time_seconds: float
    residual_mean: float
    failures: int = 0

    def sort_key(self) -> Tuple:
        return (self.scheme, self.snr_db, self.n_c, self.q)
