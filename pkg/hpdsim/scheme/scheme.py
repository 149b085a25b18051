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
import dataclasses
from enum import Enum
from abc import abstractmethod, ABC

from ..common.channel import SystemConfig
from ..common.metrics import HardwareCounts, hardware_counts
from ..precoder.core import SolverOptions, check_hardware, residual


class ResultType(Enum):
    UNKNOWN = 0
    ERROR = 1
    SUCCESS = 2
    CANCELED = 3

    def __str__(self):
        if self.value == ResultType.UNKNOWN.value:
            return 'Unknown ❓'
        elif self.value == ResultType.ERROR.value:
            return 'Error ❗'
        elif self.value == ResultType.SUCCESS.value:
            return 'Pass ✅'
        elif self.value == ResultType.CANCELED.value:
            return 'Cancel 🟧'
        else:
            return '???'


class Scheme(ABC):
    """
    Base class for all precoding schemes.

    A scheme designs the transmit precoder from F_opt and, with the same
    method on the receiver dimensions, the combiner from W_opt.
    """

    name = None
    # Row of the overhead table the scheme's hardware belongs to
    architecture = 'fps_vps'
    grouped = False
    # Designs keep their phases on the b bit phase set
    quantized_phases = True

    def __init__(self, opts: SolverOptions):
        self.opts = opts

    @abstractmethod
    def implementation(self, target, cfg: SystemConfig, opts: SolverOptions):
        pass

    def design(self, target, cfg: SystemConfig, seed: int, normalize=True):
        opts = dataclasses.replace(self.opts, rng_seed=seed, normalize=normalize)
        precoder = self.implementation(target, cfg, opts)
        self.validate(precoder, cfg, normalize)
        return precoder

    def validate(self, precoder, cfg: SystemConfig, normalized: bool):
        """Raises ``SolverError`` for designs breaking the hardware constraints."""
        check_hardware(
            precoder,
            cfg.phase_bits if self.quantized_phases else None,
            normalized,
        )

    def counts(self, cfg: SystemConfig, sides: int = 1) -> HardwareCounts:
        return hardware_counts(self.architecture, cfg, sides)

    def rf_chains(self, cfg: SystemConfig) -> int:
        return cfg.n_rf

    def residual(self, target, precoder) -> float:
        return residual(
            target, precoder.switches, precoder.phases, precoder.digital
        )
