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
from enum import IntEnum


class ExitCode(IntEnum):
    SUCCESS = 0
    CONFIG = 2
    SOLVER = 3
    IO = 4
    CANCELED = 5


class HpdsimError(Exception):
    """Base class of all errors raised by hpdsim."""

    exit_code = ExitCode.SOLVER


class ConfigError(HpdsimError):
    """Invalid experiment file, option value or system dimensions."""

    exit_code = ExitCode.CONFIG


class InvalidDimensionError(ConfigError):
    pass


class ZeroPowerError(ConfigError):
    pass


class DimensionMismatchError(HpdsimError):
    pass


class CapacityError(HpdsimError):
    """The exhaustive switch search would enumerate too many rows."""


class DegeneratePrecoderError(HpdsimError):
    pass


class RankDeficientCombinerError(HpdsimError):
    pass


class SolverError(HpdsimError):
    pass


class OutputError(HpdsimError):
    exit_code = ExitCode.IO

    def __init__(self, path, reason):
        self.path = path
        super().__init__(f"Could not write '{path}': {reason}")


def exit_code_for(exc: BaseException) -> ExitCode:
    if isinstance(exc, HpdsimError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return ExitCode.IO
    return ExitCode.SOLVER
