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

from .scheme_manager import (
    SchemeManager,
    registered_schemes,
    register_scheme,
    run_experiment,
    convergence_trace,
    design_pair,
)
from .experiment import ExperimentSpec, ResultRow
from .power_report import PowerRow, power_report

from .scheme_vps_hpd import SchemeVpsHpd
from .scheme_vps_lc_hpd import SchemeVpsLcHpd
from .scheme_gc_vps import (
    SchemeGcVpsHpd,
    SchemeGcVpsLcHpd,
    SchemeGcFrozenPhase,
)
from .scheme_frozen_phase import SchemeFrozenPhase
from .scheme_fully_digital import SchemeFullyDigital
