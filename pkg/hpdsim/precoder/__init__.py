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

from .core import (
    PhaseSet,
    PhaseMatrix,
    SwitchMatrix,
    HybridPrecoder,
    SolverOptions,
    SolverReport,
    quantize_phase,
    assemble_analog,
    normalize_digital,
    residual,
    aligned_residual,
    check_hardware,
)
from .vps_hpd import (
    SubproblemState,
    ls_analog_estimate,
    optimize_phase_vector,
    optimize_switch_row,
    solve_subproblem,
    digital_ls,
    vps_hpd,
)
from .vps_lc_hpd import (
    LcState,
    design_semi_unitary,
    design_phase_matrix,
    design_switch_and_scale,
    vps_lc_hpd,
)
from .gc_vps import GroupPlan, partition_target, gc_vps
from .frozen_phase import frozen_phase_baseline
