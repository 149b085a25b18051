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
from typing import List, NamedTuple, Sequence

from ..common.channel import SystemConfig
from ..common.metrics import PowerModel, hardware_counts


class PowerRow(NamedTuple):
    architecture: str
    n_ps: int
    ps_power: float
    n_sw: int
    sw_power: float
    total: float


def _row(label, arch, cfg, pm) -> PowerRow:
    n_ps, n_sw = hardware_counts(arch, cfg, sides=2)
    ps_power = n_ps * pm.p_phase_shifter
    sw_power = n_sw * pm.p_switch
    return PowerRow(label, n_ps, ps_power, n_sw, sw_power, ps_power + sw_power)


def power_report(
    cfg: SystemConfig, pm: PowerModel, group_sizes: Sequence[int] = (2, 4)
) -> List[PowerRow]:
    """
    Phase shifter and switch power of the analog networks at both ends,
    for the fully connected network, the (fixed or variable) phase
    shifter network and one group connected row per group size.
    """
    rows = [
        _row('Fully-connected', 'fully_connected', cfg, pm),
        _row('FPS/VPS', 'fps_vps', cfg, pm),
    ]
    for q in group_sizes:
        grouped = dataclasses.replace(cfg, groups=q)
        rows.append(_row(f'GC-VPS (q={q})', 'gc_vps', grouped, pm))
    return rows
