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
from .scheme import Scheme
from .scheme_manager import register_scheme
from ..precoder.gc_vps import gc_vps


class SchemeGcVps(Scheme):
    """
    Group connected design. The group count comes from
    ``SystemConfig.groups``.
    """

    architecture = 'gc_vps'
    grouped = True
    solver = None

    def implementation(self, target, cfg, opts):
        return gc_vps(target, cfg, self.solver, opts)


@register_scheme('gc_vps_hpd')
class SchemeGcVpsHpd(SchemeGcVps):
    solver = 'hpd'


@register_scheme('gc_vps_lc_hpd')
class SchemeGcVpsLcHpd(SchemeGcVps):
    solver = 'lc_hpd'


@register_scheme('gc_frozen_phase')
class SchemeGcFrozenPhase(SchemeGcVps):
    """Fixed phase reference design solved group by group."""

    solver = 'frozen_phase'
    quantized_phases = False
