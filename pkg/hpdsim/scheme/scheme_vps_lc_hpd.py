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
from ..precoder.vps_lc_hpd import vps_lc_hpd


@register_scheme('vps_lc_hpd')
class SchemeVpsLcHpd(Scheme):
    """Low complexity design with three closed form stages."""

    def implementation(self, target, cfg, opts):
        return vps_lc_hpd(target, cfg, opts)
