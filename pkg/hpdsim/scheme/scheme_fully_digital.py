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
import numpy as np

from .scheme import Scheme
from .scheme_manager import register_scheme
from ..common.errors import SolverError


@register_scheme('fully_digital')
class SchemeFullyDigital(Scheme):
    """
    The SVD target itself, one RF chain per antenna. Its power already
    equals the number of streams.
    """

    architecture = 'fully_digital'

    def implementation(self, target, cfg, opts):
        return np.array(target, dtype=complex)

    def rf_chains(self, cfg):
        return cfg.n_tx

    def residual(self, target, precoder):
        return 0.0

    def validate(self, precoder, cfg, normalized):
        if not np.all(np.isfinite(precoder)):
            raise SolverError('Fully digital target is not finite.')
