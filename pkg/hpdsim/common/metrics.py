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
"""
Spectral efficiency, hardware overhead, power and energy efficiency.
"""

import math
import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .channel import ChannelRealization, SystemConfig
from .errors import (
    ConfigError,
    InvalidDimensionError,
    RankDeficientCombinerError,
    ZeroPowerError,
)
from ..logging import warn

ARCHITECTURES = (
    'fully_connected',
    'partially_connected',
    'fps_vps',
    'gc_vps',
    'fully_digital',
)


@dataclass(frozen=True)
class PowerModel:
    """Component power figures in watts."""

    p_rf_chain: float = 0.1
    p_amplifier: float = 0.1
    p_phase_shifter: float = 0.03
    p_switch: float = 0.001
    p_transmit: float = 1.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(
                    f'{f.name} must be a finite nonnegative power, got {value}.'
                )


class HardwareCounts(NamedTuple):
    n_ps: int
    n_sw: int


@dataclass
class MetricsRecord:
    se: float
    ee: float
    n_ps: int
    n_sw: int
    total_hw_power: float
    noise_var: float = 1.0


def effective_matrix(precoder) -> np.ndarray:
    """F_RF F_BB of a hybrid design, or the matrix itself if fully digital."""
    if hasattr(precoder, 'effective'):
        return precoder.effective
    return np.asarray(precoder)


def spectral_efficiency(
    h, tx, rx, p_tx: float, noise_var: float = 1.0
) -> float:
    """
    Achievable rate in bits/s/Hz with equal power over the streams and
    noise colored by the combiner.

    :param h: A ``ChannelRealization`` or the bare channel matrix
    :param tx: Precoder, hybrid or fully digital
    :param rx: Combiner, hybrid or fully digital
    """
    matrix = h.matrix if isinstance(h, ChannelRealization) else np.asarray(h)
    f = effective_matrix(tx)
    w = effective_matrix(rx)
    n_streams = f.shape[1]

    r = noise_var * (w.conj().T @ w)
    if np.linalg.matrix_rank(r) < r.shape[0]:
        raise RankDeficientCombinerError(
            'Noise covariance after combining is singular.'
        )

    g = w.conj().T @ matrix @ f
    x = np.eye(r.shape[0]) + (p_tx / n_streams) * np.linalg.solve(
        r, g @ g.conj().T
    )
    sign, logdet = np.linalg.slogdet(x)
    if abs(np.imag(sign)) > 1e-10 or np.real(sign) <= 0:
        warn(f'Rate determinant has unexpected sign {sign}.')
    return max(float(logdet) / math.log(2), 0.0)


def hardware_counts(
    arch: str, cfg: SystemConfig, sides: int = 1
) -> HardwareCounts:
    """
    Phase shifter and switch counts of an architecture, for the
    transmitter alone (``sides=1``) or both ends (``sides=2``).
    """
    if sides not in (1, 2):
        raise InvalidDimensionError(f'sides must be 1 or 2, got {sides}.')

    antennas = [cfg.n_tx, cfg.n_rx][:sides]
    networks = cfg.n_ps * cfg.n_rf

    if arch == 'fully_connected':
        return HardwareCounts(sum(n * cfg.n_rf for n in antennas), 0)
    elif arch == 'partially_connected':
        return HardwareCounts(sum(antennas), 0)
    elif arch == 'fps_vps':
        return HardwareCounts(
            networks * sides, sum(networks * n for n in antennas)
        )
    elif arch == 'gc_vps':
        return HardwareCounts(
            networks * sides,
            sum(networks * n // cfg.groups for n in antennas),
        )
    elif arch == 'fully_digital':
        return HardwareCounts(0, 0)

    raise ConfigError(
        f'Unknown architecture {arch!r}, expected one of {", ".join(ARCHITECTURES)}.'
    )


def total_hw_power(counts, pm: PowerModel) -> float:
    n_ps, n_sw = counts
    return n_ps * pm.p_phase_shifter + n_sw * pm.p_switch


def energy_efficiency(
    se: float,
    p_tx: float,
    cfg: SystemConfig,
    counts,
    pm: PowerModel,
    n_rf_chains: Optional[int] = None,
) -> float:
    """
    Spectral efficiency per watt of transmitter power. Fully digital
    designs pass ``n_rf_chains=cfg.n_tx``.
    """
    chains = cfg.n_rf if n_rf_chains is None else n_rf_chains
    denominator = (
        p_tx
        + chains * pm.p_rf_chain
        + cfg.n_tx * pm.p_amplifier
        + total_hw_power(counts, pm)
    )
    if not denominator > 0:
        raise ZeroPowerError('Total power consumption is zero.')
    return se / denominator


def metrics_record(
    se: float,
    p_tx: float,
    noise_var: float,
    cfg: SystemConfig,
    counts,
    pm: PowerModel,
    n_rf_chains: Optional[int] = None,
) -> MetricsRecord:
    counts = HardwareCounts(*counts)
    return MetricsRecord(
        se=se,
        ee=energy_efficiency(se, p_tx, cfg, counts, pm, n_rf_chains),
        n_ps=counts.n_ps,
        n_sw=counts.n_sw,
        total_hw_power=total_hw_power(counts, pm),
        noise_var=noise_var,
    )
