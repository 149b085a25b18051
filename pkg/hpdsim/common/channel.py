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
Clustered mmWave channel generation for uniform linear arrays and the
fully digital precoder/combiner targets obtained from its SVD.
"""

import math
import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.random import Generator, default_rng

from .errors import InvalidDimensionError
from ..logging import dbg, warn


def _positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidDimensionError(f'{name} must be an integer, got {value!r}')
    if value < 1:
        raise InvalidDimensionError(f'{name} must be positive, got {value}')


@dataclass(frozen=True)
class SystemConfig:
    """
    Dimensions of one point-to-point hybrid transceiver.

    :param n_tx: Transmit antennas
    :param n_rx: Receive antennas
    :param n_rf: RF chains, identical at both ends
    :param n_streams: Data streams
    :param n_ps: Phase shifters per phase shifter network
    :param phase_bits: Phase shifter resolution in bits
    :param groups: Number of antenna groups, 1 for the ungrouped architecture
    """

    n_tx: int = 64
    n_rx: int = 16
    n_rf: int = 4
    n_streams: int = 4
    n_ps: int = 8
    phase_bits: int = 3
    groups: int = 1

    def __post_init__(self):
        for f in dataclasses.fields(self):
            _positive_int(f.name, getattr(self, f.name))

        if not self.n_streams <= self.n_rf <= self.n_tx:
            raise InvalidDimensionError(
                f'Need n_streams <= n_rf <= n_tx, got {self.n_streams}, {self.n_rf}, {self.n_tx}.'
            )
        if self.n_rf > self.n_rx:
            raise InvalidDimensionError(
                f'Need n_rf <= n_rx, got {self.n_rf} > {self.n_rx}.'
            )
        if self.groups > self.n_rf:
            raise InvalidDimensionError(
                f'groups ({self.groups}) must not exceed n_rf ({self.n_rf}).'
            )
        if self.n_tx % self.groups or self.n_rf % self.groups:
            raise InvalidDimensionError(
                f'groups ({self.groups}) must divide n_tx ({self.n_tx}) and n_rf ({self.n_rf}).'
            )

    def receiver(self) -> 'SystemConfig':
        """The same transceiver seen from the receive side."""
        return dataclasses.replace(self, n_tx=self.n_rx, n_rx=self.n_tx)


@dataclass(frozen=True)
class ChannelParams:
    n_paths: int = 4
    gain_variances: Tuple[float, ...] = (1.0, 0.1, 0.1, 0.1)
    rng_seed: int = 0

    def __post_init__(self):
        _positive_int('n_paths', self.n_paths)
        variances = tuple(float(v) for v in self.gain_variances)
        object.__setattr__(self, 'gain_variances', variances)

        if len(variances) != self.n_paths:
            raise InvalidDimensionError(
                f'Expected {self.n_paths} gain variances, got {len(variances)}.'
            )
        if not all(math.isfinite(v) and v >= 0 for v in variances):
            raise InvalidDimensionError(
                f'Gain variances must be finite and nonnegative: {variances}'
            )
        if self.rng_seed < 0:
            raise InvalidDimensionError('rng_seed must be unsigned.')


@dataclass
class ChannelRealization:
    gains: np.ndarray
    aod: np.ndarray
    aoa: np.ndarray
    matrix: np.ndarray


@dataclass
class DigitalTarget:
    f_opt: np.ndarray
    w_opt: np.ndarray
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rank_deficient: bool = False


def steering_vector(n: int, angle: float) -> np.ndarray:
    """
    Array response of an n element half-wavelength ULA.
    """
    if isinstance(n, bool) or n < 1:
        raise InvalidDimensionError(
            f'Steering vector needs at least one antenna, got {n}.'
        )
    k = np.arange(n)
    return np.exp(1j * np.pi * k * np.sin(angle)) / np.sqrt(n)


def assemble_channel(
    gains: Sequence[complex],
    aod: Sequence[float],
    aoa: Sequence[float],
    n_tx: int,
    n_rx: int,
) -> np.ndarray:
    n_paths = len(gains)
    matrix = np.zeros((n_rx, n_tx), dtype=complex)
    for gain, theta, phi in zip(gains, aod, aoa):
        matrix += gain * np.outer(
            steering_vector(n_rx, phi), steering_vector(n_tx, theta).conj()
        )
    return np.sqrt(n_tx * n_rx / n_paths) * matrix


def generate_channel(
    cfg: SystemConfig,
    params: ChannelParams,
    rng: Optional[Generator] = None,
) -> ChannelRealization:
    """
    Draws one clustered channel. Per path the complex gain is drawn
    first, then the departure and arrival angles, uniform on [0, 2π).

    :param rng: Generator to draw from, seeded from ``params.rng_seed``
        if omitted.
    """
    if rng is None:
        rng = default_rng(params.rng_seed)

    gains = np.empty(params.n_paths, dtype=complex)
    aod = np.empty(params.n_paths)
    aoa = np.empty(params.n_paths)

    for path, variance in enumerate(params.gain_variances):
        scale = np.sqrt(variance / 2)
        gains[path] = scale * complex(
            rng.standard_normal(), rng.standard_normal()
        )
        aod[path] = rng.uniform(0, 2 * np.pi)
        aoa[path] = rng.uniform(0, 2 * np.pi)

    matrix = assemble_channel(gains, aod, aoa, cfg.n_tx, cfg.n_rx)
    return ChannelRealization(gains=gains, aod=aod, aoa=aoa, matrix=matrix)


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    # Rotate every column so its largest-magnitude entry is real positive
    pivots = vectors[
        np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])
    ]
    rotation = np.ones_like(pivots)
    nonzero = pivots != 0
    rotation[nonzero] = np.abs(pivots[nonzero]) / pivots[nonzero]
    return vectors * rotation


def optimal_precoder_combiner(h, n_streams: int) -> DigitalTarget:
    """
    Fully digital precoder and combiner: the right and left singular
    vectors of the channel for its ``n_streams`` strongest modes.

    :param h: A ``ChannelRealization`` or the bare channel matrix
    """
    matrix = h.matrix if isinstance(h, ChannelRealization) else np.asarray(h)
    n_rx, n_tx = matrix.shape

    if n_streams < 1 or n_streams > min(n_tx, n_rx):
        raise InvalidDimensionError(
            f'Cannot select {n_streams} streams from a {n_rx}x{n_tx} channel.'
        )

    u, s, vh = np.linalg.svd(matrix)

    f_opt = _fix_phase(vh.conj().T[:, :n_streams])
    w_opt = _fix_phase(u[:, :n_streams])

    # Rank check relative to the strongest mode
    tol = max(matrix.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank_deficient = bool(s[n_streams - 1] <= tol)
    if rank_deficient:
        warn(
            f'Channel rank is below {n_streams}, selected modes include zero singular values.'
        )
    dbg(f'Singular values of the selected modes: {s[:n_streams]}')

    return DigitalTarget(
        f_opt=f_opt,
        w_opt=w_opt,
        singular_values=s[:n_streams],
        rank_deficient=rank_deficient,
    )
