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
Hardware constrained precoder building blocks shared by all solvers.

The analog precoder is the product of a binary switch matrix ``S`` of
shape ``n_tx x (n_ps * n_rf)`` and a phase matrix ``P`` of shape
``(n_ps * n_rf) x n_rf``. ``P`` is stored densely, column ``i`` only has
the ``n_ps`` entries of rows ``i * n_ps .. (i + 1) * n_ps - 1`` set, each
with magnitude ``1 / sqrt(n_ps)``.
"""

import math
import dataclasses
from dataclasses import dataclass, field
from typing import List, Optional, Set, Union

import numpy as np

from ..common.errors import (
    ConfigError,
    DegeneratePrecoderError,
    DimensionMismatchError,
    InvalidDimensionError,
    SolverError,
)
from ..logging import warn

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class PhaseSet:
    """The phases {2πi/2^b : i = 1..2^b} of a b bit phase shifter."""

    bits: int

    def __post_init__(self):
        if isinstance(self.bits, bool) or self.bits < 1:
            raise InvalidDimensionError(
                f'Phase resolution must be at least one bit, got {self.bits}.'
            )

    @property
    def size(self) -> int:
        return 2**self.bits

    @property
    def step(self) -> float:
        return TWO_PI / self.size

    def angles(self) -> np.ndarray:
        return self.step * np.arange(1, self.size + 1)

    def contains(self, theta, atol: float = 1e-9):
        u = np.mod(np.asarray(theta, dtype=float) / self.step, self.size)
        return np.abs(u - np.round(u)) * self.step <= atol


def quantize_phase(theta, b: int):
    """
    Nearest phase of the b bit phase set by circular distance. Exact ties
    go to the smaller set index, where angle 0 has index 2^b.

    :param theta: Angle or array of angles in radians
    :param b: Resolution in bits
    :returns: Angles in (0, 2π]
    """
    n = 2**b
    step = TWO_PI / n

    u = np.mod(np.asarray(theta, dtype=float) / step, n)
    lower = np.floor(u)
    frac = u - lower

    k = np.where(frac > 0.5, lower + 1, lower)
    # Between grid points 0 and 1 the smaller index is 1, elsewhere the lower one
    k = np.where((frac == 0.5) & (lower == 0), 1, k)

    index = np.mod(k, n)
    index = np.where(index == 0, n, index)

    result = index * step
    if np.ndim(result) == 0:
        return float(result)
    return result


@dataclass
class SwitchMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2:
            raise DimensionMismatchError('Switch matrix must be 2-D.')
        if not np.isin(entries, (0, 1)).all():
            raise ConfigError('Switch matrix entries must be 0 or 1.')
        self.entries = entries.astype(np.uint8)

    @property
    def shape(self):
        return self.entries.shape

    def block(self, i: int, n_ps: int) -> np.ndarray:
        """Switches between all antennas and network i, the matrix Q_i."""
        return self.entries[:, i * n_ps : (i + 1) * n_ps]

    def count_on(self) -> int:
        return int(self.entries.sum())


@dataclass
class PhaseMatrix:
    entries: np.ndarray
    n_ps: int

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        rows, cols = self.entries.shape
        if rows != self.n_ps * cols:
            raise DimensionMismatchError(
                f'Phase matrix of shape {self.entries.shape} does not fit {self.n_ps} phase shifters per RF chain.'
            )

    @classmethod
    def from_vectors(cls, vectors) -> 'PhaseMatrix':
        """Builds P from the per RF chain vectors p_i (rows of ``vectors``)."""
        vectors = np.asarray(vectors, dtype=complex)
        n_rf, n_ps = vectors.shape
        entries = np.zeros((n_ps * n_rf, n_rf), dtype=complex)
        for i in range(n_rf):
            entries[i * n_ps : (i + 1) * n_ps, i] = vectors[i]
        return cls(entries, n_ps)

    @classmethod
    def from_angles(cls, angles) -> 'PhaseMatrix':
        angles = np.asarray(angles, dtype=float)
        n_ps = angles.shape[1]
        return cls.from_vectors(np.exp(1j * angles) / np.sqrt(n_ps))

    @property
    def n_rf(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def vector(self, i: int) -> np.ndarray:
        return self.entries[i * self.n_ps : (i + 1) * self.n_ps, i]

    def vectors(self) -> np.ndarray:
        return np.stack([self.vector(i) for i in range(self.n_rf)])

    def angles(self) -> np.ndarray:
        angles = np.mod(np.angle(self.vectors()), TWO_PI)
        return np.where(angles == 0, TWO_PI, angles)

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.entries.shape, dtype=bool)
        for i in range(self.n_rf):
            mask[i * self.n_ps : (i + 1) * self.n_ps, i] = True
        return mask

    def quantized(self, bits: int) -> 'PhaseMatrix':
        return PhaseMatrix.from_angles(quantize_phase(self.angles(), bits))


@dataclass
class SolverOptions:
    max_outer: int = 20
    max_inner: int = 10
    rel_tol: float = 0.001
    rng_seed: int = 0
    quantize_inner: bool = False
    manifold_max_iter: int = 200
    manifold_grad_tol: float = 1e-6
    armijo_c: float = 1e-4
    threads: int = 1
    normalize: bool = True
    refine_digital: bool = True

    def __post_init__(self):
        for name in ('max_outer', 'max_inner', 'manifold_max_iter', 'threads'):
            value = getattr(self, name)
            if isinstance(value, bool) or value < 1:
                raise InvalidDimensionError(
                    f'{name} must be a positive integer, got {value}.'
                )
        if not self.rel_tol >= 0:
            raise ConfigError(f'rel_tol must be nonnegative, got {self.rel_tol}.')
        if self.rng_seed < 0:
            raise ConfigError('rng_seed must be unsigned.')
        if not 0 < self.armijo_c < 1:
            raise ConfigError(f'armijo_c must lie in (0, 1), got {self.armijo_c}.')


@dataclass
class SolverReport:
    """Diagnostics collected while designing one precoder."""

    scheme: str = ''
    iterations: int = 0
    objective: List[float] = field(default_factory=list)
    residual: List[float] = field(default_factory=list)
    flags: Set[str] = field(default_factory=set)
    stop_reason: str = 'max_iterations'
    wall_time: float = 0.0
    initial_residual: Optional[float] = None
    groups: List['SolverReport'] = field(default_factory=list)

    def flag(self, name: str, message: str):
        if name not in self.flags:
            warn(f'{self.scheme or "solver"}: {message}')
        self.flags.add(name)


def flag(report: Optional[SolverReport], name: str, message: str):
    if report is None:
        warn(message)
    else:
        report.flag(name, message)


@dataclass
class HybridPrecoder:
    switches: SwitchMatrix
    phases: PhaseMatrix
    digital: np.ndarray
    report: SolverReport = field(default_factory=SolverReport)

    @property
    def analog(self) -> np.ndarray:
        return assemble_analog(self.switches, self.phases)

    @property
    def effective(self) -> np.ndarray:
        return self.analog @ self.digital

    @property
    def n_streams(self) -> int:
        return self.digital.shape[1]


def _entries(m) -> np.ndarray:
    if isinstance(m, (SwitchMatrix, PhaseMatrix)):
        return m.entries
    return np.asarray(m)


def assemble_analog(
    s: Union[SwitchMatrix, np.ndarray], p: Union[PhaseMatrix, np.ndarray]
) -> np.ndarray:
    """The analog precoder S P."""
    s, p = _entries(s), _entries(p)
    if s.shape[1] != p.shape[0]:
        raise DimensionMismatchError(
            f'Cannot combine switches {s.shape} with phases {p.shape}.'
        )
    return s @ p


def normalize_digital(pre: HybridPrecoder) -> HybridPrecoder:
    """
    Scales the digital precoder so the total transmit power of the
    hybrid precoder equals the number of streams.
    """
    norm = np.linalg.norm(pre.effective)
    if not norm > 0:
        raise DegeneratePrecoderError(
            'Hybrid precoder is zero and cannot be normalized.'
        )
    digital = pre.digital * (math.sqrt(pre.n_streams) / norm)
    return dataclasses.replace(pre, digital=digital)


def residual(f_opt, s, p, f_bb) -> float:
    """Squared Frobenius distance between the target and S P F_BB."""
    f_opt, f_bb = np.asarray(f_opt), np.asarray(f_bb)
    analog = assemble_analog(s, p)
    if analog.shape[1] != f_bb.shape[0] or analog.shape[0] != f_opt.shape[0]:
        raise DimensionMismatchError(
            f'Analog {analog.shape} and digital {f_bb.shape} precoders do not match target {f_opt.shape}.'
        )
    if f_bb.shape[1] != f_opt.shape[1]:
        raise DimensionMismatchError(
            f'Digital precoder {f_bb.shape} does not match target {f_opt.shape}.'
        )
    diff = f_opt - analog @ f_bb
    return float(np.real(np.vdot(diff, diff)))


def relative_change(previous: float, current: float) -> float:
    if previous == current:
        return 0.0
    if previous == 0:
        return math.inf
    return abs(previous - current) / abs(previous)


def random_full_rank(rng, rows: int, cols: int, attempts: int = 100) -> np.ndarray:
    """
    I.i.d. standard complex Gaussian matrix, redrawn until it has full
    rank min(rows, cols).
    """
    for _ in range(attempts):
        m = (
            rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))
        ) / np.sqrt(2)
        if np.linalg.matrix_rank(m) == min(rows, cols):
            return m
    raise DegeneratePrecoderError(
        f'Could not draw a full rank {rows}x{cols} digital precoder.'
    )


def aligned_residual(f_opt, effective) -> float:
    """
    Squared distance between the target and ``c * effective`` for the
    best complex scale c. Unchanged when ``effective`` is rescaled.
    """
    f_opt, effective = np.asarray(f_opt), np.asarray(effective)
    power = float(np.real(np.vdot(effective, effective)))
    target = float(np.real(np.vdot(f_opt, f_opt)))
    if power == 0:
        return target
    return target - abs(np.vdot(effective, f_opt)) ** 2 / power


def check_hardware(
    pre: HybridPrecoder,
    phase_bits: Optional[int] = None,
    normalized: bool = True,
):
    """
    Raises ``SolverError`` when a finished design is not finite or breaks
    the hardware constraints: phases off the mask, off the magnitude
    1/sqrt(n_ps) or, when ``phase_bits`` is given, off the phase set, and
    with ``normalized`` a total power other than the number of streams.
    """
    phases = pre.phases
    if not (np.all(np.isfinite(pre.digital)) and np.all(np.isfinite(phases.entries))):
        raise SolverError(f'{pre.report.scheme or "Design"} diverged to non-finite values.')

    mask = phases.mask()
    magnitude = np.abs(phases.entries[mask])
    if np.any(phases.entries[~mask] != 0) or not np.allclose(
        magnitude, 1 / math.sqrt(phases.n_ps)
    ):
        raise SolverError('Phase matrix breaks the phase shifter network layout.')
    if phase_bits is not None and not PhaseSet(phase_bits).contains(phases.angles()).all():
        raise SolverError(f'Phases are not on the {phase_bits} bit phase set.')

    if normalized:
        power = float(np.linalg.norm(pre.effective) ** 2)
        if not math.isclose(power, pre.n_streams, rel_tol=1e-9, abs_tol=1e-9):
            raise SolverError(
                f'Transmit power {power:.9g} differs from {pre.n_streams} streams.'
            )
