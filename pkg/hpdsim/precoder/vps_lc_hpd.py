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
Low complexity hybrid precoder design.

The digital precoder is written as ``alpha * F_DD`` with a semi-unitary
``F_DD`` and a real scale ``alpha``. An upper bound of the residual,
the surrogate

    alpha^2 ||S||_F^2 - 2 alpha Re tr(F_opt^H S P F_DD),

is minimized by cycling three stages, each with a closed form solution:
``F_DD`` by a truncated SVD, the quantized phases slot by slot and
``(S, alpha)`` jointly by a sorted sweep over the entries of
``M = Re(F_opt F_DD^H P^H)``. The bound is loose when the phases of a
network cancel, so the design keeps the cycle state whose analog network
fits the target best rather than the last one.
"""

import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.random import Generator, default_rng

from .core import (
    HybridPrecoder,
    PhaseMatrix,
    SolverOptions,
    SolverReport,
    SwitchMatrix,
    aligned_residual,
    assemble_analog,
    flag,
    normalize_digital,
    quantize_phase,
    relative_change,
    residual,
)
from ..common.channel import SystemConfig
from ..common.errors import DimensionMismatchError, InvalidDimensionError
from ..logging import dbg, trace

# Relative slack when comparing candidate objectives
TIE_TOLERANCE = 1e-12


@dataclass
class LcState:
    alpha: float
    f_dd: np.ndarray
    switches: SwitchMatrix
    phases: PhaseMatrix
    surrogate: float
    # Residual with a least squares F_BB for this analog network
    fit: float = float('inf')


def surrogate(f_opt, s, p, f_dd, alpha: float) -> float:
    s_entries = s.entries if isinstance(s, SwitchMatrix) else np.asarray(s)
    correlation = np.real(
        np.trace(np.asarray(f_opt).conj().T @ assemble_analog(s, p) @ f_dd)
    )
    return float(
        alpha**2 * np.sum(s_entries, dtype=float) - 2 * alpha * correlation
    )


def scaled_correlation(f_opt, f_dd, p) -> np.ndarray:
    """The real matrix M = Re(F_opt F_DD^H P^H) of the switch stage."""
    p = p.entries if isinstance(p, PhaseMatrix) else np.asarray(p)
    return np.real(np.asarray(f_opt) @ np.asarray(f_dd).conj().T @ p.conj().T)


def design_semi_unitary(
    f_opt, s, p, alpha: float, report: Optional[SolverReport] = None
) -> np.ndarray:
    """
    Semi-unitary F_DD maximizing alpha * Re tr(F_DD F_opt^H S P).

    With the thin SVD ``alpha F_opt^H S P = U diag(sigma) V^H`` the
    maximizer is ``V U^H`` and the maximum is the nuclear norm. When
    there are fewer RF chains than streams the result is a partial
    isometry with orthonormal rows.
    """
    a = alpha * np.asarray(f_opt).conj().T @ assemble_analog(s, p)
    u, sigma, vh = np.linalg.svd(a, full_matrices=False)
    if not sigma.size or sigma[0] == 0:
        flag(
            report,
            'degenerate_svd',
            'Correlation between target and analog precoder vanished, F_DD is arbitrary.',
        )
    return vh.conj().T @ u.conj().T


def phase_targets(f_opt, f_dd, s, n_ps: int) -> np.ndarray:
    """
    The per slot targets of the phase stage, shape ``(n_rf, n_ps)``.

    Read off the block diagonal of G = S^T F_opt F_DD^H.
    """
    s = s.entries if isinstance(s, SwitchMatrix) else np.asarray(s)
    g = s.T.astype(float) @ np.asarray(f_opt) @ np.asarray(f_dd).conj().T
    n_rf = g.shape[1]
    return np.stack(
        [g[i * n_ps : (i + 1) * n_ps, i] for i in range(n_rf)]
    )


def design_phase_matrix(
    f_opt,
    f_dd,
    s,
    alpha: float,
    b: int,
    n_ps: Optional[int] = None,
    report: Optional[SolverReport] = None,
) -> PhaseMatrix:
    """
    Quantized phases maximizing 2 alpha Re tr(F_opt^H S P F_DD) slot by
    slot. A negative scale turns every phase by π.
    """
    f_dd = np.asarray(f_dd)
    if n_ps is None:
        s_cols = s.shape[1]
        n_ps = s_cols // f_dd.shape[0]
    targets = phase_targets(f_opt, f_dd, s, n_ps)

    angles = np.angle(targets)
    if alpha < 0:
        angles = angles + np.pi
    angles = quantize_phase(angles, b)

    zero = targets == 0
    if zero.any():
        flag(
            report,
            'zero_phase_target',
            f'{int(zero.sum())} phase shifter(s) see a zero target, any phase is optimal.',
        )
        angles = np.where(zero, 2 * np.pi, angles)

    return PhaseMatrix.from_angles(angles)


def _switch_candidates(z: np.ndarray):
    """
    Vertex candidates of every interval between consecutive sorted
    entries, for both signs of alpha. Returns (alpha, g, branch, i) arrays
    for the feasible candidates only, branch 0 is positive alpha.
    """
    n = z.size
    i = np.arange(1, n)
    prefix = np.cumsum(z)[:-1]
    suffix = prefix[-1] + z[-1] - prefix
    total = float(np.dot(z, z))

    # Entries above the threshold are switched on for positive alpha
    alpha_pos = suffix / (n - i)
    g_pos = total - suffix**2 / (n - i)
    # and entries below it for negative alpha
    alpha_neg = prefix / i
    g_neg = total - prefix**2 / i

    lower, upper = z[:-1], z[1:]

    def feasible(alpha, sign):
        half = alpha / 2
        return (np.sign(alpha) == sign) & (lower < half) & (half <= upper)

    keep_pos = feasible(alpha_pos, 1)
    keep_neg = feasible(alpha_neg, -1)

    alphas = np.concatenate([alpha_pos[keep_pos], alpha_neg[keep_neg]])
    gs = np.concatenate([g_pos[keep_pos], g_neg[keep_neg]])
    branches = np.concatenate(
        [np.zeros(keep_pos.sum(), int), np.ones(keep_neg.sum(), int)]
    )
    indices = np.concatenate([i[keep_pos], i[keep_neg]])
    return alphas, gs, branches, indices


def design_switch_and_scale(
    f_opt, f_dd, p, report: Optional[SolverReport] = None
) -> Tuple[SwitchMatrix, float]:
    """
    Jointly optimal switches and scale minimizing ||M - alpha S||_F^2.

    Ties between candidates prefer a positive scale, then fewer entries
    below the threshold. If no interval holds a feasible vertex, all
    switches are turned on with alpha the mean of M.
    """
    return switch_and_scale_from(scaled_correlation(f_opt, f_dd, p), report)


def switch_and_scale_from(
    m, report: Optional[SolverReport] = None
) -> Tuple[SwitchMatrix, float]:
    """Switch stage for a given correlation matrix M."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    flat = m.ravel()
    n = flat.size
    if n < 2:
        raise InvalidDimensionError(
            f'Switch stage needs at least two switches, got {n}.'
        )

    order = np.argsort(flat, kind='stable')
    z = flat[order]
    alphas, gs, branches, indices = _switch_candidates(z)

    selected = np.zeros(n, dtype=np.uint8)
    if gs.size == 0:
        alpha = float(np.mean(z))
        if alpha == 0:
            alpha = 1.0
        selected[:] = 1
        flag(
            report,
            'degenerate_switch_scale',
            'No feasible switch threshold, turning all switches on.',
        )
    else:
        best = gs.min()
        close = gs <= best + TIE_TOLERANCE * max(1.0, abs(best))
        candidates = np.flatnonzero(close)
        pick = candidates[np.lexsort((indices[close], branches[close]))[0]]
        alpha = float(alphas[pick])
        i = int(indices[pick])
        if branches[pick] == 0:
            selected[order[i:]] = 1
        else:
            selected[order[:i]] = 1

    return SwitchMatrix(selected.reshape(m.shape)), alpha


def initial_phases(n_rf: int, n_ps: int) -> PhaseMatrix:
    """Slot l of every network starts at 2πl/n_ps."""
    angles = 2 * np.pi * np.arange(1, n_ps + 1) / n_ps
    return PhaseMatrix.from_angles(np.tile(angles, (n_rf, 1)))


def least_squares_digital(f_opt, s, p) -> np.ndarray:
    """
    Least squares F_BB for a fixed analog network, the minimum norm
    solution when the network is rank deficient.
    """
    return np.linalg.lstsq(assemble_analog(s, p), np.asarray(f_opt), rcond=None)[0]


def fitted_residual(f_opt, s, p) -> float:
    """Residual of S P against the target once F_BB is fitted by least squares."""
    return residual(f_opt, s, p, least_squares_digital(f_opt, s, p))


def alternate_stages(
    f_opt,
    cfg: SystemConfig,
    opts: SolverOptions,
    rng: Generator,
    phases: PhaseMatrix,
    report: SolverReport,
    update_phases: bool = True,
    start: Optional[LcState] = None,
) -> List[LcState]:
    """
    Runs the stage cycle until the surrogate settles and returns the
    state after every cycle. With ``update_phases`` off the phase matrix
    stays as given. Without a ``start`` state the cycle begins from
    alpha = 1 and fair coin switches.
    """
    f_opt = np.asarray(f_opt, dtype=complex)
    if f_opt.ndim != 2 or f_opt.shape[0] != cfg.n_tx:
        raise DimensionMismatchError(
            f'Target of shape {f_opt.shape} does not match {cfg.n_tx} antennas.'
        )

    if start is None:
        alpha = 1.0
        switches = SwitchMatrix(
            rng.integers(0, 2, size=(cfg.n_tx, cfg.n_ps * cfg.n_rf), dtype=np.uint8)
        )
    else:
        alpha, switches = start.alpha, start.switches

    offset = report.iterations
    report.stop_reason = 'max_iterations'
    previous = None
    states = []

    for cycle in range(1, opts.max_outer + 1):
        f_dd = design_semi_unitary(f_opt, switches, phases, alpha, report)
        if update_phases:
            phases = design_phase_matrix(
                f_opt, f_dd, switches, alpha, cfg.phase_bits, cfg.n_ps, report
            )
        value = surrogate(f_opt, switches, phases, f_dd, alpha)

        new_switches, new_alpha = design_switch_and_scale(
            f_opt, f_dd, phases, report
        )
        new_value = surrogate(f_opt, new_switches, phases, f_dd, new_alpha)
        # Keep the incumbent if the sweep cannot improve on it
        if new_value <= value:
            switches, alpha, value = new_switches, new_alpha, new_value

        current = residual(f_opt, switches, phases, alpha * f_dd)
        states.append(
            LcState(
                alpha=alpha,
                f_dd=f_dd,
                switches=switches,
                phases=phases,
                surrogate=value,
                fit=fitted_residual(f_opt, switches, phases),
            )
        )
        report.objective.append(value)
        report.residual.append(current)
        report.iterations = offset + cycle
        trace(
            f'{report.scheme} cycle {report.iterations}: surrogate {value:.9g}, residual {current:.9g}'
        )

        if previous is not None and relative_change(previous, value) < opts.rel_tol:
            report.stop_reason = 'rel_tol'
            break
        previous = value

    return states


def finish(
    f_opt,
    state: LcState,
    report: SolverReport,
    opts: SolverOptions,
    start,
    refine: bool = False,
):
    """
    Builds the precoder of a state, F_BB is alpha F_DD or, with
    ``refine``, the least squares fit for the state's analog network.
    """
    if refine:
        digital = least_squares_digital(f_opt, state.switches, state.phases)
    else:
        digital = state.alpha * state.f_dd
    precoder = HybridPrecoder(state.switches, state.phases, digital, report)
    if opts.normalize:
        precoder = normalize_digital(precoder)
    report.wall_time = time.perf_counter() - start
    dbg(
        f'{report.scheme} stopped after {report.iterations} cycles ({report.stop_reason}), surrogate {state.surrogate:.6g}, fit {state.fit:.6g}.'
    )
    return precoder


def vps_lc_hpd(
    f_opt,
    cfg: SystemConfig,
    opts: Optional[SolverOptions] = None,
    rng: Optional[Generator] = None,
) -> HybridPrecoder:
    """
    Low complexity hybrid precoder design.

    Starting from alpha = 1, random switches and evenly spread phases,
    the cycle first runs with the phases held (warm start) and then with
    all three stages. The surrogate never increases over both runs. Of
    all cycle states the best one is returned. With
    ``opts.refine_digital`` on, states are ranked by the residual of their
    analog network under a least squares F_BB, which is also the F_BB
    returned. Otherwise F_BB = alpha F_DD and states are ranked by
    ``aligned_residual``. The result is normalized unless
    ``opts.normalize`` is off.
    """
    opts = opts or SolverOptions()
    if rng is None:
        rng = default_rng(opts.rng_seed)
    f_opt = np.asarray(f_opt, dtype=complex)

    start = time.perf_counter()
    report = SolverReport(scheme='vps_lc_hpd')
    warm = alternate_stages(
        f_opt,
        cfg,
        opts,
        rng,
        # On the phase set even when n_ps does not divide 2^b
        initial_phases(cfg.n_rf, cfg.n_ps).quantized(cfg.phase_bits),
        report,
        update_phases=False,
    )
    states = warm + alternate_stages(
        f_opt, cfg, opts, rng, warm[-1].phases, report, start=warm[-1]
    )
    if opts.refine_digital:
        scores = [state.fit for state in states]
    else:
        scores = [
            aligned_residual(
                f_opt,
                assemble_analog(state.switches, state.phases)
                @ (state.alpha * state.f_dd),
            )
            for state in states
        ]
    # Rank deficient networks only win when every state is rank deficient
    rank = min(cfg.n_rf, f_opt.shape[1])
    keys = [
        (np.linalg.matrix_rank(assemble_analog(s.switches, s.phases)) < rank, score)
        for s, score in zip(states, scores)
    ]
    # First of equally good states
    best = states[min(range(len(states)), key=keys.__getitem__)]
    return finish(f_opt, best, report, opts, start, refine=opts.refine_digital)
