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
Alternating hybrid precoder design for variable phase shifter networks.

The outer loop alternates between a least squares estimate of the
analog precoder and a least squares digital precoder. The analog
estimate is realized column by column: every RF chain solves an
independent subproblem that alternates a Riemannian descent over the
phase shifters with an exhaustive search over the switches.
"""

import time
from functools import lru_cache
from dataclasses import dataclass, field
from multiprocessing.pool import ThreadPool
from typing import List, Optional

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
    random_full_rank,
    relative_change,
    residual,
)
from ..common.channel import SystemConfig
from ..common.errors import CapacityError, DimensionMismatchError
from ..logging import dbg, trace

MAX_SWITCH_SEARCH = 20
# Analog columns with a smaller norm count as switched off
DEAD_CHAIN_TOL = 1e-9


@dataclass
class SubproblemState:
    q_i: np.ndarray
    p_i: np.ndarray
    objective: float
    iterations: int = 0
    # Objective after every half step, starting with the initial point
    history: List[float] = field(default_factory=list)


def column_objective(f_col, q_i, p_i) -> float:
    diff = f_col - q_i @ p_i
    return float(np.real(np.vdot(diff, diff)))


def _gram_inverse_apply(gram, rhs, report, what):
    if np.linalg.matrix_rank(gram) < gram.shape[0]:
        flag(
            report,
            'pinv_fallback',
            f'Singular Gram matrix in the {what} update, using the pseudo-inverse.',
        )
        return np.linalg.pinv(gram) @ rhs
    return np.linalg.solve(gram, rhs)


def ls_analog_estimate(
    f_opt, f_bb, report: Optional[SolverReport] = None
) -> np.ndarray:
    """
    Unconstrained least squares analog precoder for a fixed digital
    precoder, F_opt F_BB^H (F_BB F_BB^H)^-1.
    """
    f_opt, f_bb = np.asarray(f_opt), np.asarray(f_bb)
    if f_bb.shape[1] != f_opt.shape[1]:
        raise DimensionMismatchError(
            f'Digital precoder {f_bb.shape} does not match target {f_opt.shape}.'
        )
    gram = f_bb @ f_bb.conj().T
    # The Gram matrix is Hermitian, so G^-1 B F^H is the transposed estimate
    return _gram_inverse_apply(
        gram, f_bb @ f_opt.conj().T, report, 'analog'
    ).conj().T


def optimize_phase_vector(
    f_col,
    q_i,
    p_init,
    opts: Optional[SolverOptions] = None,
    history: Optional[List[float]] = None,
) -> np.ndarray:
    """
    Minimizes ||f - Q p||^2 over p with |p_k| = 1 / sqrt(n_ps) by
    gradient descent on the product of circles with Armijo backtracking.

    :param history: If given, the objective of every accepted step is
        appended to it.
    """
    opts = opts or SolverOptions()
    f_col = np.asarray(f_col, dtype=complex)
    q = np.asarray(q_i, dtype=float)
    p = np.asarray(p_init, dtype=complex).copy()
    n_ps = p.shape[0]
    radius = 1 / np.sqrt(n_ps)

    if not q.any():
        return p

    if n_ps == 1:
        c = q[:, 0] @ f_col
        if c == 0:
            return p
        p = radius * np.exp(1j * np.array([np.angle(c)]))
        if history is not None:
            history.append(column_objective(f_col, q, p))
        return p

    def retract(x, fallback):
        mag = np.abs(x)
        out = fallback.copy()
        nonzero = mag > 0
        out[nonzero] = radius * x[nonzero] / mag[nonzero]
        return out

    p = retract(p, radius * np.ones(n_ps, dtype=complex))
    cost = column_objective(f_col, q, p)

    # Inverse Lipschitz constant of the Euclidean gradient
    step = 1 / max(2 * np.linalg.norm(q, 2) ** 2, 1e-12)

    for _ in range(opts.manifold_max_iter):
        egrad = -2 * q.T @ (f_col - q @ p)
        rgrad = egrad - np.real(egrad * p.conj()) * p / radius**2
        gnorm2 = float(np.real(np.vdot(rgrad, rgrad)))
        if np.sqrt(gnorm2) < opts.manifold_grad_tol:
            break

        t = 2 * step
        for _ in range(50):
            candidate = retract(p - t * rgrad, p)
            new_cost = column_objective(f_col, q, candidate)
            if new_cost <= cost - opts.armijo_c * t * gnorm2:
                break
            t /= 2
        else:
            break

        step = t
        p, cost = candidate, new_cost
        if history is not None:
            history.append(cost)

    return p


@lru_cache(maxsize=None)
def switch_rows(n_ps: int) -> np.ndarray:
    """All binary rows of length n_ps in ascending integer order, MSB first."""
    values = np.arange(2**n_ps)[:, None]
    shifts = np.arange(n_ps - 1, -1, -1)[None, :]
    rows = ((values >> shifts) & 1).astype(np.uint8)
    rows.flags.writeable = False
    return rows


def _check_capacity(n_ps: int):
    if n_ps > MAX_SWITCH_SEARCH:
        raise CapacityError(
            f'Exhaustive switch search over 2^{n_ps} rows exceeds the limit of 2^{MAX_SWITCH_SEARCH}.'
        )


def optimize_switch_row(f_mi: complex, p) -> np.ndarray:
    """
    Binary row minimizing |f - row . p|. Ties go to the smallest row
    read as a binary number.
    """
    p = np.asarray(p, dtype=complex)
    _check_capacity(p.shape[0])
    rows = switch_rows(p.shape[0])
    return rows[np.argmin(np.abs(f_mi - rows @ p))].copy()


def optimize_switch_block(f_col, p) -> np.ndarray:
    """``optimize_switch_row`` for every antenna at once."""
    p = np.asarray(p, dtype=complex)
    _check_capacity(p.shape[0])
    rows = switch_rows(p.shape[0])
    distance = np.abs(np.asarray(f_col)[:, None] - (rows @ p)[None, :])
    return rows[np.argmin(distance, axis=1)]


def solve_subproblem(
    f_col,
    cfg: SystemConfig,
    opts: Optional[SolverOptions] = None,
    rng: Optional[Generator] = None,
) -> SubproblemState:
    """
    Alternates phase and switch updates for one RF chain starting from
    random switches and phases matched to the target.
    """
    opts = opts or SolverOptions()
    if rng is None:
        rng = default_rng(opts.rng_seed)

    f_col = np.asarray(f_col, dtype=complex)
    n_ps = cfg.n_ps
    radius = 1 / np.sqrt(n_ps)

    q = rng.integers(0, 2, size=(f_col.shape[0], n_ps), dtype=np.uint8)
    p = radius * np.exp(1j * np.angle(q.T.astype(float) @ f_col))

    objective = column_objective(f_col, q, p)
    history = [objective]

    iterations = 0
    for iterations in range(1, opts.max_inner + 1):
        p = optimize_phase_vector(f_col, q, p, opts)
        if opts.quantize_inner:
            p = radius * np.exp(1j * quantize_phase(np.angle(p), cfg.phase_bits))
        history.append(column_objective(f_col, q, p))

        q = optimize_switch_block(f_col, p)
        current = column_objective(f_col, q, p)
        history.append(current)

        if relative_change(objective, current) < opts.rel_tol:
            objective = current
            break
        objective = current

    return SubproblemState(
        q_i=q, p_i=p, objective=objective, iterations=iterations, history=history
    )


def digital_ls(s, p, f_opt, report: Optional[SolverReport] = None) -> np.ndarray:
    """Least squares digital precoder for a fixed analog precoder."""
    f_rf = assemble_analog(s, p)
    f_opt = np.asarray(f_opt)
    if f_rf.shape[0] != f_opt.shape[0]:
        raise DimensionMismatchError(
            f'Analog precoder {f_rf.shape} does not match target {f_opt.shape}.'
        )
    gram = f_rf.conj().T @ f_rf
    return _gram_inverse_apply(gram, f_rf.conj().T @ f_opt, report, 'digital')


def _solve_columns(f_rf_hat, cfg, opts, seeds) -> List[SubproblemState]:
    columns = range(f_rf_hat.shape[1])
    if opts.threads > 1:
        with ThreadPool(processes=opts.threads) as pool:
            pending = [
                pool.apply_async(
                    solve_subproblem,
                    (f_rf_hat[:, i], cfg, opts, default_rng(seeds[i])),
                )
                for i in columns
            ]
            return [result.get() for result in pending]
    return [
        solve_subproblem(f_rf_hat[:, i], cfg, opts, default_rng(seeds[i]))
        for i in columns
    ]


def _check_target(f_opt, cfg):
    if f_opt.ndim != 2 or f_opt.shape[0] != cfg.n_tx:
        raise DimensionMismatchError(
            f'Target of shape {f_opt.shape} does not match {cfg.n_tx} antennas.'
        )


def dead_chains(switches, phases, tol: float = DEAD_CHAIN_TOL) -> np.ndarray:
    """Indices of the RF chains whose analog column vanishes."""
    analog = assemble_analog(switches, phases)
    return np.flatnonzero(np.linalg.norm(analog, axis=0) <= tol)


def revive_chains(
    switches: SwitchMatrix,
    phases: PhaseMatrix,
    fallback: Optional[SwitchMatrix],
    rng: Generator,
    report: Optional[SolverReport] = None,
    attempts: int = 100,
) -> SwitchMatrix:
    """
    Gives every dead RF chain a new switch block. The chain's block of
    ``fallback`` is used when it is alive with the current phases,
    otherwise fair coin blocks are drawn until one is.
    """
    dead = dead_chains(switches, phases)
    if not dead.size:
        return switches

    n_ps = phases.n_ps
    entries = switches.entries.copy()
    for i in dead:
        p_i = phases.vector(i)
        block = None
        if fallback is not None:
            block = fallback.block(i, n_ps)
        for _ in range(attempts):
            if block is not None and np.linalg.norm(block @ p_i) > DEAD_CHAIN_TOL:
                break
            block = rng.integers(0, 2, size=(entries.shape[0], n_ps), dtype=np.uint8)
        entries[:, i * n_ps : (i + 1) * n_ps] = block

    flag(
        report,
        'dead_rf_chain',
        f'{dead.size} RF chain(s) lost every switch, their switch blocks were replaced.',
    )
    return SwitchMatrix(entries)


def full_rank(switches, phases, f_bb) -> bool:
    effective = assemble_analog(switches, phases) @ f_bb
    return np.linalg.matrix_rank(effective) == min(f_bb.shape)


def vps_hpd(
    f_opt,
    cfg: SystemConfig,
    opts: Optional[SolverOptions] = None,
    rng: Optional[Generator] = None,
) -> HybridPrecoder:
    """
    Designs a hybrid precoder approximating ``f_opt``.

    Phases stay continuous inside the subproblems and are quantized once
    per outer iteration, before the digital update. An RF chain that
    loses all of its switches gets a new switch block, and a rank
    deficient digital precoder is replaced by a fresh random one before
    the next analog estimate. The best full rank iterate by residual is
    returned, normalized unless ``opts.normalize`` is off.

    ``report.initial_residual`` is the residual of the first analog
    network paired with the initial digital precoder at its best scale.
    """
    opts = opts or SolverOptions()
    if rng is None:
        rng = default_rng(opts.rng_seed)

    f_opt = np.asarray(f_opt, dtype=complex)
    _check_target(f_opt, cfg)
    n_streams = f_opt.shape[1]

    start = time.perf_counter()
    report = SolverReport(scheme='vps_hpd')

    f_bb = random_full_rank(rng, cfg.n_rf, n_streams)

    best = None
    previous = None
    fallback = None
    for outer in range(1, opts.max_outer + 1):
        f_rf_hat = ls_analog_estimate(f_opt, f_bb, report)

        seeds = rng.integers(0, 2**62, size=cfg.n_rf)
        states = _solve_columns(f_rf_hat, cfg, opts, seeds)

        switches = SwitchMatrix(np.hstack([state.q_i for state in states]))
        phases = PhaseMatrix.from_vectors(
            [state.p_i for state in states]
        ).quantized(cfg.phase_bits)
        switches = revive_chains(switches, phases, fallback, rng, report)
        fallback = switches

        if report.initial_residual is None:
            report.initial_residual = aligned_residual(
                f_opt, assemble_analog(switches, phases) @ f_bb
            )

        f_bb = digital_ls(switches, phases, f_opt, report)

        current = residual(f_opt, switches, phases, f_bb)
        report.objective.append(current)
        report.residual.append(current)
        report.iterations = outer
        trace(f'vps_hpd outer {outer}: residual {current:.9g}')

        # A rank deficient iterate only wins when nothing else is available
        rank_ok = full_rank(switches, phases, f_bb)
        if best is None or (not rank_ok, current) < (not best[1], best[0]):
            best = (current, rank_ok, switches, phases, f_bb)
        if not rank_ok:
            flag(
                report,
                'digital_restart',
                'Rank deficient iterate, restarting from a random digital precoder.',
            )
            f_bb_next = random_full_rank(rng, cfg.n_rf, n_streams)
        else:
            f_bb_next = f_bb

        if previous is not None and relative_change(previous, current) < opts.rel_tol:
            report.stop_reason = 'rel_tol'
            break
        previous = current
        f_bb = f_bb_next

    current, _, switches, phases, f_bb = best
    precoder = HybridPrecoder(switches, phases, f_bb, report)
    if opts.normalize:
        precoder = normalize_digital(precoder)

    report.wall_time = time.perf_counter() - start
    dbg(
        f'vps_hpd stopped after {report.iterations} iterations ({report.stop_reason}), residual {current:.6g}.'
    )
    return precoder
