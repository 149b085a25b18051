"""
Statistical checks over many random instances and Monte Carlo trials.
Run with ``pytest -m slow``.
"""

import itertools
import time

import numpy as np
import pytest

from conftest import assert_hardware_constraints

from hpdsim.common.channel import SystemConfig
from hpdsim.precoder import SolverOptions
from hpdsim.precoder.core import PhaseMatrix, SwitchMatrix
from hpdsim.precoder.gc_vps import gc_vps
from hpdsim.precoder.vps_hpd import optimize_switch_row, solve_subproblem, vps_hpd
from hpdsim.precoder.vps_lc_hpd import (
    design_phase_matrix,
    design_semi_unitary,
    switch_and_scale_from,
    vps_lc_hpd,
)
from hpdsim.scheme import ExperimentSpec, SchemeManager, run_experiment

pytestmark = pytest.mark.slow


def complex_normal(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def se_at(rows, scheme, snr_db=0.0, n_c=None, q=None):
    for row in rows:
        if (
            row.scheme == scheme
            and row.snr_db == snr_db
            and (n_c is None or row.n_c == n_c)
            and (q is None or row.q == q)
        ):
            return row.se_mean
    raise KeyError(scheme)


def assert_no_failures(rows):
    # The harness validates every design against the hardware constraints
    # and counts a violation as a failed trial
    assert rows
    for row in rows:
        assert row.failures == 0, f'{row.scheme} n_c={row.n_c} q={row.q}'


def test_substep_oracles(rng):
    for _ in range(500):
        n_ps = int(rng.integers(1, 7))
        p = np.exp(1j * rng.uniform(0, 2 * np.pi, n_ps)) / np.sqrt(n_ps)
        f = complex_normal(rng)
        rows = list(itertools.product((0, 1), repeat=n_ps))[::-1]
        best = min(abs(f - np.dot(row, p)) for row in rows)
        assert abs(f - optimize_switch_row(f, p) @ p) == pytest.approx(best, abs=1e-12)

    grid = 2 * np.pi * np.arange(1, 9) / 8
    for _ in range(500):
        f_opt = complex_normal(rng, 8, 2)
        s = SwitchMatrix(rng.integers(0, 2, size=(8, 6)))
        f_dd = complex_normal(rng, 2, 2)
        alpha = rng.uniform(-2, 2)
        p = design_phase_matrix(f_opt, f_dd, s, alpha, 3, n_ps=3)
        g = s.entries.T @ f_opt @ f_dd.conj().T
        for i in range(2):
            for slot in range(3):
                t = g[3 * i + slot, i]
                best = (alpha * np.real(np.conj(t) * np.exp(1j * grid))).max()
                ours = alpha * np.real(np.conj(t) * p.vector(i)[slot]) * np.sqrt(3)
                assert ours >= best - 1e-12

    for _ in range(500):
        m = rng.standard_normal((3, 3))
        s, alpha = switch_and_scale_from(m)
        ours = np.sum((m - alpha * s.entries) ** 2)
        z = np.sort(m.ravel())
        alphas = np.linspace(2 * z[0], 2 * z[-1], 10**4)
        masks = np.where(
            alphas[:, None] > 0,
            m.ravel()[None, :] > alphas[:, None] / 2,
            m.ravel()[None, :] < alphas[:, None] / 2,
        )
        costs = np.sum((m.ravel()[None, :] - alphas[:, None] * masks) ** 2, axis=1)
        assert ours <= costs.min() * (1 + 1e-9)

    for _ in range(500):
        f_opt = complex_normal(rng, 8, 2)
        s = SwitchMatrix(rng.integers(0, 2, size=(8, 6)))
        p = PhaseMatrix.from_angles(rng.uniform(0, 2 * np.pi, size=(2, 3)))
        f_dd = design_semi_unitary(f_opt, s, p, 1.0)
        a = f_opt.conj().T @ s.entries @ p.entries
        nuclear = np.linalg.svd(a, compute_uv=False).sum()
        assert np.real(np.trace(f_dd @ a)) == pytest.approx(nuclear, abs=1e-8)


def test_monotonicity(rng):
    cfg = SystemConfig(n_tx=16, n_rx=8, n_rf=2, n_streams=2, n_ps=4)
    for seed in range(100):
        f = complex_normal(rng, 16)
        state = solve_subproblem(f, cfg, SolverOptions(rel_tol=0.0), rng)
        assert np.all(np.diff(state.history) <= 1e-9)

        f_opt = np.linalg.qr(complex_normal(rng, 16, 2))[0]
        precoder = vps_lc_hpd(f_opt, cfg, SolverOptions(rel_tol=0.0, rng_seed=seed))
        values = np.array(precoder.report.objective)
        assert np.all(np.diff(values) <= 1e-9 * max(1.0, abs(values[0])))
        assert_hardware_constraints(precoder, cfg, 2)


def test_group_reduction_identity(rng):
    cfg = SystemConfig()
    for seed in range(3):
        f_opt = np.linalg.qr(complex_normal(rng, 64, 4))[0]
        opts = SolverOptions(rng_seed=seed, max_outer=5)
        for solver, base in (('hpd', vps_hpd), ('lc_hpd', vps_lc_hpd)):
            a = gc_vps(f_opt, cfg, solver, opts)
            b = base(f_opt, cfg, opts)
            assert a.switches.entries.tobytes() == b.switches.entries.tobytes()
            assert a.phases.entries.tobytes() == b.phases.entries.tobytes()
            assert a.digital.tobytes() == b.digital.tobytes()


def test_spectral_efficiency_ordering():
    spec = ExperimentSpec(
        schemes=['fully_digital', 'vps_hpd', 'vps_lc_hpd', 'frozen_phase'],
        snr_grid_db=[0.0],
        record_timing=False,
    )
    rows = run_experiment(spec)
    assert_no_failures(rows)
    assert (
        se_at(rows, 'fully_digital')
        > se_at(rows, 'vps_hpd')
        > se_at(rows, 'vps_lc_hpd')
        > se_at(rows, 'frozen_phase')
    )


def test_phase_shifter_scaling():
    spec = ExperimentSpec(
        schemes=['vps_hpd'], snr_grid_db=[0.0], n_ps_grid=[2, 4, 8], record_timing=False
    )
    rows = run_experiment(spec)
    assert_no_failures(rows)
    se = [se_at(rows, 'vps_hpd', n_c=n_c) for n_c in (2, 4, 8)]
    assert se[0] < se[1] < se[2]
    assert se[1] - se[0] > 2 * (se[2] - se[1])


def test_group_scaling():
    spec = ExperimentSpec(
        schemes=['gc_vps_hpd', 'gc_frozen_phase'],
        snr_grid_db=[0.0],
        groups_grid=[1, 2, 4],
        record_timing=False,
    )
    rows = run_experiment(spec)
    assert_no_failures(rows)
    se = [se_at(rows, 'gc_vps_hpd', q=q) for q in (1, 2, 4)]
    assert se[0] - se[1] > 2
    assert se[1] - se[2] > 2


def test_complexity_gap():
    spec = ExperimentSpec(schemes=['vps_hpd', 'vps_lc_hpd'], trials=20)
    manager = SchemeManager(spec, threads=1)
    wall = {}
    for trial in range(spec.trials):
        _, target = manager.target(trial)
        for case in manager.cases:
            start = time.perf_counter()
            tx, rx = manager.design(case, target, trial)
            wall[case.scheme] = wall.get(case.scheme, 0.0) + time.perf_counter() - start

            cfg = manager.case_config(case)
            assert_hardware_constraints(tx, cfg, cfg.n_streams)
            assert np.linalg.matrix_rank(tx.effective) == cfg.n_streams
            assert np.linalg.matrix_rank(rx.effective) == cfg.n_streams
    assert wall['vps_lc_hpd'] <= wall['vps_hpd'] / 10
