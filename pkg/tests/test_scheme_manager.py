import dataclasses
import math

import numpy as np
import pytest

from conftest import assert_hardware_constraints

from hpdsim.common.channel import SystemConfig
from hpdsim.common.errors import ConfigError, SolverError
from hpdsim.precoder import SolverOptions
from hpdsim.precoder.frozen_phase import fixed_phases
from hpdsim.precoder.vps_lc_hpd import vps_lc_hpd
from hpdsim.scheme import (
    ExperimentSpec,
    SchemeManager,
    convergence_trace,
    design_pair,
    registered_schemes,
    run_experiment,
)
from hpdsim.scheme.scheme import ResultType, Scheme


@pytest.fixture
def spec(small_cfg):
    return ExperimentSpec(
        system=small_cfg,
        schemes=['vps_hpd', 'vps_lc_hpd', 'frozen_phase', 'fully_digital'],
        snr_grid_db=[0.0, 10.0],
        trials=3,
        solver_opts=SolverOptions(max_outer=4, max_inner=3, manifold_max_iter=30),
        master_seed=17,
        record_timing=False,
    )


class BrokenScheme(Scheme):
    def implementation(self, target, cfg, opts):
        raise SolverError('no design')


class OffGridScheme(Scheme):
    def implementation(self, target, cfg, opts):
        precoder = vps_lc_hpd(target, cfg, opts)
        precoder.phases.entries[precoder.phases.mask()] *= np.exp(0.1j)
        return precoder


def test_registered_schemes():
    assert set(registered_schemes) >= {
        'vps_hpd',
        'vps_lc_hpd',
        'gc_vps_hpd',
        'gc_vps_lc_hpd',
        'frozen_phase',
        'gc_frozen_phase',
        'fully_digital',
    }
    assert registered_schemes['gc_vps_hpd'].grouped
    assert registered_schemes['gc_frozen_phase'].grouped
    assert not registered_schemes['gc_frozen_phase'].quantized_phases
    assert registered_schemes['vps_hpd'].name == 'vps_hpd'


def test_run_experiment(spec):
    manager = SchemeManager(spec, threads=1)
    rows = manager.run()

    assert manager.result_type == ResultType.SUCCESS
    assert len(rows) == 4 * 2
    assert rows == sorted(rows, key=lambda r: r.sort_key())
    for row in rows:
        assert row.trials == 3
        assert row.failures == 0
        assert row.wall_time_seconds == 0.0
        assert math.isfinite(row.se_mean) and row.se_mean >= 0
        assert row.ee_mean > 0
        assert row.se_stddev >= 0

    by_scheme = {}
    for row in rows:
        by_scheme.setdefault(row.scheme, []).append(row.se_mean)
    for values in by_scheme.values():
        assert values[0] <= values[1]

    digital = [row for row in rows if row.scheme == 'fully_digital']
    assert all(row.residual_mean == 0.0 for row in digital)


def test_results_do_not_depend_on_threads_or_order(spec):
    a = run_experiment(spec, threads=1)
    b = run_experiment(
        dataclasses.replace(spec, schemes=list(reversed(spec.schemes))),
        threads=3,
    )
    assert a == b


def test_timing_is_recorded(spec):
    spec = dataclasses.replace(spec, schemes=['vps_lc_hpd'], trials=1)
    rows = run_experiment(spec, threads=1)
    assert all(row.wall_time_seconds > 0 for row in rows)


def test_unknown_scheme(spec):
    with pytest.raises(ConfigError):
        SchemeManager(dataclasses.replace(spec, schemes=['altmin']))


def test_enumerate_cases(spec):
    spec = dataclasses.replace(
        spec,
        schemes=['vps_hpd', 'gc_vps_lc_hpd', 'fully_digital'],
        n_ps_grid=[2, 4],
        groups_grid=[1, 2],
    )
    cases = SchemeManager(spec, threads=1).cases
    assert [tuple(case) for case in cases] == [
        ('vps_hpd', 2, 1),
        ('vps_hpd', 4, 1),
        ('gc_vps_lc_hpd', 2, 1),
        ('gc_vps_lc_hpd', 2, 2),
        ('gc_vps_lc_hpd', 4, 1),
        ('gc_vps_lc_hpd', 4, 2),
        ('fully_digital', 4, 1),
    ]


def test_group_count_must_fit_receiver(spec):
    spec = dataclasses.replace(
        spec, schemes=['gc_vps_hpd'], groups_grid=[3]
    )
    with pytest.raises(ConfigError):
        SchemeManager(spec)


def test_failures_are_counted(spec, monkeypatch):
    monkeypatch.setitem(registered_schemes, 'broken', BrokenScheme)
    spec = dataclasses.replace(spec, schemes=['broken', 'fully_digital'])
    manager = SchemeManager(spec, threads=1)
    rows = manager.run()

    assert manager.result_type == ResultType.ERROR
    broken = [row for row in rows if row.scheme == 'broken']
    assert len(broken) == 2
    assert all(row.failures == 3 for row in broken)
    assert all(math.isnan(row.se_mean) for row in broken)
    assert all(
        row.failures == 0 for row in rows if row.scheme == 'fully_digital'
    )


def test_cancel(spec):
    manager = SchemeManager(spec, threads=1)
    manager.cancel()
    assert manager.run() == []
    assert manager.result_type == ResultType.CANCELED


def test_design_pair(spec, small_cfg):
    tx, rx = design_pair(spec, 'vps_lc_hpd', trial=1)
    assert tx.effective.shape == (small_cfg.n_tx, small_cfg.n_streams)
    assert rx.effective.shape == (small_cfg.n_rx, small_cfg.n_streams)
    assert np.linalg.norm(tx.effective) ** 2 == pytest.approx(small_cfg.n_streams)


def test_convergence_trace(spec):
    points = convergence_trace(spec, 'vps_hpd')
    assert [p.iteration for p in points] == list(range(1, len(points) + 1))
    assert all(p.scheme == 'vps_hpd' for p in points)
    assert convergence_trace(spec, 'fully_digital') == []


def test_designs_breaking_hardware_constraints_fail(spec, monkeypatch):
    monkeypatch.setitem(registered_schemes, 'off_grid', OffGridScheme)
    spec = dataclasses.replace(spec, schemes=['off_grid'], trials=2)
    manager = SchemeManager(spec, threads=1)
    rows = manager.run()

    assert manager.result_type == ResultType.ERROR
    assert all(row.failures == 2 for row in rows)


def test_no_failures_with_two_phase_shifters():
    # Two phase shifters per chain is where RF chains used to switch off for good
    spec = ExperimentSpec(
        system=SystemConfig(
            n_tx=16, n_rx=8, n_rf=4, n_streams=4, n_ps=2, phase_bits=3
        ),
        schemes=['vps_hpd', 'gc_vps_hpd'],
        snr_grid_db=[0.0],
        trials=6,
        groups_grid=[1, 2],
        solver_opts=SolverOptions(max_outer=6, max_inner=4, manifold_max_iter=40),
        record_timing=False,
    )
    rows = run_experiment(spec, threads=1)
    assert len(rows) == 3
    for row in rows:
        assert row.failures == 0, row.scheme
        assert row.se_mean > 0


def test_grouped_frozen_phase(spec, small_cfg):
    spec = dataclasses.replace(spec, groups_grid=[2])
    tx, rx = design_pair(spec, 'gc_frozen_phase', trial=0)

    assert_hardware_constraints(tx, small_cfg, small_cfg.n_streams, check_phases=False)
    expected = fixed_phases(small_cfg.n_rf, small_cfg.n_ps).vectors()
    assert np.array_equal(tx.phases.vectors(), expected)
    assert np.array_equal(rx.phases.vectors(), expected)

    # Block diagonal switches, one block per group
    half_rows, half_cols = small_cfg.n_tx // 2, small_cfg.n_ps * small_cfg.n_rf // 2
    assert not tx.switches.entries[:half_rows, half_cols:].any()
    assert not tx.switches.entries[half_rows:, :half_cols].any()
    assert tx.report.scheme == 'gc_vps_frozen_phase'
