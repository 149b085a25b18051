import numpy as np

from conftest import assert_hardware_constraints

from hpdsim.precoder import SolverOptions, frozen_phase_baseline
from hpdsim.precoder.frozen_phase import fixed_phases


def test_fixed_phases():
    p = fixed_phases(2, 4)
    assert np.allclose(np.angle(p.vector(0)), [0, np.pi / 2, np.pi, -np.pi / 2])


def test_phases_never_change(small_cfg, small_target):
    precoder = frozen_phase_baseline(small_target.f_opt, small_cfg)
    expected = fixed_phases(small_cfg.n_rf, small_cfg.n_ps)

    assert np.array_equal(precoder.phases.entries, expected.entries)
    assert_hardware_constraints(precoder, small_cfg, small_cfg.n_streams)
    assert precoder.report.scheme == 'frozen_phase'


def test_surrogate_is_monotone(small_cfg, small_target):
    precoder = frozen_phase_baseline(
        small_target.f_opt, small_cfg, SolverOptions(rel_tol=0.0)
    )
    values = np.array(precoder.report.objective)
    assert np.all(np.diff(values) <= 1e-9 * max(1.0, abs(values[0])))
