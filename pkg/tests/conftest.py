import numpy as np
import pytest

from context import hpdsim

from hpdsim.common.channel import (
    ChannelParams,
    SystemConfig,
    generate_channel,
    optimal_precoder_combiner,
)
from hpdsim.logging import reset_log_level
from hpdsim.precoder import PhaseSet, SolverOptions


@pytest.fixture(autouse=True)
def _log_level():
    yield
    reset_log_level()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cfg():
    return SystemConfig(
        n_tx=16, n_rx=8, n_rf=2, n_streams=2, n_ps=4, phase_bits=3
    )


@pytest.fixture
def fast_opts():
    return SolverOptions(max_outer=6, max_inner=4, manifold_max_iter=50)


@pytest.fixture
def small_channel(small_cfg):
    return generate_channel(
        small_cfg, ChannelParams(), np.random.default_rng(7)
    )


@pytest.fixture
def small_target(small_cfg, small_channel):
    return optimal_precoder_combiner(small_channel, small_cfg.n_streams)


def assert_hardware_constraints(precoder, cfg, n_streams, check_phases=True):
    """Binary switches, masked phases of magnitude 1/sqrt(n_ps), unit power."""
    switches = precoder.switches.entries
    assert set(np.unique(switches)) <= {0, 1}

    phases = precoder.phases
    mask = phases.mask()
    assert np.allclose(np.abs(phases.entries[mask]), 1 / np.sqrt(cfg.n_ps))
    assert np.all(phases.entries[~mask] == 0)
    if check_phases:
        assert PhaseSet(cfg.phase_bits).contains(phases.angles()).all()

    power = np.linalg.norm(precoder.effective) ** 2
    assert power == pytest.approx(n_streams, abs=1e-9)
