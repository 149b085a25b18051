import numpy as np
import pytest

from hpdsim.common.channel import (
    ChannelParams,
    SystemConfig,
    assemble_channel,
    generate_channel,
    optimal_precoder_combiner,
    steering_vector,
)
from hpdsim.common.errors import ConfigError, InvalidDimensionError


def test_default_system_config():
    cfg = SystemConfig()
    assert (cfg.n_tx, cfg.n_rx, cfg.n_rf, cfg.n_streams) == (64, 16, 4, 4)
    assert (cfg.n_ps, cfg.phase_bits, cfg.groups) == (8, 3, 1)


@pytest.mark.parametrize(
    'kwargs',
    [
        dict(n_streams=5),
        dict(n_rf=0),
        dict(n_rx=2),
        dict(groups=3),
        dict(groups=8),
        dict(phase_bits=0),
        dict(n_ps=2.5),
    ],
)
def test_invalid_system_config(kwargs):
    with pytest.raises(InvalidDimensionError):
        SystemConfig(**kwargs)


def test_invalid_dimension_is_config_error():
    with pytest.raises(ConfigError):
        SystemConfig(n_tx=0)


def test_receiver_swaps_antennas():
    cfg = SystemConfig(groups=2).receiver()
    assert (cfg.n_tx, cfg.n_rx, cfg.groups) == (16, 64, 2)


def test_channel_params_validation():
    with pytest.raises(InvalidDimensionError):
        ChannelParams(n_paths=3)
    with pytest.raises(InvalidDimensionError):
        ChannelParams(n_paths=1, gain_variances=[-1.0])
    assert ChannelParams(n_paths=1, gain_variances=[2]).gain_variances == (2.0,)


def test_steering_vector():
    a = steering_vector(8, 0.3)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    assert a[0] == pytest.approx(1 / np.sqrt(8))
    assert a[1] / a[0] == pytest.approx(np.exp(1j * np.pi * np.sin(0.3)))
    with pytest.raises(InvalidDimensionError):
        steering_vector(0, 0.3)


def test_assemble_channel_single_path():
    gain, aod, aoa = 0.5 - 0.2j, 0.4, 1.1
    h = assemble_channel([gain], [aod], [aoa], n_tx=6, n_rx=3)

    expected = np.zeros((3, 6), dtype=complex)
    for r in range(3):
        for t in range(6):
            expected[r, t] = (
                np.sqrt(18)
                * gain
                * np.exp(1j * np.pi * r * np.sin(aoa))
                * np.exp(-1j * np.pi * t * np.sin(aod))
                / np.sqrt(18)
            )
    assert np.allclose(h, expected)


def test_generate_channel_is_seeded(small_cfg):
    params = ChannelParams()
    a = generate_channel(small_cfg, params, np.random.default_rng(3))
    b = generate_channel(small_cfg, params, np.random.default_rng(3))
    c = generate_channel(small_cfg, params, np.random.default_rng(4))

    assert a.matrix.shape == (small_cfg.n_rx, small_cfg.n_tx)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, c.matrix)
    assert np.all((a.aod >= 0) & (a.aod < 2 * np.pi))
    assert np.all((a.aoa >= 0) & (a.aoa < 2 * np.pi))


def test_generate_channel_defaults_to_params_seed(small_cfg):
    params = ChannelParams(rng_seed=11)
    a = generate_channel(small_cfg, params)
    b = generate_channel(small_cfg, params, np.random.default_rng(11))
    assert np.array_equal(a.matrix, b.matrix)


def test_optimal_precoder_combiner(small_channel, small_cfg):
    target = optimal_precoder_combiner(small_channel, small_cfg.n_streams)
    f, w = target.f_opt, target.w_opt

    assert f.shape == (small_cfg.n_tx, small_cfg.n_streams)
    assert w.shape == (small_cfg.n_rx, small_cfg.n_streams)
    assert np.allclose(f.conj().T @ f, np.eye(small_cfg.n_streams))
    assert np.allclose(w.conj().T @ w, np.eye(small_cfg.n_streams))

    s = target.singular_values
    assert np.all(np.diff(s) <= 0)
    g = w.conj().T @ small_channel.matrix @ f
    assert np.allclose(np.abs(np.diag(g)), s)
    assert np.allclose(g - np.diag(np.diag(g)), 0, atol=1e-9)
    assert not target.rank_deficient

    for vectors in (f, w):
        pivots = vectors[np.argmax(np.abs(vectors), axis=0), range(2)]
        assert np.allclose(pivots.imag, 0)
        assert np.all(pivots.real > 0)


def test_rank_deficient_channel():
    h = assemble_channel([1.0], [0.2], [0.7], n_tx=8, n_rx=4)
    target = optimal_precoder_combiner(h, 2)
    assert target.rank_deficient


def test_too_many_streams():
    with pytest.raises(InvalidDimensionError):
        optimal_precoder_combiner(np.ones((2, 4)), 3)


def test_mean_channel_power(small_cfg):
    params = ChannelParams()
    rng = np.random.default_rng(2024)
    power = [
        np.linalg.norm(generate_channel(small_cfg, params, rng).matrix) ** 2
        for _ in range(4000)
    ]
    expected = (
        small_cfg.n_tx * small_cfg.n_rx * sum(params.gain_variances) / params.n_paths
    )
    assert np.mean(power) == pytest.approx(expected, rel=0.05)
