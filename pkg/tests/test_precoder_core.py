import math

import numpy as np
import pytest

from hpdsim.common.errors import (
    ConfigError,
    DegeneratePrecoderError,
    DimensionMismatchError,
    InvalidDimensionError,
    SolverError,
)
from hpdsim.precoder.core import (
    TWO_PI,
    HybridPrecoder,
    PhaseMatrix,
    PhaseSet,
    SolverOptions,
    SolverReport,
    SwitchMatrix,
    aligned_residual,
    assemble_analog,
    check_hardware,
    normalize_digital,
    quantize_phase,
    relative_change,
    residual,
)


def circular_distance(a, b):
    d = np.mod(a - b, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def test_phase_set():
    phases = PhaseSet(3)
    assert phases.size == 8
    assert phases.angles()[0] == pytest.approx(np.pi / 4)
    assert phases.angles()[-1] == pytest.approx(TWO_PI)
    assert phases.contains(0.0)
    assert not phases.contains(0.1)
    with pytest.raises(InvalidDimensionError):
        PhaseSet(0)


def test_quantize_phase_wraps_to_two_pi():
    assert quantize_phase(0.0, 2) == TWO_PI
    assert quantize_phase(0.1, 2) == TWO_PI
    assert quantize_phase(-0.1, 2) == TWO_PI
    assert quantize_phase(TWO_PI, 2) == TWO_PI


def test_quantize_phase_tie_goes_to_smaller_index():
    # Halfway between 0 (index 4) and π/2 (index 1)
    assert quantize_phase(np.pi / 4, 2) == pytest.approx(np.pi / 2)


def test_quantize_phase_is_nearest(rng):
    for b in (1, 2, 3, 5):
        theta = rng.uniform(-10, 10, size=200)
        q = quantize_phase(theta, b)
        grid = PhaseSet(b).angles()

        assert q.shape == theta.shape
        assert np.all((q > 0) & (q <= TWO_PI))
        assert PhaseSet(b).contains(q).all()

        best = circular_distance(theta[:, None], grid[None, :]).min(axis=1)
        assert np.allclose(circular_distance(theta, q), best, atol=1e-12)


def test_switch_matrix():
    s = SwitchMatrix(np.array([[1, 0, 1, 1], [0, 0, 1, 0]]))
    assert s.entries.dtype == np.uint8
    assert s.count_on() == 4
    assert np.array_equal(s.block(1, 2), [[1, 1], [1, 0]])
    assert SwitchMatrix(np.zeros((3, 4))).count_on() == 0

    with pytest.raises(ConfigError):
        SwitchMatrix(np.array([[0, 2]]))
    with pytest.raises(DimensionMismatchError):
        SwitchMatrix(np.array([0, 1]))


def test_phase_matrix_layout():
    angles = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, TWO_PI]])
    p = PhaseMatrix.from_angles(angles)

    assert p.shape == (6, 2)
    assert p.n_ps == 3
    assert p.n_rf == 2
    assert np.allclose(np.abs(p.entries[p.mask()]), 1 / np.sqrt(3))
    assert np.all(p.entries[~p.mask()] == 0)
    assert np.allclose(p.vector(1), np.exp(1j * angles[1]) / np.sqrt(3))
    assert np.allclose(p.angles(), angles)

    with pytest.raises(DimensionMismatchError):
        PhaseMatrix(np.zeros((5, 2)), 3)


def test_quantized_phase_matrix():
    p = PhaseMatrix.from_angles(np.array([[0.1, 1.5]])).quantized(2)
    assert np.allclose(p.angles(), [[TWO_PI, np.pi / 2]])


def test_assemble_analog_dimensions():
    s = SwitchMatrix(np.zeros((4, 6)))
    p = PhaseMatrix.from_angles(np.ones((2, 3)))
    assert assemble_analog(s, p).shape == (4, 2)
    with pytest.raises(DimensionMismatchError):
        assemble_analog(SwitchMatrix(np.zeros((4, 5))), p)


def test_normalize_digital(rng):
    s = SwitchMatrix(rng.integers(0, 2, size=(8, 4)))
    p = PhaseMatrix.from_angles(rng.uniform(0, TWO_PI, size=(2, 2)))
    f_bb = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    s.entries[0, :] = 1

    pre = normalize_digital(HybridPrecoder(s, p, f_bb))
    assert np.linalg.norm(pre.effective) ** 2 == pytest.approx(2)
    assert pre.n_streams == 2

    with pytest.raises(DegeneratePrecoderError):
        normalize_digital(HybridPrecoder(SwitchMatrix(np.zeros((8, 4))), p, f_bb))


def test_residual(rng):
    s = SwitchMatrix(rng.integers(0, 2, size=(6, 4)))
    p = PhaseMatrix.from_angles(rng.uniform(0, TWO_PI, size=(2, 2)))
    f_bb = rng.standard_normal((2, 3))
    f_opt = rng.standard_normal((6, 3))

    diff = f_opt - s.entries @ p.entries @ f_bb
    expected = sum(abs(x) ** 2 for x in diff.ravel())
    assert residual(f_opt, s, p, f_bb) == pytest.approx(expected)

    with pytest.raises(DimensionMismatchError):
        residual(f_opt[:, :2], s, p, f_bb)


def test_relative_change():
    assert relative_change(0.0, 0.0) == 0.0
    assert relative_change(0.0, 1.0) == math.inf
    assert relative_change(2.0, 1.5) == pytest.approx(0.25)


def test_solver_options_validation():
    with pytest.raises(InvalidDimensionError):
        SolverOptions(max_outer=0)
    with pytest.raises(ConfigError):
        SolverOptions(rel_tol=-1)
    with pytest.raises(ConfigError):
        SolverOptions(armijo_c=1.5)


def test_report_flags_once():
    report = SolverReport(scheme='test')
    report.flag('pinv_fallback', 'first')
    report.flag('pinv_fallback', 'second')
    assert report.flags == {'pinv_fallback'}


def test_aligned_residual(rng):
    f_opt = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    effective = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))

    value = aligned_residual(f_opt, effective)
    assert aligned_residual(f_opt, (2 - 3j) * effective) == pytest.approx(value)
    for c in (0.5, 1.0, 1j, -2.0):
        assert value <= np.linalg.norm(f_opt - c * effective) ** 2 + 1e-12

    assert aligned_residual(f_opt, 4j * f_opt) == pytest.approx(0.0, abs=1e-12)
    assert aligned_residual(f_opt, np.zeros((6, 2))) == pytest.approx(
        np.linalg.norm(f_opt) ** 2
    )


def _hybrid(rng, angles):
    s = SwitchMatrix(rng.integers(0, 2, size=(8, 4)))
    s.entries[0, :] = 1
    f_bb = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return normalize_digital(
        HybridPrecoder(s, PhaseMatrix.from_angles(angles), f_bb)
    )


def test_check_hardware(rng):
    on_grid = np.pi / 2 * np.array([[1.0, 2.0], [3.0, 4.0]])
    pre = _hybrid(rng, on_grid)
    check_hardware(pre, phase_bits=2)
    check_hardware(pre, phase_bits=2, normalized=False)

    with pytest.raises(SolverError):
        check_hardware(_hybrid(rng, on_grid + 0.1), phase_bits=2)
    # Off the phase set is fine for fixed phase networks
    check_hardware(_hybrid(rng, on_grid + 0.1))

    with pytest.raises(SolverError):
        check_hardware(HybridPrecoder(pre.switches, pre.phases, 2 * pre.digital))

    pre.phases.entries[1, 1] = 0.5
    with pytest.raises(SolverError):
        check_hardware(pre, normalized=False)


def test_check_hardware_rejects_non_finite(rng):
    pre = _hybrid(rng, np.ones((2, 2)))
    pre.digital[0, 0] = np.nan
    with pytest.raises(SolverError):
        check_hardware(pre, normalized=False)
