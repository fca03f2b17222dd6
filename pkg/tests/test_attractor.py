import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcan_nav.attractor import (
    AttractorNetwork,
    NetworkParams,
    ShiftCommand,
    circular_mean_index,
    decode_index,
    excitation,
    fractional_shift,
    inhibition,
    init_gaussian,
    motion_gain,
    shift_copy,
    step,
)
from mcan_nav.errors import ConfigurationError, OutOfRangeError, UndecodableError


def brute_circular_mean(weights):
    n = len(weights)
    s = sum(w * math.sin(2 * math.pi * i / n) for i, w in enumerate(weights))
    c = sum(w * math.cos(2 * math.pi * i / n) for i, w in enumerate(weights))
    return (math.atan2(s, c) * n / (2 * math.pi)) % n


def gaussian_oracle(shape, center, radius, sigma):
    """Direct per-cell evaluation of the truncated, wrapped Gaussian."""
    out = np.zeros(shape)
    for i in range(shape[0]):
        for j in range(shape[1]):
            di = (i - center[0] + shape[0] // 2) % shape[0] - shape[0] // 2
            dj = (j - center[1] + shape[1] // 2) % shape[1] - shape[1] // 2
            if abs(di) <= radius and abs(dj) <= radius:
                out[i, j] = math.exp(-(di**2) / (2 * sigma**2) - dj**2 / (2 * sigma**2))
    return out / np.linalg.norm(out)


class TestNetworkParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(activation_radius=0),
            dict(activation_radius=11),
            dict(excitation_radius=2.5),
            dict(motion_confidence=-0.1),
            dict(motion_confidence=1.1),
            dict(inhibition_factor=1e-6),
            dict(inhibition_factor=0.006),
            dict(sigma_x=0.0),
            dict(sigma_y=-1.0),
        ],
    )
    def test_out_of_range_rejected(self, kwargs):
        base = dict(activation_radius=3, excitation_radius=3, motion_confidence=0.5, inhibition_factor=1e-3)
        with pytest.raises(ConfigurationError):
            NetworkParams(**{**base, **kwargs})

    def test_bounds_accepted(self):
        NetworkParams(1, 10, 0.0, 1e-5)
        NetworkParams(10, 1, 1.0, 5e-3)

    def test_default_sigmas_are_half_radius(self):
        p = NetworkParams(4, 6, 1.0, 1e-4)
        assert p.sigmas(4, 2) == (2.0, 2.0)
        assert p.sigmas(6, 1) == (3.0,)


class TestShiftCommand:
    @given(st.floats(-60, 60, allow_nan=False), st.floats(-60, 60, allow_nan=False))
    def test_parts_reconstruct_offset(self, ax, ay):
        cmd = ShiftCommand.from_offset(ax, ay)
        assert all(0.0 <= f < 1.0 for f in cmd.fraction)
        assert cmd.offset == pytest.approx((ax, ay), abs=1e-12)

    def test_negative_split(self):
        cmd = ShiftCommand.from_offset(-1.25)
        assert cmd.integer == (-2,) and cmd.fraction == (0.75,)

    def test_tiny_negative_does_not_give_unit_fraction(self):
        cmd = ShiftCommand.from_offset(-1e-20)
        assert cmd.fraction[0] < 1.0

    def test_non_finite_rejected(self):
        with pytest.raises(OutOfRangeError):
            ShiftCommand.from_offset(float("nan"))


class TestInitGaussian:
    def test_peak_at_center(self, rng):
        p = NetworkParams(5, 3, 1.0, 1e-4)
        grid = init_gaussian((100, 100), (50, 50), p)
        assert np.unravel_index(grid.argmax(), grid.shape) == (50, 50)

    def test_zero_outside_window(self):
        grid = init_gaussian((100, 100), (50, 50), NetworkParams(5, 3, 1.0, 1e-4))
        assert grid[70, 70] == 0.0
        assert np.count_nonzero(grid) == 11 * 11

    def test_wraps_around_torus(self):
        p = NetworkParams(3, 3, 1.0, 1e-4)
        grid = init_gaussian((100, 100), (0, 0), p)
        assert grid[98, 98] > 0
        np.testing.assert_allclose(grid, gaussian_oracle((100, 100), (0, 0), 3, 1.5), atol=1e-15)

    def test_unit_norm(self):
        grid = init_gaussian((40, 30), (7, 29), NetworkParams(4, 3, 1.0, 1e-4))
        assert np.linalg.norm(grid) == pytest.approx(1.0, abs=1e-12)

    def test_one_dimensional(self):
        ring = init_gaussian((360,), (0,), NetworkParams(5, 3, 1.0, 1e-4))
        assert ring.argmax() == 0 and ring[355] > 0 and ring[354] == 0

    @pytest.mark.parametrize("shape", [(0, 10), (10, -1), ()])
    def test_bad_dims(self, shape):
        with pytest.raises(ConfigurationError):
            init_gaussian(shape, (0,) * len(shape), NetworkParams(1, 1, 1.0, 1e-4))

    def test_window_larger_than_grid(self):
        with pytest.raises(ConfigurationError):
            init_gaussian((5, 5), (2, 2), NetworkParams(3, 1, 1.0, 1e-4))


class TestShiftCopy:
    def test_single_point(self):
        grid = np.zeros((100, 100))
        grid[10, 10] = 1.0
        out = shift_copy(grid, ShiftCommand.from_offset(2, 3))
        assert out[12, 13] == 1.0 and out.sum() == 1.0

    def test_wraparound(self):
        grid = np.zeros((100, 100))
        grid[99, 99] = 1.0
        assert shift_copy(grid, ShiftCommand.from_offset(1, 1))[0, 0] == 1.0

    def test_zero_shift_keeps_positive_cells(self, rng):
        grid = rng.normal(size=(20, 20))
        np.testing.assert_array_equal(shift_copy(grid, ShiftCommand.from_offset(0, 0)), np.maximum(grid, 0))

    @given(st.integers(-250, 250), st.integers(-250, 250))
    def test_mass_conserved(self, ax, ay):
        grid = np.random.default_rng([ax + 250, ay + 250]).normal(size=(30, 40))
        out = shift_copy(grid, ShiftCommand.from_offset(ax, ay))
        assert out.sum() == pytest.approx(grid[grid > 0].sum(), rel=1e-12)


class TestFractionalShift:
    def test_zero_fraction_identity(self, rng):
        field = rng.random((10, 10))
        np.testing.assert_array_equal(fractional_shift(field, ShiftCommand.from_offset(0, 0), 1.0), field)

    def test_gamma_scales(self, rng):
        field = rng.random((10, 10))
        np.testing.assert_allclose(fractional_shift(field, ShiftCommand.from_offset(0, 0), 0.5), field / 2)

    def test_bilinear_split(self):
        field = np.zeros((10, 10))
        field[5, 5] = 1.0
        out = fractional_shift(field, ShiftCommand.from_offset(0.25, 0.25), 1.0)
        # oracle: explicit bilinear weights
        expected = {(5, 5): 0.75 * 0.75, (6, 5): 0.25 * 0.75, (5, 6): 0.75 * 0.25, (6, 6): 0.25 * 0.25}
        for cell, weight in expected.items():
            assert out[cell] == pytest.approx(weight, abs=1e-15)
        assert out.sum() == pytest.approx(1.0)
        assert expected[(5, 5)] == pytest.approx(0.5625)

    def test_single_axis_motion(self):
        field = np.zeros((10, 10))
        field[5, 5] = 1.0
        out = fractional_shift(field, ShiftCommand.from_offset(0.5, 0.0), 1.0)
        assert out[5, 5] == out[6, 5] == 0.5 and out[5, 6] == 0.0

    def test_fraction_near_one_matches_integer_shift(self, rng):
        grid = rng.random((15, 12))
        almost = ShiftCommand((2, 1), (1 - 1e-12, 1 - 1e-12))
        out = fractional_shift(shift_copy(grid, almost), almost, 1.0)
        exact = shift_copy(grid, ShiftCommand.from_offset(3, 2))
        np.testing.assert_allclose(out, exact, atol=1e-9)

    @given(st.floats(0, 0.999), st.floats(0, 0.999), st.floats(0, 1))
    def test_mass_scales_by_gamma(self, fx, fy, gamma):
        field = np.random.default_rng(7).random((8, 9))
        out = fractional_shift(field, ShiftCommand((0, 0), (fx, fy)), gamma)
        assert out.sum() == pytest.approx(gamma * field.sum(), rel=1e-12, abs=1e-12)


class TestExcitation:
    def test_zero_grid(self):
        assert not excitation(np.zeros((20, 20)), NetworkParams(1, 3, 1.0, 1e-4)).any()

    def test_single_neuron_peak(self):
        grid = np.zeros((100, 100))
        grid[50, 50] = 1.0
        field = excitation(grid, NetworkParams(1, 3, 1.0, 1e-4))
        assert field[50, 50] == pytest.approx(1.0)
        assert field[54, 50] == 0.0 and field[53, 50] > 0

    def test_two_neurons_superpose(self):
        grid = np.zeros((100, 100))
        grid[50, 50] = grid[52, 50] = 1.0
        p = NetworkParams(1, 3, 1.0, 1e-4, sigma_x=2.0, sigma_y=2.0)
        assert excitation(grid, p)[51, 50] == pytest.approx(2 * math.exp(-1 / 8), rel=1e-12)

    def test_matches_double_loop(self, rng):
        grid = np.where(rng.random((12, 14)) > 0.7, rng.random((12, 14)), 0.0)
        p = NetworkParams(1, 2, 1.0, 1e-4, sigma_x=1.3, sigma_y=0.8)
        expected = np.zeros_like(grid)
        for i, j in zip(*np.nonzero(grid)):
            for di in range(-2, 3):
                for dj in range(-2, 3):
                    w = math.exp(-di**2 / (2 * 1.3**2) - dj**2 / (2 * 0.8**2))
                    expected[(i + di) % 12, (j + dj) % 14] += grid[i, j] * w
        np.testing.assert_allclose(excitation(grid, p), expected, atol=1e-12)


class TestInhibition:
    @pytest.mark.parametrize("total,phi,expected", [(0.0, 0.005, 0.0), (1.0, 0.005, 0.005), (37.2, 0.001, 0.0372)])
    def test_arithmetic(self, total, phi, expected):
        grid = np.full((4, 5), total / 20)
        assert inhibition(grid, phi) == pytest.approx(expected)


class TestStep:
    def test_unit_norm_and_nonnegative(self, small_params, rng):
        grid = init_gaussian((30, 30), (10, 20), small_params)
        for _ in range(20):
            grid = step(grid, ShiftCommand.from_offset(*rng.uniform(-3, 3, 2)), small_params)
            assert np.linalg.norm(grid) == pytest.approx(1.0, abs=1e-9)
            assert grid.min() >= 0

    def test_translation_equivariance(self, small_params, rng):
        grid = np.maximum(rng.normal(size=(25, 25)), 0)
        grid /= np.linalg.norm(grid)
        cmd = ShiftCommand.from_offset(1.3, -0.4)
        for shift in [(3, 0), (-7, 11), (24, 24)]:
            a = step(np.roll(grid, shift, axis=(0, 1)), cmd, small_params)
            b = np.roll(step(grid, cmd, small_params), shift, axis=(0, 1))
            np.testing.assert_allclose(a, b, atol=1e-9)

    def test_zero_velocity_drift_small(self, sheet_params):
        net = AttractorNetwork((100, 100), sheet_params)
        start = net.decode()
        for _ in range(50):
            before = net.decode()
            net.step(0.0, 0.0)
            assert np.hypot(*np.subtract(net.decode(), before)) < 0.1
        assert np.hypot(*np.subtract(net.decode(), start)) < 0.1

    def test_integer_shift_advances(self, sheet_params):
        net = AttractorNetwork((100, 100), sheet_params)
        x0 = net.decode()[0]
        for _ in range(10):
            net.step(1.0, 0.0)
        assert (net.decode()[0] - x0) == pytest.approx(10, abs=0.5)


class TestDecode:
    def test_single_neuron(self):
        w = np.zeros(100)
        w[42] = 1
        assert circular_mean_index(w) == pytest.approx(42.0, abs=1e-9)

    def test_symmetric_wrap(self):
        w = np.zeros(100)
        w[99] = w[1] = 1
        assert min(circular_mean_index(w), 100 - circular_mean_index(w)) == pytest.approx(0.0, abs=1e-9)

    def test_half_index_bump(self):
        p = NetworkParams(4, 3, 1.0, 1e-4)
        bump = init_gaussian((100,), (20.5,), p)
        assert bump[20] == pytest.approx(bump[21])
        assert decode_index(bump) == pytest.approx(brute_circular_mean(bump), abs=1e-9)
        assert decode_index(bump) == pytest.approx(20.5, abs=1e-6)

    def test_marginal_axis(self):
        grid = init_gaussian((60, 80), (12, 70), NetworkParams(3, 3, 1.0, 1e-4))
        assert decode_index(grid, 0) == pytest.approx(12, abs=1e-9)
        assert decode_index(grid, 1) == pytest.approx(70, abs=1e-9)

    def test_range(self):
        w = np.zeros(50)
        w[0] = 1
        w[49] = 1e-30
        assert 0.0 <= circular_mean_index(w) < 50

    def test_all_zero_undecodable(self):
        with pytest.raises(UndecodableError):
            decode_index(np.zeros(10))


class TestAttractorNetwork:
    def test_shift_over_half_axis_rejected(self, small_params):
        net = AttractorNetwork((20, 20), small_params, calibrate=False)
        with pytest.raises(OutOfRangeError):
            net.step(10.0, 0.0)

    def test_wrong_arity(self, small_params):
        net = AttractorNetwork((20, 20), small_params, calibrate=False)
        with pytest.raises(ConfigurationError):
            net.step(1.0)

    def test_collapse_recovers_at_last_position(self):
        # uniform activity on a large ring: phi * N exceeds one, so inhibition wipes every neuron
        net = AttractorNetwork((400,), NetworkParams(10, 1, 0.0, 5e-3), center=(7,), calibrate=False)
        net.activity = np.full(400, 1 / 20)
        net.at_rest = False
        net._last = (7.0,)
        net.step(0.0)
        assert net.faults == 1
        assert net.decode()[0] == pytest.approx(7.0, abs=1e-9)

    def test_gain_calibration_is_near_one_for_tuned_sheet(self, sheet_params):
        assert 0.5 < motion_gain((100, 100), sheet_params) <= 1.0

    def test_neuron_count(self, small_params):
        assert AttractorNetwork((20, 30), small_params, calibrate=False).neuron_count == 600
