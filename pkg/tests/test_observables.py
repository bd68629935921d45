import math

import numpy as np
import pytest

from conftest import LAMBDA_MAX, M10, M21, MODEL
from core.errors import DomainError
from core.observables import (
    max_orientation_over_revival,
    orientation_at,
    orientation_trace,
    population_phase_report,
    wrap_phase,
)
from core.optimum import lagrange_optimum
from core.propagator import WavePacket
from core.rotor import RotorModel

OPTIMAL = WavePacket(lagrange_optimum(M10, M21).coeff_magnitudes)


def _random_packet(rng, n=3):
    coeffs = rng.normal(size=n) + 1j * rng.normal(size=n)
    return WavePacket(coeffs / np.linalg.norm(coeffs))


def test_ground_state_is_not_oriented():
    ground = WavePacket.ground(MODEL)
    times = np.linspace(0, 2 * math.pi, 50)
    np.testing.assert_array_equal(orientation_at(ground, MODEL, times), 0)


def test_orientation_matches_matrix_expectation():
    rng = np.random.default_rng(3)
    packet = _random_packet(rng)
    t = 0.83
    psi = packet.coeffs * np.exp(-1j * MODEL.energies() * t)
    expected = np.real(np.conj(psi) @ MODEL.cos_matrix() @ psi)
    assert orientation_at(packet, MODEL, t) == pytest.approx(expected)


def test_optimal_packet_peaks_at_the_bound():
    assert orientation_at(OPTIMAL, MODEL, 0.0) == pytest.approx(LAMBDA_MAX)
    peak, t_peak = max_orientation_over_revival(OPTIMAL, MODEL)
    assert peak == pytest.approx(LAMBDA_MAX, abs=1e-12)
    assert math.remainder(t_peak, MODEL.revival_period) == pytest.approx(
        0.0, abs=1e-6
    )


@pytest.mark.parametrize("offset", [0.3, 1.0, 2.0])
def test_broken_phase_relation_lowers_the_peak(offset):
    coeffs = OPTIMAL.coeffs.copy()
    coeffs[2] *= np.exp(1j * offset)
    peak, _ = max_orientation_over_revival(WavePacket(coeffs), MODEL)
    assert peak < LAMBDA_MAX - 1e-4


def test_opposite_sign_keeps_the_peak():
    coeffs = OPTIMAL.coeffs.copy()
    coeffs[2] *= -1
    peak, _ = max_orientation_over_revival(WavePacket(coeffs), MODEL)
    assert peak == pytest.approx(LAMBDA_MAX, abs=1e-6)


def test_revival_periodicity():
    rng = np.random.default_rng(5)
    period = MODEL.revival_period
    for _ in range(20):
        packet = _random_packet(rng)
        t = rng.uniform(0, 10)
        assert orientation_at(packet, MODEL, t + period) == pytest.approx(
            orientation_at(packet, MODEL, t), abs=1e-10
        )


def test_refined_maximum_beats_the_grid():
    rng = np.random.default_rng(9)
    packet = _random_packet(rng)
    coarse, _ = max_orientation_over_revival(packet, MODEL, grid_points=256)
    fine_times = np.linspace(0, MODEL.revival_period, 200001)
    brute = np.max(np.abs(orientation_at(packet, MODEL, fine_times)))
    assert coarse == pytest.approx(brute, abs=1e-9)
    assert coarse <= LAMBDA_MAX + 1e-12


def test_maximum_starts_at_reference_time():
    packet = WavePacket(OPTIMAL.coeffs, reference_time=12.5)
    peak, t_peak = max_orientation_over_revival(packet, MODEL)
    assert peak == pytest.approx(LAMBDA_MAX, abs=1e-12)
    assert 12.5 <= t_peak <= 12.5 + MODEL.revival_period


def test_orientation_trace():
    trace = orientation_trace(OPTIMAL, MODEL, 0.0, MODEL.revival_period, 101)
    assert trace.times.shape == (101,)
    assert trace.max_value == pytest.approx(LAMBDA_MAX)
    assert trace.argmax_time in (0.0, MODEL.revival_period)
    assert trace.samples[0] == (0.0, pytest.approx(LAMBDA_MAX))
    with pytest.raises(DomainError):
        orientation_trace(OPTIMAL, MODEL, 1.0, 1.0)
    with pytest.raises(DomainError):
        orientation_trace(OPTIMAL, MODEL, 0.0, 1.0, n=1)


def test_size_mismatch():
    with pytest.raises(DomainError):
        orientation_at(OPTIMAL, RotorModel(j_max=3), 0.0)


def test_report_zeroes_unpopulated_phases():
    packet = WavePacket([math.sqrt(1 - 1e-6), 1e-3j, 0.0])
    report = population_phase_report(packet)
    np.testing.assert_allclose(report.populations, [1 - 1e-6, 1e-6, 0.0])
    np.testing.assert_array_equal(report.phases, [0.0, 0.0, 0.0])
    populated = population_phase_report(packet, threshold=1e-7)
    assert populated.phases[1] == pytest.approx(math.pi / 2)
    assert report.rows()[1][0] == 1


@pytest.mark.parametrize(
    "angle, wrapped",
    [
        (math.pi, math.pi),
        (-math.pi, math.pi),
        (1.5 * math.pi, -0.5 * math.pi),
        (0.25, 0.25),
        (-7.0, -7.0 + 2 * math.pi),
    ],
)
def test_wrap_phase(angle, wrapped):
    assert wrap_phase(angle) == pytest.approx(wrapped)
