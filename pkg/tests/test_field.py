import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from conftest import BROAD, M10, M21, MODEL, NARROW, design_field
from core.errors import DomainError
from core.field import (
    FieldConfig,
    PulseSpec,
    ThetaPair,
    field_time,
    pulses_from_targets,
    spectral_field,
    spectral_overlap,
    spectral_thetas,
    theta_integrals,
)
from core.optimum import condition_amplitudes

PULSE = PulseSpec(
    amplitude=1.3, center_freq=2.0, bandwidth=0.4, phase=0.7, center_time=1.1
)


def test_pulse_peak_and_envelope():
    assert PULSE.duration == pytest.approx(2.5)
    assert PULSE.peak == pytest.approx(math.sqrt(2 / math.pi) * 1.3 * 0.4)
    assert PULSE.envelope(1.1) == pytest.approx(PULSE.peak)
    assert PULSE.field(1.1) == pytest.approx(PULSE.peak * math.cos(0.7))


@pytest.mark.parametrize("omega", [1.6, 2.0, 2.3])
def test_spectrum_matches_fourier_integral(omega):
    # E(ω) = ∫𝓔(t)e^{-iωt}dt, positive-frequency lobe only
    lo, hi = PULSE.center_time - 40, PULSE.center_time + 40
    re = quad(
        lambda t: PULSE.field(t) * math.cos(omega * t), lo, hi, limit=400
    )[0]
    im = quad(
        lambda t: PULSE.field(t) * math.sin(omega * t), lo, hi, limit=400
    )[0]
    numeric = complex(re, -im)
    # the omitted negative-frequency lobe is exp(-(2ω/Δω)²/2) small
    assert numeric == pytest.approx(complex(PULSE.spectrum(omega)), abs=1e-8)


@pytest.mark.parametrize("kwargs", [{"amplitude": -1}, {"bandwidth": 0}])
def test_invalid_pulse(kwargs):
    params = {"amplitude": 1.0, "center_freq": 2.0, "bandwidth": 0.1}
    params.update(kwargs)
    with pytest.raises(DomainError):
        PulseSpec(**params)


def test_field_window_and_edges():
    config = FieldConfig.from_pulses([PULSE], n_sigma=6)
    assert config.t_start == pytest.approx(1.1 - 15)
    assert config.t_end == pytest.approx(1.1 + 15)
    assert config.edge_ratio() == pytest.approx(math.exp(-18))
    assert field_time(config, config.t_start - 1) == 0.0
    assert field_time(config, config.t_end + 1) == 0.0
    assert field_time(config, 1.1) == pytest.approx(PULSE.field(1.1))


def test_empty_window_rejected():
    with pytest.raises(DomainError):
        FieldConfig((PULSE,), 1.0, 1.0)
    with pytest.raises(DomainError):
        FieldConfig((), 0.0, 1.0)


def test_field_config_dict_roundtrip():
    config = design_field(branch=2, bandwidth=BROAD, delay=0.5)
    assert FieldConfig.from_dict(config.to_dict()) == config


def test_designed_field_is_nearly_zero_area():
    config = design_field(bandwidth=BROAD)
    times = np.linspace(config.t_start, config.t_end, 200001)
    area = trapezoid(field_time(config, times), times)
    assert abs(area) < 1e-6 * config.peak * (config.t_end - config.t_start)


def test_cosine_carriers_leave_a_gaussian_small_area():
    config = design_field(bandwidth=BROAD, phase1=0.0, phase2=0.0)
    times = np.linspace(config.t_start, config.t_end, 200001)
    area = trapezoid(field_time(config, times), times)
    expected = sum(
        2 * p.amplitude * math.exp(-0.5 * (p.center_freq * p.duration) ** 2)
        for p in config.pulses
    )
    assert area == pytest.approx(expected, rel=1e-5)
    first = config.pulses[0]
    bound = math.exp(-0.5 * (MODEL.omega01 * first.duration) ** 2)
    assert abs(area) <= 10 * bound * first.peak * first.duration


def test_quadrature_agrees_with_spectral_identity():
    config = design_field(branch=1, bandwidth=0.1, delay=0.3, detuning=0.05)
    quadrature = theta_integrals(config, MODEL).as_array()
    spectral = spectral_thetas(config, MODEL).as_array()
    scale = np.max(np.abs(spectral))
    assert np.max(np.abs(quadrature - spectral)) < 1e-5 * scale


def test_designed_thetas_hit_targets():
    condition = condition_amplitudes(1)
    config = design_field(branch=1)
    thetas = spectral_thetas(config, MODEL)
    assert abs(thetas.theta1) == pytest.approx(condition.theta1_mag, rel=1e-9)
    assert abs(thetas.theta2) == pytest.approx(condition.theta2_mag, rel=1e-9)
    # arg θ₁ = −φ₁ and arg θ₂ = ω12·τ₀ − φ₂ with φ = −π/2, τ₀ = 0
    assert cmath.phase(thetas.theta1) == pytest.approx(math.pi / 2)
    assert cmath.phase(thetas.theta2) == pytest.approx(math.pi / 2)
    assert not config.overlap_warning


@pytest.mark.parametrize("branch", [1, 2])
def test_quadrature_thetas_hit_targets(branch):
    condition = condition_amplitudes(branch)
    delay = 0.3
    config = design_field(branch=branch, bandwidth=0.1, delay=delay)
    thetas = theta_integrals(config, MODEL)
    assert abs(thetas.theta1) == pytest.approx(condition.theta1_mag, rel=1e-5)
    assert abs(thetas.theta2) == pytest.approx(condition.theta2_mag, rel=1e-5)
    arg2 = MODEL.omega12 * delay * MODEL.tau_prime + math.pi / 2
    assert cmath.phase(thetas.theta1) == pytest.approx(math.pi / 2, abs=1e-5)
    assert cmath.exp(1j * cmath.phase(thetas.theta2)) == pytest.approx(
        cmath.exp(1j * arg2), abs=1e-5
    )


def test_delay_rotates_second_theta():
    delay = 0.3
    config = design_field(branch=1, delay=delay, phase1=0, phase2=0)
    thetas = spectral_thetas(config, MODEL)
    expected = MODEL.omega12 * delay * MODEL.tau_prime
    assert cmath.phase(thetas.theta2 * cmath.exp(-1j * expected)) == (
        pytest.approx(0.0, abs=1e-9)
    )
    assert cmath.phase(thetas.theta1) == pytest.approx(0.0, abs=1e-12)


def test_amplitudes_from_targets():
    targets = ThetaPair(0.5j, -0.25)
    config = pulses_from_targets(
        targets, MODEL, detuning=0.0, bandwidth=0.05, delay=1.0
    )
    first, second = config.pulses
    assert first.amplitude == pytest.approx(0.5 / M10)
    assert second.amplitude == pytest.approx(0.25 / M21)
    assert first.center_freq == pytest.approx(MODEL.omega01)
    assert second.center_freq == pytest.approx(2 * MODEL.omega01)
    assert second.center_time == 1.0


def test_detuning_moves_both_carriers():
    config = design_field(detuning=0.1)
    shift = 0.1 / MODEL.tau_prime
    first, second = config.pulses
    assert first.center_freq == pytest.approx(MODEL.omega01 + shift)
    assert second.center_freq == pytest.approx(2 * (MODEL.omega01 + shift))


def test_broadband_spectra_overlap():
    broad = design_field(bandwidth=BROAD)
    narrow = design_field(bandwidth=NARROW)
    assert broad.overlap_warning
    assert spectral_overlap(broad.pulses, MODEL) > 1e-3
    assert not narrow.overlap_warning
    assert spectral_overlap(narrow.pulses, MODEL) == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"bandwidth": 0.0, "detuning": 0.0},
        {"bandwidth": 0.1, "detuning": 2.0},
        {"bandwidth": 0.1, "detuning": -2.5},
    ],
)
def test_invalid_design(kwargs):
    with pytest.raises(DomainError):
        pulses_from_targets(ThetaPair(1, 1), MODEL, **kwargs)


def test_running_thetas():
    config = design_field(bandwidth=BROAD)
    assert theta_integrals(config, MODEL, t=config.t_start) == ThetaPair(
        0j, 0j
    )
    with pytest.raises(DomainError):
        theta_integrals(config, MODEL, t=config.t_start - 1)
    # past the window the integrals stay at their final value
    late = theta_integrals(config, MODEL, t=config.t_end + 5)
    final = theta_integrals(config, MODEL)
    assert late == final


def test_spectral_field_is_sum_of_lobes():
    config = design_field(bandwidth=BROAD)
    omega = 3.1
    expected = sum(p.spectrum(omega) for p in config.pulses)
    assert spectral_field(config, omega) == pytest.approx(complex(expected))


def test_theta_pair_properties():
    pair = ThetaPair(3j, 4)
    assert pair.theta12 == pytest.approx(5)
    assert pair.ratio == pytest.approx(4 / 3)
    assert ThetaPair(0, 1).ratio is None
    assert pair.scaled(2).theta2 == 8
