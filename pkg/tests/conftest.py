import math

import pytest

from core.field import pulses_from_targets
from core.optimum import condition_amplitudes, lagrange_optimum
from core.propagator import WavePacket, propagate_exact
from core.rotor import RotorModel
from core.sweep import display_to_internal

# Three-state rotor in internal units: ω01 = 2, ω12 = 4, τ′ = π/4
MODEL = RotorModel()
M10 = math.sqrt(1 / 3)
M21 = math.sqrt(4 / 15)
LAMBDA_MAX = lagrange_optimum(M10, M21).lambda_max
OPTIMAL_POPULATIONS = (10 / 36, 0.5, 2 / 9)

NARROW = 0.02
BROAD = 0.5


def design_field(
    branch=1,
    bandwidth=NARROW,
    detuning=0.0,
    delay=0.0,
    phase1=-math.pi / 2,
    phase2=-math.pi / 2,
    scale=1.0,
    model=MODEL,
):
    """Condition field; bandwidth and detuning in 1/τ′, delay in τ′."""
    params = display_to_internal(
        model, "tau_prime", bandwidth=bandwidth, detuning=detuning, delay=delay
    )
    return pulses_from_targets(
        condition_amplitudes(branch).theta_pair(scale=scale),
        model,
        phase1=phase1,
        phase2=phase2,
        **params,
    )


@pytest.fixture(scope="session")
def model():
    return MODEL


@pytest.fixture(scope="session")
def narrowband_branch1():
    config = design_field(branch=1)
    result = propagate_exact(
        WavePacket.ground(MODEL, config.t_start), config, MODEL
    )
    return config, result


@pytest.fixture(scope="session")
def narrowband_branch2():
    config = design_field(branch=2)
    result = propagate_exact(
        WavePacket.ground(MODEL, config.t_start), config, MODEL
    )
    return config, result
