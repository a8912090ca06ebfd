import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxtune.errors import ConfigurationError, IdentifiabilityError
from maxtune.plant import ArxPlant
from maxtune.sysid import (
    ArxModel,
    ArxProbe,
    closed_loop_pole,
    fit_arx,
    run_step_experiment,
    stable_gain_interval,
)

PAPER_MODEL = ArxModel(a=0.1, b=-0.36, y0=0.0, u0=0.0, residual_rms=0.0)


def excited_data(a, b, n, seed=0, noise_sigma=0.0):
    rng = random.Random(seed)
    plant = ArxPlant(a=a, b=b)
    data = []
    for _ in range(n):
        u = rng.uniform(-10.0, 10.0)
        y = plant.output + (rng.gauss(0.0, noise_sigma) if noise_sigma else 0.0)
        data.append((u, y))
        plant.step(u)
    return data


# -- step experiments ----------------------------------------------------

def test_sweep_input_sequence():
    data = run_step_experiment(ArxProbe(ArxPlant(0.1, -0.36)), 200, 10, 20)
    assert [u for u, _ in data] == list(range(200, 400, 10))


def test_zero_step_is_a_steady_state_probe():
    data = run_step_experiment(ArxProbe(ArxPlant(0.1, -0.36)), 300, 0, 6)
    assert all(u == 300 for u, _ in data)
    # constant input converges to b*u/(1-a)
    assert data[-1][1] == pytest.approx(-0.36 * 300 / 0.9, rel=1e-3)


def test_linear_plant_data_satisfies_model_exactly():
    data = run_step_experiment(ArxProbe(ArxPlant(0.1, -0.36)), 200, 10, 10)
    for (u, y), (_, y_next) in zip(data, data[1:]):
        assert y_next == pytest.approx(0.1 * y + (-0.36) * u, abs=1e-9)


def test_sweep_plus_fit_recovers_coefficients():
    data = run_step_experiment(ArxProbe(ArxPlant(0.1, -0.36)), 200, 10, 20)
    model = fit_arx(data, y0=0.0, u0=0.0)
    assert model.a == pytest.approx(0.1, abs=1e-9)
    assert model.b == pytest.approx(-0.36, abs=1e-9)


def test_too_few_intervals_rejected():
    with pytest.raises(ConfigurationError):
        run_step_experiment(ArxProbe(ArxPlant(0.1, -0.36)), 200, 10, 2)


# -- least squares fit ---------------------------------------------------

def test_exact_recovery_on_noiseless_data():
    data = excited_data(0.1, -0.36, 50)
    model = fit_arx(data, y0=0.0, u0=0.0)
    assert model.a == pytest.approx(0.1, abs=1e-9)
    assert model.b == pytest.approx(-0.36, abs=1e-9)
    assert model.residual_rms == pytest.approx(0.0, abs=1e-9)


def test_default_centering_uses_sample_means():
    data = [(u + 300.0, y + 20.0) for u, y in excited_data(0.1, -0.36, 60)]
    model = fit_arx(data)
    us = [u for u, _ in data]
    ys = [y for _, y in data]
    assert model.u0 == pytest.approx(sum(us) / len(us))
    assert model.y0 == pytest.approx(sum(ys) / len(ys))


def test_noisy_recovery_within_tolerance():
    hits = 0
    for trial in range(100):
        data = excited_data(0.1, -0.36, 50, seed=trial, noise_sigma=0.1)
        model = fit_arx(data, y0=0.0, u0=0.0)
        if abs(model.a - 0.1) <= 0.05 and abs(model.b + 0.36) <= 0.05:
            hits += 1
    assert hits >= 95


def test_rank_deficiency_is_an_identifiability_error():
    with pytest.raises(IdentifiabilityError):
        fit_arx([(5.0, 1.0)] * 10)


def test_too_few_points_rejected():
    with pytest.raises(ConfigurationError):
        fit_arx([(1.0, 2.0), (3.0, 4.0)])


def test_residuals_orthogonal_to_regressors():
    data = excited_data(0.3, -0.8, 80, seed=3, noise_sigma=0.5)
    model = fit_arx(data, y0=0.0, u0=0.0)
    ys = [y for _, y in data]
    us = [u for u, _ in data]
    res = [ys[k + 1] - model.a * ys[k] - model.b * us[k]
           for k in range(len(data) - 1)]
    n = len(res)
    scale_y = math.sqrt(sum(y * y for y in ys[:-1]) / n)
    scale_u = math.sqrt(sum(u * u for u in us[:-1]) / n)
    dot_y = sum(r * y for r, y in zip(res, ys[:-1])) / (n * scale_y)
    dot_u = sum(r * u for r, u in zip(res, us[:-1])) / (n * scale_u)
    assert abs(dot_y) < 1e-9
    assert abs(dot_u) < 1e-9


# -- pole and stability --------------------------------------------------

def test_pole_at_paper_gain():
    assert closed_loop_pole(PAPER_MODEL, -1.5) == pytest.approx(-0.44, abs=1e-12)


def test_pole_open_loop_at_zero_gain():
    assert closed_loop_pole(PAPER_MODEL, 0.0) == pytest.approx(0.1)


def test_pole_marginal_at_upper_boundary():
    assert closed_loop_pole(PAPER_MODEL, 2.5) == pytest.approx(1.0, abs=1e-12)


def test_stable_interval_for_fitted_model():
    report = stable_gain_interval(PAPER_MODEL)
    assert report.kp_min == pytest.approx(-3.0556, abs=5e-5)
    assert report.kp_max == pytest.approx(2.5, abs=1e-12)


def test_stable_interval_unit_gain_symmetric():
    model = ArxModel(a=0.0, b=-1.0, y0=0.0, u0=0.0, residual_rms=0.0)
    report = stable_gain_interval(model)
    assert (report.kp_min, report.kp_max) == (-1.0, 1.0)


def test_stable_interval_hand_solved_case():
    model = ArxModel(a=0.5, b=1.0, y0=0.0, u0=0.0, residual_rms=0.0)
    report = stable_gain_interval(model)
    assert report.kp_min == pytest.approx(-0.5)
    assert report.kp_max == pytest.approx(1.5)


def test_no_actuation_when_b_is_zero():
    model = ArxModel(a=0.5, b=0.0, y0=0.0, u0=0.0, residual_rms=0.0)
    with pytest.raises(ConfigurationError):
        stable_gain_interval(model)


def test_interval_endpoints_sit_on_unit_circle():
    report = stable_gain_interval(PAPER_MODEL)
    assert abs(closed_loop_pole(PAPER_MODEL, report.kp_min)) == pytest.approx(1.0, abs=1e-12)
    assert abs(closed_loop_pole(PAPER_MODEL, report.kp_max)) == pytest.approx(1.0, abs=1e-12)


@settings(deadline=None)
@given(st.floats(min_value=-10, max_value=10, allow_nan=False),
       st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_pole_is_affine_in_gain(k1, k2):
    mid = closed_loop_pole(PAPER_MODEL, (k1 + k2) / 2)
    avg = (closed_loop_pole(PAPER_MODEL, k1) + closed_loop_pole(PAPER_MODEL, k2)) / 2
    assert mid == pytest.approx(avg, abs=1e-9)


def closed_loop_errors(kp, n, e0=1.0):
    """Error sequence of the proportional loop on the linear plant (r=0)."""
    plant = ArxPlant(a=0.1, b=-0.36, y_dev=-e0)
    errors = [e0]
    for _ in range(n):
        e = -plant.y_dev
        plant.step(kp * e)
        errors.append(-plant.y_dev)
    return errors


@pytest.mark.parametrize("kp", [-2.9, -1.5, 0.5, 2.3])
def test_gains_inside_interval_contract_geometrically(kp):
    pole = closed_loop_pole(PAPER_MODEL, kp)
    errors = closed_loop_errors(kp, 50)
    for e, e_next in zip(errors, errors[1:]):
        assert e_next == pytest.approx(pole * e, abs=1e-12)
    assert abs(errors[-1]) < abs(errors[0]) * (abs(pole) ** 49) * (1 + 1e-9)


@pytest.mark.parametrize("kp", [-3.5, 2.8, 5.0])
def test_gains_outside_interval_diverge(kp):
    errors = closed_loop_errors(kp, 50)
    mags = [abs(e) for e in errors]
    assert all(b > a for a, b in zip(mags, mags[1:]))
