"""Tests for the wind, solar, and price forecasting models."""

from __future__ import annotations

from datetime import datetime

import numpy as np
import pytest

from dhbid.errors import DataError
from dhbid.forecast import (
    PowerCurveModel,
    PriceModel,
    SolarCollectorModel,
    evaluate_power_curve,
    evaluate_solar_collector,
    export_model,
    fit_power_curve,
    fit_price_model,
    fourier_regressors,
    hours_since_epoch,
    import_model,
    predict_price,
    predict_solar_heat,
    predict_wind_power,
)
from dhbid.portfolio import TimeSeries

START = datetime(2025, 3, 1)


def _logistic(v):
    return 3.6 / (1 + np.exp(-(v - 7.0)))


# ---------------------------------------------------------------------------
# wind power curve
# ---------------------------------------------------------------------------


def test_power_curve_identity_data():
    rng = np.random.default_rng(0)
    speeds = np.sort(rng.uniform(0.1, 12.0, 400))
    model = fit_power_curve(speeds, speeds, n_bins=7)
    err = np.max(np.abs(evaluate_power_curve(model, speeds) - speeds))
    assert err < 1e-9


def test_power_curve_constant_power():
    rng = np.random.default_rng(1)
    speeds = rng.uniform(0.0, 10.0, 200)
    model = fit_power_curve(speeds, np.full(200, 5.0), n_bins=10)
    pred = evaluate_power_curve(model, [0.5, 3.0, 9.9])
    assert pred == pytest.approx([5.0, 5.0, 5.0], abs=1e-9)


def test_power_curve_beats_single_global_line():
    rng = np.random.default_rng(2)
    speeds = rng.uniform(0.0, 14.0, 1000)
    powers = np.clip(_logistic(speeds) + 0.15 * rng.standard_normal(1000), 0.0, None)
    truth = _logistic(speeds)
    binned = fit_power_curve(speeds, powers, n_bins=10)
    # a single bin is exactly the global least-squares line
    global_line = fit_power_curve(speeds, powers, n_bins=1)
    rmse_binned = np.sqrt(np.mean((evaluate_power_curve(binned, speeds) - truth) ** 2))
    rmse_line = np.sqrt(np.mean((evaluate_power_curve(global_line, speeds) - truth) ** 2))
    assert rmse_binned < rmse_line


def test_power_curve_monotone_and_clamped_beyond_training_range():
    rng = np.random.default_rng(3)
    speeds = rng.uniform(0.0, 14.0, 800)
    powers = np.clip(_logistic(speeds) + 0.2 * rng.standard_normal(800), 0.0, None)
    model = fit_power_curve(speeds, powers, n_bins=10)
    grid = np.linspace(0.0, 25.0, 700)  # extends well past the largest speed
    vals = evaluate_power_curve(model, grid)
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals.min() >= 0.0
    assert vals.max() <= model.rated + 1e-12


def test_power_curve_zero_speed_matches_first_bin_line():
    speeds = np.linspace(0.0, 14.0, 600)
    powers = _logistic(speeds)
    powers[0] = 0.0
    model = fit_power_curve(speeds, powers, n_bins=8)
    # oracle: ordinary least squares over the first equal-count bin,
    # evaluated at zero and clamped
    s = speeds / speeds.max()
    edges = np.quantile(s, np.linspace(0.0, 1.0, 9))
    edges[0], edges[-1] = 0.0, 1.0
    mask = (s >= edges[0]) & (s < edges[1])
    slope, intercept = np.polyfit(s[mask], powers[mask], 1)
    oracle = min(max(intercept, 0.0), powers.max())
    assert evaluate_power_curve(model, [0.0])[0] == pytest.approx(oracle, abs=1e-9)


def test_power_curve_input_validation():
    rng = np.random.default_rng(4)
    speeds = rng.uniform(0.0, 10.0, 50)
    with pytest.raises(DataError):
        fit_power_curve(np.full(50, 3.0), speeds, n_bins=5)  # constant speeds
    with pytest.raises(DataError):
        fit_power_curve(speeds - 20.0, speeds, n_bins=5)  # negative speeds
    with pytest.raises(DataError):
        fit_power_curve(speeds[:6], speeds[:6], n_bins=5)  # too few per bin
    model = fit_power_curve(speeds, speeds, n_bins=5)
    with pytest.raises(DataError):
        evaluate_power_curve(model, [-1.0])


def test_predict_wind_power_series_roundtrip():
    rng = np.random.default_rng(5)
    speeds = rng.uniform(0.0, 14.0, 500)
    powers = np.clip(_logistic(speeds) + 0.1 * rng.standard_normal(500), 0.0, None)
    model = fit_power_curve(speeds, powers, n_bins=10)
    forecast = TimeSeries("WindSpeed", START, np.array([0.0, 5.0, 7.0, 30.0]))
    out = predict_wind_power(model, forecast)
    assert out.label == "WindPower"
    assert out.start == forecast.start
    assert len(out.values) == 4
    assert np.all(out.values >= 0.0) and np.all(out.values <= model.rated + 1e-12)
    # far above all training speeds: flat extension keeps it at the top end
    assert out.values[3] == pytest.approx(
        evaluate_power_curve(model, [speeds.max()])[0], abs=1e-9
    )


# ---------------------------------------------------------------------------
# solar collector
# ---------------------------------------------------------------------------


def test_solar_collector_zero_cases():
    model = SolarCollectorModel(collector_area=10.0, gamma=0.7, eta1=0.02, eta2=0.001)
    # radiation 0 and ambient equal to the fluid temperature: every term is 0
    q = evaluate_solar_collector(model, [0.0], [model.t_avg])
    assert q[0] == 0.0


def test_solar_collector_direct_substitution():
    model = SolarCollectorModel(
        collector_area=1.0, gamma=0.8, eta1=0.0, eta2=0.0, t_avg=45.0
    )
    q = evaluate_solar_collector(model, [0.5], [20.0])
    assert q[0] == pytest.approx(0.4, abs=1e-12)


def test_solar_collector_clamps_negative_output():
    # hand evaluation: 2 * (0.5*0.8 - 0.01*30 - 0.001*900) = 2 * (-0.8) < 0
    model = SolarCollectorModel(
        collector_area=2.0, gamma=0.8, eta1=0.01, eta2=0.001, t_avg=45.0
    )
    q = evaluate_solar_collector(model, [0.5], [15.0])
    assert q[0] == 0.0


def test_solar_collector_monotone_in_radiation():
    model = SolarCollectorModel(collector_area=3.0, gamma=0.75, eta1=0.015, eta2=0.002)
    radiation = np.linspace(0.0, 1.2, 50)
    q = evaluate_solar_collector(model, radiation, np.full(50, 10.0))
    assert np.all(np.diff(q) >= 0.0)


def test_predict_solar_heat_series():
    model = SolarCollectorModel(collector_area=5.0, gamma=0.8, eta1=0.01, eta2=0.0005)
    rad = TimeSeries("SolarRadiation", START, np.array([0.0, 0.3, 0.9]))
    amb = TimeSeries("AmbientTemp", START, np.array([5.0, 12.0, 18.0]))
    out = predict_solar_heat(model, rad, amb)
    assert out.label == "SolarHeat"
    assert np.all(out.values >= 0.0)
    with pytest.raises(DataError):
        predict_solar_heat(
            model, rad, TimeSeries("AmbientTemp", START, np.array([5.0, 12.0]))
        )


def test_solar_collector_rejects_nonpositive_area():
    with pytest.raises(DataError):
        SolarCollectorModel(collector_area=0.0, gamma=0.8, eta1=0.0, eta2=0.0)


# ---------------------------------------------------------------------------
# Fourier regressors
# ---------------------------------------------------------------------------


def test_fourier_regressors_k0_is_empty():
    out = fourier_regressors(0, 168.0, np.arange(10))
    assert out.shape == (10, 0)


def test_fourier_regressors_quarter_period():
    out = fourier_regressors(1, 168.0, [42.0])
    assert out[0, 0] == pytest.approx(1.0, abs=1e-12)  # sin at T/4
    assert out[0, 1] == pytest.approx(0.0, abs=1e-12)  # cos at T/4


def test_fourier_regressors_column_norms():
    t = np.arange(1, 169)
    out = fourier_regressors(3, 168.0, t)
    norms = np.linalg.norm(out, axis=0)
    assert norms == pytest.approx(np.full(6, np.sqrt(168.0 / 2.0)), abs=1e-9)


# ---------------------------------------------------------------------------
# price model
# ---------------------------------------------------------------------------


def test_price_model_white_noise_keeps_no_arma_terms():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        history = TimeSeries("DayAheadPrice", START, 300 + 25 * rng.standard_normal(2000))
        model = fit_price_model(history, k_max=3)
        assert max(abs(v) for v in model.phi + model.theta) < 0.1


def test_price_model_pure_sinusoid_fits_exactly():
    t = np.arange(2000)
    amplitude = 40.0
    history = TimeSeries(
        "DayAheadPrice", START, 200 + amplitude * np.sin(2 * np.pi * t / 168.0)
    )
    model = fit_price_model(history, k_max=2)
    assert model.residual_sigma < 0.01 * amplitude


def test_price_model_noisy_sinusoid_uses_fourier_terms():
    rng = np.random.default_rng(12)
    t = np.arange(2000)
    amplitude = 40.0
    values = 200 + amplitude * np.sin(2 * np.pi * t / 168.0) + 0.2 * rng.standard_normal(2000)
    model = fit_price_model(TimeSeries("DayAheadPrice", START, values), k_max=2)
    assert model.fourier_k >= 1
    seasonal_energy = np.hypot(model.alpha[0], model.beta[0])
    assert seasonal_energy == pytest.approx(amplitude, rel=0.05)
    assert model.residual_sigma < 0.01 * amplitude


def test_price_model_recovers_ar1_coefficient():
    for seed in (101, 102, 103):
        rng = np.random.default_rng(seed)
        n = 5000
        y = np.zeros(n)
        for i in range(1, n):
            y[i] = 0.9 * y[i - 1] + rng.standard_normal()
        history = TimeSeries("DayAheadPrice", START, 300 + 10 * y)
        model = fit_price_model(history, k_max=2)
        assert 0.85 <= model.phi[0] <= 0.95


def test_price_model_seasonal_ar_mixture():
    rng = np.random.default_rng(11)
    n = 1080
    t = np.arange(n)
    seasonal = 35 * np.sin(2 * np.pi * t / 168.0) + 20 * np.cos(2 * np.pi * t / 24.0)
    y = np.zeros(n)
    for i in range(1, n):
        y[i] = 0.85 * y[i - 1] + 10 * rng.standard_normal()
    history = TimeSeries("DayAheadPrice", START, 310 + seasonal + y)
    model = fit_price_model(history, k_max=8)
    # the daily cycle is harmonic 7 of the weekly period
    assert model.fourier_k == 7
    assert 0.75 <= model.phi[0] <= 0.95
    assert 8.0 <= model.residual_sigma <= 12.5


def test_price_model_constant_history():
    history = TimeSeries("DayAheadPrice", START, np.full(400, 250.0))
    model = fit_price_model(history, k_max=3)
    assert model.mu == pytest.approx(250.0)
    assert model.phi == (0.0, 0.0, 0.0) and model.theta == (0.0, 0.0, 0.0)
    assert model.residual_sigma == 0.0


def test_price_model_drops_aliased_harmonics(caplog):
    rng = np.random.default_rng(1)
    history = TimeSeries("DayAheadPrice", START, 300 + 10 * rng.standard_normal(400))
    with caplog.at_level("WARNING", logger="dhbid.forecast"):
        model = fit_price_model(history, k_max=3, period=4.0)
    # harmonic 2 of a 4-hour period aliases to zero at hourly sampling
    assert model.fourier_k <= 1
    assert any("collinear" in r.message for r in caplog.records)


def test_price_model_short_history_rejected():
    with pytest.raises(DataError):
        fit_price_model(TimeSeries("DayAheadPrice", START, np.zeros(300)), k_max=1)


def test_predict_price_flat_intercept_only():
    model = PriceModel(
        mu=300.0, phi=(0.0, 0.0, 0.0), theta=(0.0, 0.0, 0.0),
        fourier_k=0, alpha=(), beta=(), residual_sigma=1.0,
    )
    obs = TimeSeries("DayAheadPrice", START, np.linspace(100, 200, 30))
    out = predict_price(model, obs, 5)
    assert out.values == pytest.approx(np.full(5, 300.0))
    assert out.start == obs.end


def test_predict_price_persistence():
    model = PriceModel(
        mu=0.0, phi=(1.0, 0.0, 0.0), theta=(0.0, 0.0, 0.0),
        fourier_k=0, alpha=(), beta=(), residual_sigma=1.0,
    )
    obs = TimeSeries("DayAheadPrice", START, np.concatenate([np.zeros(29), [50.0]]))
    out = predict_price(model, obs, 6)
    assert out.values == pytest.approx(np.full(6, 50.0))


def test_predict_price_matches_hand_unrolled_recursion():
    model = PriceModel(
        mu=5.0, phi=(0.6, -0.2, 0.1), theta=(0.3, 0.1, -0.05),
        fourier_k=1, alpha=(2.0,), beta=(-1.0,), residual_sigma=1.0,
    )
    start = datetime(2025, 5, 1)
    obs_vals = 300 + 5 * np.sin(np.arange(30))
    got = predict_price(model, TimeSeries("DayAheadPrice", start, obs_vals), 3).values

    # oracle: unroll the recursion by hand, zero shocks where unobserved
    t0 = hours_since_epoch(start)

    def seasonal(t):
        w = 2 * np.pi * (t0 + t) / 168.0
        return 2.0 * np.sin(w) - 1.0 * np.cos(w)

    lam = list(obs_vals)
    eps = [0.0] * 30
    for t in range(24, 33):
        pred = (
            5.0 + seasonal(t)
            + 0.6 * lam[t - 1] - 0.2 * lam[t - 2] + 0.1 * lam[t - 24]
            + 0.3 * eps[t - 1] + 0.1 * eps[t - 2] - 0.05 * eps[t - 24]
        )
        if t < 30:
            eps[t] = lam[t] - pred
        else:
            lam.append(pred)
            eps.append(0.0)
    assert got == pytest.approx(lam[30:], abs=1e-9)


def test_predict_price_requires_full_lag_window():
    model = PriceModel(
        mu=0.0, phi=(0.5, 0.0, 0.2), theta=(0.0, 0.0, 0.0),
        fourier_k=0, alpha=(), beta=(), residual_sigma=1.0,
    )
    short = TimeSeries("DayAheadPrice", START, np.ones(10))
    with pytest.raises(DataError):
        predict_price(model, short, 4)


def test_fit_and_predict_reduce_error_vs_persistence():
    rng = np.random.default_rng(11)
    n = 1440
    t = np.arange(n)
    seasonal = 35 * np.sin(2 * np.pi * t / 168.0) + 20 * np.cos(2 * np.pi * t / 24.0)
    y = np.zeros(n)
    for i in range(1, n):
        y[i] = 0.85 * y[i - 1] + 10 * rng.standard_normal()
    full = 310 + seasonal + y
    fit_hours = 1080
    history = TimeSeries("DayAheadPrice", START, full[:fit_hours])
    model = fit_price_model(history, k_max=8)
    forecast = predict_price(model, history, 72).values
    truth = full[fit_hours : fit_hours + 72]
    rmse = np.sqrt(np.mean((forecast - truth) ** 2))
    rmse_persistence = np.sqrt(np.mean((full[fit_hours - 1] - truth) ** 2))
    assert rmse < 0.5 * rmse_persistence


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_export_import_roundtrip_all_models():
    rng = np.random.default_rng(6)
    speeds = rng.uniform(0.0, 14.0, 300)
    powers = np.clip(_logistic(speeds), 0.0, None)
    curve = fit_power_curve(speeds, powers, n_bins=6)
    solar = SolarCollectorModel(collector_area=7.5, gamma=0.8, eta1=0.01, eta2=0.001)
    price = PriceModel(
        mu=12.0, phi=(0.4, 0.1, 0.05), theta=(0.2, 0.0, -0.1),
        fourier_k=2, alpha=(1.0, 0.5), beta=(-0.25, 2.0), residual_sigma=9.5,
    )
    for model in (curve, solar, price):
        again = import_model(export_model(model))
        assert again == model
    # a round-tripped curve predicts identically
    again = import_model(export_model(curve))
    probe = rng.uniform(0.0, 15.0, 40)
    assert evaluate_power_curve(again, probe) == pytest.approx(
        evaluate_power_curve(curve, probe), abs=0
    )


def test_import_model_rejects_malformed_text():
    with pytest.raises(DataError):
        import_model("not json")
    with pytest.raises(DataError):
        import_model('{"no_tag": 1}')
    with pytest.raises(DataError):
        import_model('{"model": "mystery"}')
