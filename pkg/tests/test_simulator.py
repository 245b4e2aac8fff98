"""Scenario runner: event order, determinism, agents, and curve sweeps."""

import json
import math

import numpy as np
import pytest

import hybridamm as ha
from hybridamm import _kernels
from hybridamm.oracle import GbmParams, PricePath
from hybridamm.simulator import METRICS_HEADER, NoiseParams, ScenarioConfig, StepMetrics


def make_config(**overrides) -> ScenarioConfig:
    base = dict(x0=1.0, y0=1.0, p0=1.0, z_values=(0.0, 0.5, 1.0), steps=4,
                path=ha.constant_path(1.0, 4), arbitrageur=True, noise=None)
    base.update(overrides)
    return ScenarioConfig(**base)


def balanced_jump_config(p0: float, p1: float, z_values) -> ScenarioConfig:
    path = ha.schedule_path([p0, p1])
    return ScenarioConfig(x0=1.0, y0=p0, p0=p0, z_values=tuple(z_values), steps=2,
                          path=path, arbitrageur=True, noise=None)


# -------------------------------------------------------------------- running


def test_constant_balanced_scenario_is_flat():
    runs = ha.run_scenario(make_config())
    for run in runs:
        for m in run.metrics:
            assert m.il_relative == 0.0
            assert (m.reserve_x, m.reserve_y) == (1.0, 1.0)
            assert m.cum_volume == 0.0
            assert m.slippage_cost == 0.0


def test_constant_unbalanced_scenario_without_arbitrage_is_flat():
    config = make_config(x0=3.0, y0=0.7, p0=2.0, path=ha.constant_path(2.0, 4),
                         arbitrageur=False)
    for run in ha.run_scenario(config):
        for m in run.metrics:
            assert m.il_relative == 0.0
            assert (m.reserve_x, m.reserve_y) == (3.0, 0.7)


def test_single_jump_constant_product_halves_x():
    runs = ha.run_scenario(balanced_jump_config(1.0, 4.0, [0.0]))
    first, last = runs[0].metrics
    assert first.il_relative == 0.0
    assert last.reserve_x == pytest.approx(0.5, rel=1e-12)
    assert last.reserve_y == pytest.approx(2.0, rel=1e-12)
    assert last.spot_price == pytest.approx(4.0, rel=1e-10)
    # closed form at rho = 1/4: il_paper = 0.25 per unit x0, hold = 1.25
    assert last.il_relative == pytest.approx(0.2, rel=1e-12)
    assert last.cum_volume == pytest.approx(0.5, rel=1e-12)
    assert last.hold_value == pytest.approx(1.25, rel=1e-12)
    assert last.pool_value == pytest.approx(1.0, rel=1e-12)


def test_final_il_decreases_in_z_when_price_falls():
    runs = ha.run_scenario(balanced_jump_config(4.0, 1.0, [0.0, 0.3, 0.6, 0.9]))
    finals = [run.metrics[-1].il_relative for run in runs]
    assert finals[0] == pytest.approx(0.2, rel=1e-12)
    assert all(a > b for a, b in zip(finals, finals[1:]))
    assert all(f > 0.0 for f in finals)


def test_arbitrage_tracks_oracle_for_partial_mixes():
    path = ha.gbm_path(GbmParams(p0=1.0, mu=0.0, sigma=0.3, steps=50, seed=11))
    config = ScenarioConfig(x0=1.0, y0=1.0, p0=1.0,
                            z_values=(0.0, 0.25, 0.5, 0.75, 0.99), steps=50,
                            path=path, arbitrageur=True, noise=None)
    for run in ha.run_scenario(config):
        for m in run.metrics:
            assert abs(m.spot_price - m.oracle_price) / m.oracle_price <= 1e-9


def test_full_mix_pool_quotes_oracle_even_without_arbitrage():
    path = ha.gbm_path(GbmParams(p0=2.0, mu=0.0, sigma=0.2, steps=30, seed=4))
    config = ScenarioConfig(x0=1.0, y0=2.0, p0=2.0, z_values=(1.0,), steps=30,
                            path=path, arbitrageur=True, noise=None)
    run = ha.run_scenario(config)[0]
    for m in run.metrics:
        assert m.spot_price == m.oracle_price
        assert (m.reserve_x, m.reserve_y) == (1.0, 2.0)   # arb skipped at z=1


def test_arbitrage_moves_stay_on_the_reanchored_curve():
    path = ha.schedule_path([1.0, 1.3, 0.8, 2.2, 1.0])
    config = ScenarioConfig(x0=1.0, y0=1.0, p0=1.0, z_values=(0.4,), steps=5,
                            path=path, arbitrageur=True, noise=None)
    run = ha.run_scenario(config)[0]
    x_prev, y_prev = 1.0, 1.0
    for m in run.metrics:
        k = ha.anchor_k(x_prev, y_prev, m.oracle_price, 0.4)
        assert m.reserve_y == pytest.approx(
            _kernels.curve_y(k, m.reserve_x, m.oracle_price, 0.4), rel=1e-12)
        x_prev, y_prev = m.reserve_x, m.reserve_y


def test_noise_trading_at_full_mix_never_loses_value():
    noise = NoiseParams(size_mu=-2.5, size_sigma=1.0, seed=21, trades_per_step=3)
    config = make_config(z_values=(1.0,), steps=4, noise=noise)
    run = ha.run_scenario(config)[0]
    assert run.metrics[-1].cum_volume > 0.0
    for m in run.metrics:
        assert abs(m.il_relative) <= 1e-12
        assert m.slippage_cost <= 1e-12


def test_identical_scenarios_share_noise_draws():
    noise = NoiseParams(size_mu=-2.0, size_sigma=0.7, seed=5)
    config = make_config(z_values=(0.5, 0.5), steps=6,
                         path=ha.constant_path(1.0, 6), noise=noise)
    first, second = ha.run_scenario(config)
    assert first == second


def test_run_scenario_is_deterministic():
    path = ha.gbm_path(GbmParams(p0=1.0, mu=0.0, sigma=0.2, steps=25, seed=13))
    noise = NoiseParams(size_mu=-2.0, size_sigma=0.9, seed=31, trades_per_step=2)
    config = ScenarioConfig(x0=2.0, y0=3.0, p0=1.0, z_values=(0.0, 0.5, 0.9),
                            steps=25, path=path, arbitrageur=True, noise=noise)
    assert ha.run_scenario(config) == ha.run_scenario(config)


def test_oversized_noise_is_clamped_and_dust_skipped():
    loud = make_config(z_values=(0.5,), noise=NoiseParams(size_mu=5.0, size_sigma=0.0, seed=1))
    run = ha.run_scenario(loud)[0]
    assert run.clamped_trades >= 4          # every attempt exceeds max_fraction
    assert run.metrics[-1].cum_volume > 0.0
    quiet = make_config(z_values=(0.5,), noise=NoiseParams(size_mu=-50.0, size_sigma=0.0, seed=1))
    run = ha.run_scenario(quiet)[0]
    assert run.skipped_trades == 4          # below the dust threshold
    assert run.metrics[-1].cum_volume == 0.0


def test_noise_trades_respect_solvency():
    # tiny Y reserve: SellX headroom is scarce, trades clamp instead of failing
    noise = NoiseParams(size_mu=0.0, size_sigma=0.0, seed=2,
                        max_fraction=0.9, trades_per_step=5)
    config = make_config(x0=1.0, y0=0.05, p0=1.0, z_values=(0.8,), steps=10,
                         path=ha.constant_path(1.0, 10), arbitrageur=False, noise=noise)
    run = ha.run_scenario(config)[0]
    for m in run.metrics:
        assert m.reserve_y > 0.0
        assert m.pool_value > 0.0


# ---------------------------------------------------------------- validation


def test_config_validation():
    with pytest.raises(ha.DomainError):
        make_config(x0=0.0)
    with pytest.raises(ha.DomainError):
        make_config(z_values=())
    with pytest.raises(ha.DomainError):
        make_config(z_values=(0.5, 1.5))
    with pytest.raises(ha.DomainError):
        make_config(steps=5)                 # path has 4 entries
    with pytest.raises(ha.DomainError):
        make_config(steps=2.0)
    with pytest.raises(ha.DomainError):
        make_config(path=PricePath(((0, 1.0), (2, 1.0)), source="replay"), steps=2)
    with pytest.raises(ha.DomainError):
        make_config(noise={"seed": 1})


def test_noise_params_validation():
    with pytest.raises(ha.DomainError):
        NoiseParams(size_mu=math.nan, size_sigma=0.1, seed=1)
    with pytest.raises(ha.DomainError):
        NoiseParams(size_mu=0.0, size_sigma=-0.1, seed=1)
    with pytest.raises(ha.DomainError):
        NoiseParams(size_mu=0.0, size_sigma=0.1, seed=1.5)
    with pytest.raises(ha.DomainError):
        NoiseParams(size_mu=0.0, size_sigma=0.1, seed=1, max_fraction=1.0)
    with pytest.raises(ha.DomainError):
        NoiseParams(size_mu=0.0, size_sigma=0.1, seed=1, trades_per_step=0)


def test_step_metrics_validation():
    good = dict(step=0, oracle_price=1.0, spot_price=1.0, reserve_x=1.0,
                reserve_y=1.0, pool_value=2.0, hold_value=2.0, il_relative=0.0,
                slippage_cost=0.0, cum_volume=0.0)
    StepMetrics(**good)
    with pytest.raises(ha.DomainError):
        StepMetrics(**{**good, "pool_value": 0.0})
    with pytest.raises(ha.DomainError):
        StepMetrics(**{**good, "il_relative": math.nan})


def test_metrics_header_order():
    assert METRICS_HEADER == ("step", "oracle_price", "spot_price", "reserve_x",
                              "reserve_y", "pool_value", "hold_value",
                              "il_relative", "slippage_cost", "cum_volume")


# -------------------------------------------------------------- config files


def scenario_dict(**overrides):
    base = {"x0": 1.0, "y0": 1.0, "p0": 1.0, "z_values": [0.0, 0.5],
            "steps": 3, "path": {"kind": "constant"}}
    base.update(overrides)
    return base


def test_from_dict_inherits_scenario_price_and_steps():
    config = ScenarioConfig.from_dict(scenario_dict(p0=2.5))
    assert config.path.prices == (2.5, 2.5, 2.5)
    config = ScenarioConfig.from_dict(
        scenario_dict(path={"kind": "gbm", "mu": 0.0, "sigma": 0.1, "seed": 7}))
    assert config.path.prices == ha.gbm_path(
        GbmParams(p0=1.0, mu=0.0, sigma=0.1, steps=3, seed=7)).prices


def test_from_dict_builds_noise():
    config = ScenarioConfig.from_dict(scenario_dict(
        noise={"size_mu": -2.0, "size_sigma": 0.5, "seed": 9, "max_fraction": 0.1}))
    assert config.noise == NoiseParams(size_mu=-2.0, size_sigma=0.5, seed=9,
                                       max_fraction=0.1)


def test_from_dict_rejects_unknown_and_missing_fields():
    with pytest.raises(ha.ConfigError):
        ScenarioConfig.from_dict(scenario_dict(turbo=True))
    with pytest.raises(ha.ConfigError):
        ScenarioConfig.from_dict(scenario_dict(noise={"size_mu": 0.0, "size_sigma": 0.1,
                                                      "seed": 1, "flavor": "salty"}))
    with pytest.raises(ha.ConfigError):
        ScenarioConfig.from_dict(scenario_dict(path={"kind": "constant", "bogus": 1}))
    missing = scenario_dict()
    del missing["x0"]
    with pytest.raises(ha.ConfigError):
        ScenarioConfig.from_dict(missing)
    with pytest.raises(ha.ConfigError):
        ScenarioConfig.from_dict(scenario_dict(steps="three"))


def test_load_scenario_round_trip(tmp_path):
    prices = tmp_path / "prices.csv"
    ha.dump_price_csv(ha.schedule_path([1.0, 2.0, 1.5]), prices)
    config_file = tmp_path / "scenario.json"
    config_file.write_text(json.dumps(scenario_dict(path={"kind": "replay",
                                                          "file": "prices.csv"})),
                           encoding="utf-8")
    config = ha.load_scenario(config_file)
    assert config.path.prices == (1.0, 2.0, 1.5)
    assert config.path.source == "replay"


def test_load_scenario_reports_json_errors(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text('{"x0": 1.0,\n  "y0": }\n', encoding="utf-8")
    with pytest.raises(ha.ConfigError) as exc_info:
        ha.load_scenario(bad)
    assert ":2:" in str(exc_info.value)
    array = tmp_path / "array.json"
    array.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ha.ConfigError):
        ha.load_scenario(array)


# ------------------------------------------------------------- curve sweeps


def test_sweep_constant_product_rows():
    rows = ha.sweep_reserve_curve(2.0, [0.0], np.linspace(0.5, 4.0, 8))
    for z, x, y in rows:
        assert z == 0.0
        assert x * y == pytest.approx(2.0, rel=1e-12)


def test_sweep_full_mix_rows_are_collinear():
    rows = ha.sweep_reserve_curve(3.0, [1.0], [0.5, 1.0, 1.4], p=2.0)
    for _, x, y in rows:
        assert y == pytest.approx(3.0 - 2.0 * x, rel=1e-12)


def test_sweep_anchored_curves_share_the_anchor_point():
    state = ha.PoolState.anchored(1.0, 1.0, 1.0, 0.0)
    rows = ha.sweep_reserve_curve(state, [0.0, 0.3, 0.6, 1.0], [0.5, 1.0, 2.0])
    at_anchor = [y for _, x, y in rows if x == 1.0]
    assert len(at_anchor) == 4
    for y in at_anchor:
        assert y == pytest.approx(1.0, rel=1e-12)


def test_sweep_marks_out_of_domain_points():
    state = ha.PoolState.anchored(1.0, 1.0, 1.0, 0.5)
    bound = ha.max_x_bound(state.k, 1.0, 0.5)
    rows = ha.sweep_reserve_curve(state, [0.5], [1.0, bound * 1.5])
    assert rows[0][2] == pytest.approx(1.0, rel=1e-12)
    assert math.isnan(rows[1][2])


def test_sweep_validation():
    state = ha.PoolState.anchored(1.0, 1.0, 1.0, 0.5)
    with pytest.raises(ha.DomainError):
        ha.sweep_reserve_curve(state, [0.5], [1.0], p=2.0)   # p only with raw k
    with pytest.raises(ha.DomainError):
        ha.sweep_reserve_curve(2.0, [], [1.0])
    with pytest.raises(ha.DomainError):
        ha.sweep_reserve_curve(2.0, [2.0], [1.0])
    with pytest.raises(ha.DomainError):
        ha.sweep_reserve_curve(2.0, [0.5], [])
    with pytest.raises(ha.DomainError):
        ha.sweep_reserve_curve(2.0, [0.5], [math.inf])
    with pytest.raises(ha.DomainError):
        ha.sweep_reserve_curve(-1.0, [0.5], [1.0])
