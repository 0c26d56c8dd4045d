import math
import pathlib

import numpy as np
import pytest

import ccpj

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCENARIOS = ROOT / "configs" / "scenarios"


def scenario(name):
    return ccpj.Config.load(str(SCENARIOS / f"{name}.scenario"))


def test_stroke_model():
    L = 65e-3
    assert ccpj.stand_advance(L, 0.0, math.radians(60)) == pytest.approx(32.5e-3)
    assert ccpj.sit_advance(L, 0.0, math.radians(60)) == pytest.approx(16.25e-3)
    beta = ccpj.invert_beta(8.5e-3, L, 4.0)
    assert ccpj.cycle_speed(L, 0.0, beta, 4.0) == pytest.approx(8.5e-3, rel=1e-12)
    with pytest.raises(ccpj.ValidationError):
        ccpj.cycle_speed(L, 0.0, math.radians(70), 4.0)


def test_robot_arithmetic():
    assert ccpj.compaction_ratio() == pytest.approx(43.3, abs=0.1)
    assert ccpj.weight_bearing_ratio(19.8) == pytest.approx(9429, abs=1)


def test_leg_mechanics():
    assert ccpj.stiffness_at(0.0) == 1.1
    assert ccpj.stiffness_at(0.4) == 59.1
    soft, stiff = ccpj.cantilever_deployment(0.0), ccpj.cantilever_deployment(0.32)
    assert not soft["deployed"] and stiff["deployed"]
    assert soft["nodes"].shape == (21, 2)
    curve = ccpj.bend_curve(0.4)
    assert curve["slope"] == pytest.approx(59.1, rel=0.05)
    assert ccpj.static_load_check(0.4, 10e-3)["stands"]


def test_simulate_is_deterministic():
    cfg = scenario("flat_ratchet_T4")
    a, b = ccpj.simulate(cfg), ccpj.simulate(cfg)
    assert np.array_equal(a["x"], b["x"])
    assert np.all(np.diff(a["t"]) > 0)
    assert a["average_speed"] == pytest.approx(8.5e-3, rel=0.15)


def test_confined_run_reports_mask():
    out = ccpj.simulate(scenario("gate20"))
    assert out["mask"] == "front_only"
    assert not out["all_legs_feasible"]
    confined = out["confined"] > 0
    assert np.all(out["height"][confined] <= 20e-3 + 1e-12)
    with pytest.raises(ccpj.InfeasibleConfinement):
        ccpj.simulate(scenario("tunnel_40x20"))


def test_config_round_trip():
    cfg = scenario("slope15")
    cfg.period = 5.0
    again = ccpj.Config.parse(cfg.to_yaml())
    assert again.period == 5.0
    assert again.slope == pytest.approx(math.radians(15))
    with pytest.raises(ccpj.ConfigError):
        ccpj.Config.parse("schema_version: 1\nsignal: {period_ms: 4}\n")


def test_search():
    cfg = scenario("flat_ratchet_T4")
    speeds = ccpj.sweep_period(cfg, [1.0, 4.0, 10.0])
    assert speeds[0] < 0.2 * speeds[1] and speeds[2] < speeds[1]
    assert ccpj.max_feasible_current(40e-3)["current"] == pytest.approx(0.38)
    tight = ccpj.max_feasible_current(20e-3)
    assert tight["current"] is None and tight["recommended_mask"] == "front_only"


def test_cli_in_process(tmp_path):
    code, out, err = ccpj.run_cli(["simulate", "--config", str(SCENARIOS / "payload5g.scenario"),
                                   "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "report.yaml").exists()
    code, _, err = ccpj.run_cli(["simulate", "--config", str(tmp_path / "missing.scenario")])
    assert code == 2 and err.startswith("error[config]")
