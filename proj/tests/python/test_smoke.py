"""Smoke tests for the Python bindings."""

import json
import math

import pytest

import clogsim


@pytest.fixture(scope="module")
def table():
    return clogsim.build_table(0.05, 0.05, n_theta=32, n_rho=12)


def test_table_build_and_interpolation(table):
    assert len(table.radii) == 10  # 0.05 .. 0.45 plus the clog anchor
    assert table.radii[-1] == 0.5
    tau = table.interpolate(0.25)
    f = math.pi / 16.0
    maxwell = (1.0 - f) / (1.0 + f)
    assert abs(tau.t11 - maxwell) / maxwell < 0.03
    assert abs(tau.t12) < 1e-3
    assert table.interpolate(0.5).t11 == 0.0


def test_table_round_trip(table, tmp_path):
    path = str(tmp_path / "tau.table")
    clogsim.save_table(table, path)
    loaded = clogsim.load_table(path)
    assert loaded.radii == table.radii
    assert loaded.interpolate(0.3).t11 == table.interpolate(0.3).t11


def test_porosity_and_diffusivity():
    phi = clogsim.porosity(0.25)
    assert abs(phi - (1.0 - math.pi / 16.0)) < 1e-12
    tau = clogsim.TortuosityTensor()
    d = clogsim.effective_diffusivity(tau, 0.25, 0.5)
    assert abs(d[0][0] - 0.5 * phi) < 1e-12
    assert d[0][1] == 0.0


def test_presets_are_valid_json():
    for text in (clogsim.preset_uniform(), clogsim.preset_bumps()):
        cfg = json.loads(text)
        assert cfg["params"]["N"] == 3
        clogsim.validate_config(text)
    with pytest.raises(ValueError):
        clogsim.validate_config("{ not json")


def test_smoluchowski_moment_conservation():
    gamma = [[10.0] * 3 for _ in range(3)]
    rates = clogsim.smoluchowski_rates([1.0, 0.5, 0.25], gamma)
    moment = sum((i + 1) * r for i, r in enumerate(rates))
    assert abs(moment) < 1e-12


def test_short_run_writes_snapshots(table, tmp_path):
    cfg = json.loads(clogsim.preset_uniform())
    cfg["grid_points"] = 11
    cfg["T"] = 0.01
    cfg["snapshot_times"] = [0.01]
    text = json.dumps(cfg)

    guard = clogsim.stability_guard(text, table)
    assert guard > 0.0

    out = tmp_path / "run"
    summary = clogsim.run_scenario(text, table, str(out))
    assert summary.steps == 5
    assert summary.monitor_violations == 0

    values, n, t, name = clogsim.read_field_csv(str(out / "u1_t0.01.csv"))
    assert n == 11 and name == "u1"
    assert abs(t - 0.01) < 1e-12
    assert len(values) == n * n


def test_analysis_box_and_horizon():
    box = clogsim.make_analysis_box(clogsim.preset_uniform())
    assert box.a_sum == pytest.approx(1.7)
    assert box.b == pytest.approx(3.0)
    box.M = 1.0
    box.eps1 = 0.1
    box.eps2 = 1.0 / 16.0
    box.sup_r0 = 0.25
    box.inf_r0 = 0.125
    box.sup_v0 = 0.0
    box.a_sum = 1.0
    box.b = 1.0
    s = clogsim.feasible_horizon(box, 1.0 / (2.0 * math.pi))
    assert s == pytest.approx(math.log(1.0625), abs=1e-6)


def test_radius_field_and_heatmap(tmp_path):
    field = clogsim.initial_radius_field(clogsim.preset_bumps())
    # peak sits on a grid point at (0.2, 0.2): 0.05 + 0.35 plus a negligible
    # contribution from the far bump
    assert max(field) == pytest.approx(0.40, abs=1e-6)
    assert min(field) >= 0.05
    path = str(tmp_path / "r.svg")
    clogsim.render_heatmap(field, 41, "heat", path)
    first = open(path).read()
    clogsim.render_heatmap(field, 41, "heat", path)
    assert open(path).read() == first
