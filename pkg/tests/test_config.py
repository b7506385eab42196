import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hstirs.channel import IrsPanel
from hstirs.config import (ScenarioConfig, config_from_dict, dump_scenario, load_scenario, parse_power,
                           swap_y_up)
from hstirs.exceptions import ConfigError


def write(tmp_path, text, name="s.json"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_empty_file_gives_defaults(tmp_path):
    cfg = load_scenario(write(tmp_path, ""))
    assert cfg == ScenarioConfig()
    assert cfg.rho0 == pytest.approx(0.01) and cfg.d0 == 1.0 and cfg.bandwidth == 20e6
    assert cfg.sigma2 == pytest.approx(1e-13, rel=1e-12) and cfg.tx_power == pytest.approx(0.01, rel=1e-12)
    assert (cfg.delta_bu, cfg.delta_ut, cfg.n_trains, cfg.n_reflectors) == (2.6, 2.8, 4, 100)
    assert cfg.panel.spacing_x == 0.01 and cfg.v_train == 100 and cfg.v_max == 55


@pytest.mark.parametrize("text, value", [("-20 dB", 0.01), ("-100 dBm", 1e-13), ("10 dBm", 0.01), ("3", 3.0), (0.5, 0.5)])
def test_parse_power(text, value):
    assert parse_power(text) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("bad", ["ten dB", "5 dBW", True, None, [1]])
def test_parse_power_rejects(bad):
    with pytest.raises(ConfigError):
        parse_power(bad)


def test_db_and_linear_agree(tmp_path):
    a = load_scenario(write(tmp_path, json.dumps({"rho0": "-20 dB", "sigma2": "-100 dBm", "p": "10 dBm"}), "a.json"))
    b = load_scenario(write(tmp_path, json.dumps({"rho0": 0.01, "sigma2": 1e-13, "tx_power": 0.01}), "b.json"))
    for name in ("rho0", "sigma2", "tx_power"):
        assert abs(getattr(a, name) - getattr(b, name)) <= 1e-12 * getattr(b, name)


@given(st.floats(-150, 50))
def test_emitted_linear_reloads(db):
    cfg = config_from_dict({"sigma2": f"{db} dBm"})
    again = config_from_dict({"sigma2": cfg.sigma2})
    assert abs(again.sigma2 - cfg.sigma2) <= 1e-12 * cfg.sigma2


def test_round_trip(tmp_path):
    cfg = ScenarioConfig(n_trains=3, panel=IrsPanel(grid_nx=4, grid_ny=5), train_offsets=(0.0, 10.0, 30.0),
                         static_uav=(1.0, 2.0, 90.0))
    dump_scenario(cfg, tmp_path / "c.json")
    assert load_scenario(tmp_path / "c.json") == cfg


def test_aliases_and_y_up(tmp_path):
    data = {"y_up": True, "M": 2, "K": 3, "R0": 5, "B": 1e6, "bs_position": [550, 0, 350],
            "comment": "fixed IRS sites kept for reference", "fixed_irs_sites": [[300, 100, 200]]}
    cfg = load_scenario(write(tmp_path, json.dumps(data)))
    assert cfg.n_trains == 2 and cfg.n_slots == 3 and cfg.r0 == 5 and cfg.bandwidth == 1e6
    assert cfg.bs_position == (550.0, 350.0, 0.0)


def test_default_bs_is_imported_reference_site():
    assert ScenarioConfig().bs_position == swap_y_up((550, 0, 350)) == (550.0, 350.0, 0.0)


def test_parse_error_reports_location(tmp_path):
    with pytest.raises(ConfigError, match="line 2"):
        load_scenario(write(tmp_path, '{"M": 4,\n "K": }'))


@pytest.mark.parametrize("data, match", [
    ({"bogus": 1}, "unknown field"),
    ({"l_min": 300, "l_max": 200}, "l_min"),
    ({"M": 2.5}, "integer"),
    ({"bandwidth": -1}, "bandwidth"),
    ({"panel": {"grid_nx": 2, "size": 3}}, "panel"),
    ({"bs_position": [1, 2, 3]}, "ground"),
    ({"train_offsets": [0, 1]}, "train_offsets"),
])
def test_invariant_violations(data, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(data)


def test_derived_quantities():
    cfg = ScenarioConfig()
    assert cfg.step_length == pytest.approx(5.5)
    np.testing.assert_array_equal(cfg.offsets(), [60, 40, 20, 0])
    pos = cfg.static_position()
    assert pos[2] == 100.0
    np.testing.assert_allclose(pos[:2], [(550 + 675) / 2, (350 + 150) / 2])
