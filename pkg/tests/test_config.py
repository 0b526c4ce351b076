import json
import math

import numpy as np
import pytest

from effham.config import ConfigError, load_config, model_to_dict, parse_config
from effham.perturbation import SpinModel
from effham.superop import SIGMA_X, SIGMA_Z

EXPAND = {
    "command": "expand",
    "model": {"omega": 1.0, "coupling": "sigma_x", "lambda": 0.2},
    "bath": {"spectral_density": {"kind": "ohmic_exp", "alpha": 0.1, "omega_c": 5.0}, "beta": 2.0},
    "times": {"T": 2.0, "h": 0.05, "n_out": 4},
    "orders": 2,
}


def test_round_trip(tmp_path):
    cfg = parse_config(EXPAND)
    again = parse_config(json.loads(cfg.to_json()))
    assert again.to_dict() == cfg.to_dict() == EXPAND
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert load_config(path).to_dict() == EXPAND


def test_model_and_bath():
    cfg = parse_config(EXPAND)
    m = cfg.model()
    assert m.omega == 1.0 and m.lam == 0.2 and np.array_equal(m.coupling_op, SIGMA_X)
    assert cfg.bath().beta == 2.0 and cfg.max_order == 2
    d = model_to_dict(SpinModel(1.5, SIGMA_Z, 0.3))
    assert d["omega"] == 1.5 and d["lambda"] == 0.3 and d["coupling"]["dim"] == 2


def test_time_grid():
    T, h, times = parse_config(EXPAND).time_grid()
    assert (T, h) == (2.0, 0.05)
    assert np.allclose(times, [0.5, 1.0, 1.5, 2.0])
    bad = dict(EXPAND, times={"T": 1.0, "h": 0.3})
    with pytest.raises(ConfigError):
        parse_config(bad).time_grid()


def test_infinite_beta_forms():
    for beta in (None, "inf"):
        doc = dict(EXPAND, bath=dict(EXPAND["bath"], beta=beta))
        assert math.isinf(parse_config(doc).bath().beta)


@pytest.mark.parametrize("doc", [
    {},
    {"command": "bogus"},
    dict(EXPAND, orders=5),
    dict(EXPAND, extra=1),
    dict(EXPAND, mc={"samples": 10}),
    {"command": "split", "generator": {}},
    {"command": "sweep", "sweep": {"parameter": "lambda", "values": []}},
    {"command": "sweep", "sweep": {"parameter": "gamma", "values": [1.0]}},
])
def test_rejects_invalid(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_missing_section():
    cfg = parse_config({"command": "expand"})
    with pytest.raises(ConfigError):
        cfg.model()


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")
