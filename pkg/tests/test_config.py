import json

import pytest

from clt_lab.config import ConfigError, load_config, parse_config
from clt_lab.gaussfit import Thresholds

BASE = {"scheme": {"name": "iid"}, "n_grid": [4, 8, 16]}


def _err(raw):
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    return info.value.path


def test_defaults():
    cfg = parse_config(BASE)
    assert cfg.n_grid == (4, 8, 16)
    assert cfg.eps_grid == (0.05, 0.1, 0.2, 0.5)
    assert cfg.C_grid == (1.0, 4.0, 25.0, 100.0)
    assert cfg.mode == "auto" and cfg.reps == 100_000 and cfg.alpha == 1e-3
    assert cfg.verdict == Thresholds()


def test_empty_grid_rejected():
    assert _err({**BASE, "n_grid": []}) == "n_grid"


@pytest.mark.parametrize("raw, path", [
    ({**BASE, "n_grid": [4, 4]}, "n_grid[1]"),
    ({**BASE, "n_grid": [4, 2.5]}, "n_grid[1]"),
    ({**BASE, "eps_grid": [0.5, 0.1]}, "eps_grid[1]"),
    ({**BASE, "C_grid": [1, -4]}, "C_grid[1]"),
    ({**BASE, "mode": "fast"}, "mode"),
    ({**BASE, "reps": 0}, "reps"),
    ({**BASE, "seed": -1}, "seed"),
    ({**BASE, "seed": 2 ** 64}, "seed"),
    ({**BASE, "alpha": 1.5}, "alpha"),
    ({**BASE, "verdict": {"tau_xx": 0.1}}, "verdict.tau_xx"),
    ({**BASE, "verdict": {"tau_ks": 0}}, "verdict.tau_ks"),
    ({**BASE, "output": {"formats": ["xml"]}}, "output.formats"),
    ({**BASE, "extra": 1}, "extra"),
    ({"n_grid": [1]}, "scheme"),
    ({"scheme": {"name": "iid"}}, "n_grid"),
    ({**BASE, "scheme": {"name": "nope"}}, "scheme"),
    ({"scheme": {"name": "poisson-bernoulli", "lambda": 2}, "n_grid": [2, 4]}, "n_grid[0]"),
])
def test_field_paths(raw, path):
    assert _err(raw) == path


def test_overrides_revalidate():
    cfg = parse_config(BASE)
    assert cfg.with_overrides(mode="mc", seed=5).mode == "mc"
    assert cfg.with_overrides(seed=None).seed == 0
    with pytest.raises(ConfigError):
        cfg.with_overrides(seed=-3)


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({**BASE, "verdict": {"tau_ks": 0.03}, "output": {"dir": "x", "formats": ["csv"]}}))
    cfg = load_config(p)
    assert cfg.verdict.tau_ks == 0.03 and cfg.out_dir == "x" and cfg.formats == ("csv",)
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")


def test_echo_is_json():
    cfg = parse_config({**BASE, "scheme": {"name": "poisson-bernoulli", "lambda": 1}})
    e = cfg.echo()
    assert json.loads(json.dumps(e)) == e
    assert e["n_grid"] == [4, 8, 16]
