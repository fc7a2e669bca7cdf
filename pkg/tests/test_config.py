import json
import math

import pytest

from ionspec.config import ConfigError, PowerLawModel, TrapModel, load_config, parse_config

BASE = {"model": {"power_law": {"n": 7, "j0_hz": 100.0, "alpha": 1.1}}}


def with_(**kw):
    return {**BASE, **kw}


def test_defaults():
    cfg = parse_config(BASE)
    assert isinstance(cfg.model, PowerLawModel)
    assert cfg.modes == (1, 7) and cfg.t_j == 40.0 and cfg.t_max is None
    assert cfg.frame_convention == "supplement" and cfg.ansatz == "sine"
    assert cfg.sampling.mode == "exact" and cfg.analysis.zero_pad == 8


def test_nearest_neighbour_alpha_string():
    cfg = parse_config({"model": {"power_law": {"n": 5, "j0_hz": 1.0, "alpha": "inf"}}})
    assert math.isinf(cfg.model.alpha)


def test_trap_model_and_scalar_rabi():
    cfg = parse_config({"model": {"trap": {"n_ions": 3, "axial_freq_hz": 1e5, "transverse_freq_hz": 2e6,
                                           "rabi_hz": 5e4, "lamb_dicke": 0.1, "detuning_hz": 1e4}}})
    assert isinstance(cfg.model, TrapModel)
    assert cfg.model.rabi_hz == (5e4, 5e4, 5e4)


@pytest.mark.parametrize("doc,fragment", [
    (with_(bogus=1), "bogus"),
    ({"model": {"power_law": {"n": 7, "j0_hz": 1.0}}}, "model.power_law.alpha"),
    ({"model": {"power_law": {"n": 7, "j0_hz": 1.0, "alpha": 1, "x": 2}}}, "model.power_law.x"),
    ({"model": {"lattice": {}}}, "model.lattice"),
    (with_(modes=[1, 9]), "modes"),
    (with_(modes=[1, 2, 3]), "modes"),
    (with_(time={"t_max": 1.0, "t_j": 4.0}), "time"),
    (with_(time={"t_j": 4.0, "n_samples": 4}), "time.n_samples"),
    (with_(sampling={"mode": "weak"}), "sampling.mode"),
    (with_(analysis={"window": "kaiser"}), "analysis.window"),
    (with_(analysis={"threshold": 2}), "analysis.threshold"),
    (with_(frame_convention="lab"), "frame_convention"),
    (with_(gamma="big"), "gamma"),
    ({"model": {"trap": {"n_ions": 3, "axial_freq_hz": 1, "transverse_freq_hz": 2, "rabi_hz": [1, 2],
                         "lamb_dicke": 0.1, "detuning_hz": 1}}}, "rabi_hz"),
    ({"model": {"trap": {"n_ions": 3, "axial_freq_hz": 1, "transverse_freq_hz": 2, "rabi_hz": 1,
                         "lamb_dicke": 0.1}}}, "detuning_hz"),
])
def test_rejections_name_the_key(doc, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        parse_config(doc)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(with_(modes=3)))
    assert load_config(good).modes == (3,)
