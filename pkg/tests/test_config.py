import math

import pytest

from mpjc.config import ConfigError, ScenarioConfig, loads_config


def test_round_trip_is_lossless():
    cfg = ScenarioConfig(kind="decoherence", n1=1, n2=2, m=2, g1=0.1 + 0.2, phi=math.pi / 7,
                         lambda_r=0.05, n_th=0.1, cutoff=9, strict=True, t_points=17)
    text = cfg.to_ini()
    back = loads_config(text)
    assert back == cfg
    assert back.to_ini() == text
    assert back.g1 == 0.1 + 0.2


def test_minimal_file_uses_defaults():
    cfg = loads_config("[scenario]\nschema_version = 1\nkind = negativity\nm = 3\n")
    assert cfg.m == 3 and cfg.g1 == 1 / math.sqrt(2) and cfg.delta == 0.0
    assert cfg.cutoff is None


@pytest.mark.parametrize("text", [
    "",
    "[scenario]\nkind = evolve\n",
    "[scenario]\nschema_version = 2\n",
    "[scenario]\nschema_version = 1\nkind = plot\n",
    "[scenario]\nschema_version = 1\nbogus = 1\n",
    "[scenario]\nschema_version = 1\nm = two\n",
    "[scenario]\nschema_version = 1\nm = 0\n",
    "[scenario]\nschema_version = 1\n[extra]\n",
    "[scenario]\nschema_version = 1\n[lindblad]\nlambda_r = -1\n",
    "[scenario]\nschema_version = 1\n[scan]\nwidth = 3\n",
    "not an ini file",
])
def test_rejects_bad_files(text):
    with pytest.raises(ConfigError):
        loads_config(text)


def test_overrides():
    cfg = ScenarioConfig().with_overrides(m=2, phi_points=5, delta=None)
    assert cfg.m == 2 and cfg.scan.phi_points == 5 and cfg.delta == 0.0
    with pytest.raises(ConfigError):
        ScenarioConfig().with_overrides(nonsense=1)


def test_time_grid():
    cfg = ScenarioConfig(t_start=1.0, t_stop=2.0, t_points=3)
    assert list(cfg.times()) == [1.0, 1.5, 2.0]
    assert list(ScenarioConfig(t_points=1, t_start=4.0, t_stop=4.0).times()) == [4.0]
