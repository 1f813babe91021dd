import numpy as np
import pytest

from heisencorr.config import (apply_overrides, emit_config, parse_config,
                               parse_config_text, validate_required)
from heisencorr.errors import ConfigError

MINIMAL = "[pulse]\nomega = 0.057\n"


def test_minimal_config_gets_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg["pulse.omega"] == 0.057
    assert cfg["pulse.e0"] == 0.06
    assert cfg["grid.dr"] == 0.05
    assert cfg["time.n_t"] == 64
    assert "pulse.e0" in cfg.defaulted
    assert "pulse.omega" not in cfg.defaulted


def test_comments_sections_and_types():
    cfg = parse_config_text(
        "# run configuration\n"
        "[pulse]\n"
        "omega = 0.057  # a.u.\n"
        "e0 = 0.04\n"
        "[potential]\n"
        'kind = "harmonic"\n'
        "freq = 2.0\n"
        "[run]\n"
        "both_triangles = true\n"
    )
    assert cfg["potential.kind"] == "harmonic"
    assert cfg["run.both_triangles"] is True
    assert cfg.potential().freq == 2.0


def test_unknown_key_is_an_error_with_line():
    with pytest.raises(ConfigError, match=r"grid\.dx.*line 5"):
        parse_config_text("[pulse]\nomega = 0.057\n\n[grid]\ndx = 1\n")


def test_bad_value_is_an_error_naming_key_and_line():
    with pytest.raises(ConfigError, match=r"grid\.lmax.*line 4"):
        parse_config_text("[pulse]\nomega = 0.057\n[grid]\nlmax = banana\n")


def test_missing_required_key():
    with pytest.raises(ConfigError, match="pulse.omega"):
        parse_config_text("[grid]\ndr = 0.1\n")


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/run.ini")


def test_duplicate_and_orphan_keys():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("[pulse]\nomega = 0.057\nomega = 0.06\n")
    with pytest.raises(ConfigError, match="outside any section"):
        parse_config_text("omega = 0.057\n")


def test_round_trip(tmp_path):
    cfg = parse_config_text(MINIMAL + "[model]\nc = 0.5\n[output]\n"
                            'dir = "results"\n')
    text = emit_config(cfg)
    again = parse_config_text(text)
    assert again.values == cfg.values
    path = tmp_path / "run.ini"
    path.write_text(text)
    assert parse_config(path).values == cfg.values


def test_model_c_fit_or_number():
    assert parse_config_text(MINIMAL + "[model]\nc = fit\n")["model.c"] == "fit"
    assert parse_config_text(MINIMAL + "[model]\nc = 0.4\n")["model.c"] == 0.4
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL + "[model]\nc = maybe\n")


def test_overrides():
    cfg = parse_config_text(MINIMAL)
    over = apply_overrides(cfg, {"pulse.e0": "0.04", "run.jobs": 2})
    assert over["pulse.e0"] == 0.04
    assert over["run.jobs"] == 2
    assert "pulse.e0" not in over.defaulted
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"pulse.power": "3"})


def test_partial_parse_defers_required():
    cfg = parse_config_text("", partial=True)
    with pytest.raises(ConfigError, match="pulse.omega"):
        validate_required(cfg)
    full = apply_overrides(cfg, {"pulse.omega": "0.057"})
    assert validate_required(full)["pulse.omega"] == 0.057


def test_domain_object_builders():
    cfg = parse_config_text(MINIMAL)
    pls = cfg.pulse()
    assert pls.omega == 0.057
    tg = cfg.time_grid()
    assert tg.t_total == pytest.approx(pls.duration)
    assert tg.n_t == 64
    g = cfg.radial_grid()
    assert g.rmax == pytest.approx(240.0)
    assert np.isclose(g.dr, 0.05)
    cfg2 = apply_overrides(cfg, {"time.t_total": "30.0",
                                 "potential.kind": "free"})
    assert cfg2.time_grid().t_total == 30.0
    assert cfg2.potential().variant == "free"
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"potential.kind": "banana"}).potential()


def test_rate_provider_from_config(tmp_path):
    cfg = parse_config_text(MINIMAL)
    assert cfg.rate_provider().variant == "quasistatic"
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"model.rate": "table"}).rate_provider()
    table = tmp_path / "rates.tsv"
    np.savetxt(table, np.column_stack([[0.0, 1.0], [0.1, 0.2]]))
    cfg2 = apply_overrides(cfg, {"model.rate": "table",
                                 "model.rate_file": str(table)})
    assert cfg2.rate_provider().variant == "table"
