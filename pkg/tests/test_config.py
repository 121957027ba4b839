import pytest

from framefill.config import AppConfig, ConfigError, load_config


def test_defaults():
    cfg = load_config(env={})
    assert cfg.beam_size == 20
    assert cfg.host == "127.0.0.1"
    assert cfg.lexicon is None


def test_file_sections(tmp_path):
    p = tmp_path / "ff.toml"
    p.write_text(
        "[decode]\nbeam_size = 7\nlength_penalty = 0.5\n"
        "[service]\nport = 9100\n"
        "[artifacts]\nlexicon = 'lex.json'\n"
    )
    cfg = load_config(p, env={})
    assert cfg.beam_size == 7
    assert cfg.length_penalty == 0.5
    assert cfg.port == 9100
    assert cfg.lexicon == "lex.json"


def test_env_overrides_file(tmp_path):
    p = tmp_path / "ff.toml"
    p.write_text("[decode]\nbeam_size = 7\n")
    cfg = load_config(p, env={"FRAMEFILL_DECODE__BEAM_SIZE": "11",
                              "FRAMEFILL_SERVICE__HOST": "0.0.0.0"})
    assert cfg.beam_size == 11
    assert cfg.host == "0.0.0.0"


def test_flags_override_env(tmp_path):
    cfg = load_config(env={"FRAMEFILL_DECODE__BEAM_SIZE": "11"},
                      overrides={"beam_size": 3, "port": None})
    assert cfg.beam_size == 3
    assert cfg.port == AppConfig().port  # None overrides are ignored


def test_unknown_key_rejected(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[decode]\nbeam = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(p, env={})


def test_bad_toml_rejected(tmp_path):
    p = tmp_path / "broken.toml"
    p.write_text("[decode\n")
    with pytest.raises(ConfigError):
        load_config(p, env={})
