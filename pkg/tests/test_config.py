import pytest

from bigraph_sum.config import SEED_ENV, ConfigError, RunConfig, load_run_config, read_config_file


def test_defaults():
    cfg = load_run_config(environ={})
    assert cfg == RunConfig()
    assert (cfg.lr, cfg.warmup_steps, cfg.steps, cfg.batch_size) == (5e-5, 8000, 210_000, 8)
    assert (cfg.hidden_dim, cfg.latent_dim, cfg.max_sentences, cfg.max_tokens) == (128, 75, 50, 512)


def test_precedence(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nseed = 3\nlr = 0.01  # inline\nmethod = dasg\nfreeze_initializer = yes\n")
    assert load_run_config(f, environ={}).seed == 3
    cfg = load_run_config(f, environ={SEED_ENV: "7"})
    assert (cfg.seed, cfg.lr, cfg.method, cfg.freeze_initializer) == (7, 0.01, "dasg", True)
    assert load_run_config(f, {"seed": 11}, environ={SEED_ENV: "7"}).seed == 11
    assert load_run_config(f, {"seed": None}, environ={}).seed == 3


def test_file_errors_carry_location(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("seed = 1\nno equals sign\n")
    with pytest.raises(ConfigError, match=r"bad.cfg:2"):
        read_config_file(f)
    f.write_text("colour = red\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        read_config_file(f)
    f.write_text("steps = many\n")
    with pytest.raises(ConfigError, match="steps"):
        read_config_file(f)
    with pytest.raises(ConfigError, match="not found"):
        read_config_file(tmp_path / "missing.cfg")


def test_unknown_preset():
    with pytest.raises(ConfigError, match="preset"):
        load_run_config(overrides={"preset": "xsum"}, environ={})


def test_hash_stable_and_sensitive():
    a, b = RunConfig(), RunConfig()
    assert a.hash() == b.hash() and len(a.hash()) == 16
    assert a.with_updates({"seed": 1}).hash() != a.hash()
    assert a.with_updates({"kl-coef": "0.5"}).kl_coef == 0.5
    assert a.with_updates({"k": "none"}).k is None
