"""Blocking parameter validation and environment overrides."""
import pytest

from mla.config import (VARIANTS, BlockConfig, CacheConfig, Policy,
                        threads_from_env)


def test_cache_defaults():
    cfg = CacheConfig()
    assert (cfg.m_c, cfg.k_c, cfg.n_c, cfg.m_r, cfg.n_r) == (256, 256, 4096, 8, 4)


def test_cache_rounds_blocks_to_register_tiles():
    cfg = CacheConfig(m_c=250, n_c=4097)
    assert cfg.m_c == 248          # multiple of m_r=8
    assert cfg.n_c == 4096         # multiple of n_r=4
    # Never rounds below one register tile.
    tiny = CacheConfig(m_c=5, n_c=3)
    assert tiny.m_c == 8
    assert tiny.n_c == 4


def test_cache_rejects_nonpositive():
    with pytest.raises(ValueError):
        CacheConfig(k_c=0)
    with pytest.raises(ValueError):
        CacheConfig(m_r=-2)


def test_cache_from_env_mapping():
    cfg = CacheConfig.from_env({"MLA_MC": "128", "MLA_KC": "64"})
    assert cfg.m_c == 128
    assert cfg.k_c == 64
    assert cfg.n_c == 4096
    # Keyword overrides win over the environment.
    cfg = CacheConfig.from_env({"MLA_KC": "64"}, k_c=32)
    assert cfg.k_c == 32


def test_cache_from_env_reads_process_environment(monkeypatch):
    monkeypatch.setenv("MLA_MR", "4")
    monkeypatch.setenv("MLA_MC", "100")
    cfg = CacheConfig.from_env()
    assert cfg.m_r == 4
    assert cfg.m_c == 100


def test_block_config_bounds():
    BlockConfig(256, 32)
    BlockConfig(32, 32)
    with pytest.raises(ValueError):
        BlockConfig(32, 64)
    with pytest.raises(ValueError):
        BlockConfig(32, 0)


def test_policy_accepts_every_variant():
    b = BlockConfig(64, 16)
    for variant in VARIANTS:
        assert Policy(variant, b).variant == variant


def test_policy_validation():
    b = BlockConfig(64, 16)
    with pytest.raises(ValueError):
        Policy("lu_fast", b)
    with pytest.raises(ValueError):
        Policy("lu_la", b, t_pf=0)
    with pytest.raises(ValueError):
        Policy("lu_ws_static", b, q=0)


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv("MLA_THREADS", "3")
    assert threads_from_env() == 3
    monkeypatch.setenv("MLA_THREADS", "0")
    with pytest.raises(ValueError):
        threads_from_env()
    monkeypatch.delenv("MLA_THREADS")
    assert threads_from_env(default=2) == 2
    assert threads_from_env() >= 1
