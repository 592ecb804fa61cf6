import pytest

from config import DEFAULT_DATABASE_URL, Config


def test_defaults(monkeypatch):
    for name in ("RQMC_THREADS", "RQMC_DATABASE_URL", "RQMC_S3_BUCKET", "RQMC_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    cfg = Config.from_env()
    assert cfg.threads >= 1
    assert cfg.database_url == DEFAULT_DATABASE_URL
    assert cfg.log_level == "INFO"
    assert not cfg.use_s3


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("RQMC_THREADS", "3")
    monkeypatch.setenv("RQMC_LOG_LEVEL", "debug")
    monkeypatch.setenv("RQMC_S3_BUCKET", "runs")
    monkeypatch.setenv("AWS_ACCESS_KEY_ID", "id")
    monkeypatch.setenv("AWS_SECRET_ACCESS_KEY", "secret")
    cfg = Config.from_env()
    assert cfg.threads == 3
    assert cfg.log_level == "DEBUG"
    assert cfg.use_s3


@pytest.mark.parametrize("value", ["abc", "0"])
def test_bad_thread_count(monkeypatch, value):
    monkeypatch.setenv("RQMC_THREADS", value)
    with pytest.raises(ValueError):
        Config.from_env()


if __name__ == "__main__":
    pytest.main([__file__])
