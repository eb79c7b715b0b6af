import pytest

from config import settings


def test_defaults_are_valid():
    assert settings.validate_config()


@pytest.mark.parametrize("name,value", [
    ('THREADS', 0),
    ('QUAD_TOL', 0.0),
    ('ODE_ATOL', -1e-12),
    ('GENSINE_NODES', 8),
    ('THRESHOLD_SCAN', (12, 2)),
])
def test_bad_settings_are_flagged(monkeypatch, capsys, name, value):
    monkeypatch.setattr(settings, name, value)
    assert not settings.validate_config()
    assert "WARNING" in capsys.readouterr().out


def test_env_helpers(monkeypatch):
    monkeypatch.setenv('HARDY_PLAPLACE_TEST_INT', '7')
    monkeypatch.setenv('HARDY_PLAPLACE_TEST_EMPTY', '')
    assert settings._int_env('HARDY_PLAPLACE_TEST_INT', 1) == 7
    assert settings._float_env('HARDY_PLAPLACE_TEST_EMPTY', 0.5) == 0.5
    assert settings._int_env('HARDY_PLAPLACE_TEST_MISSING', 3) == 3
