"""
Unit tests for configuration and the error hierarchy
"""

import json

import pytest

from network_logarch.core.config import Config, get_config, reset_config, set_config
from network_logarch.core.errors import (
    BacktestStepError,
    ConfigurationError,
    DataError,
    NumericError,
    ParseError,
    SingularMoment,
    UsageError,
)


class TestConfigDefaults:
    """Default values of the experiment configuration"""

    def test_defaults(self):
        config = Config()
        assert config.window_len == 2540
        assert config.instrument_depth == 2
        assert config.alpha == 0.10
        assert config.bootstrap_reps == 5000
        assert config.block_len == 10
        assert config.ensemble_burn_in == 60
        assert config.normalize_inverse is True
        assert config.refit_w_each_step is False

    @pytest.mark.parametrize('kwargs', [
        {'alpha': 0.0},
        {'alpha': 1.5},
        {'window_len': 50},
        {'ar_criterion': 'hqc'},
        {'zero_policy': 'drop'},
        {'zero_policy': 'floor_constant'},
        {'bootstrap_reps': 0},
    ])
    def test_invalid_values(self, kwargs):
        with pytest.raises(ConfigurationError):
            Config(**kwargs)

    def test_floor_constant_with_floor(self):
        config = Config(zero_policy='floor_constant', zero_floor=1e-8)
        assert config.zero_floor == 1e-8


class TestConfigSources:
    """Environment, file and override layering"""

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv('NETARCH_WINDOW_LEN', '300')
        monkeypatch.setenv('NETARCH_REFIT_W_EACH_STEP', 'true')
        monkeypatch.setenv('NETARCH_ALPHA', '0.05')
        monkeypatch.setenv('NETARCH_ZERO_FLOOR', '1e-9')
        config = Config.from_env()
        assert config.window_len == 300
        assert config.refit_w_each_step is True
        assert config.alpha == 0.05
        assert config.zero_floor == 1e-9

    def test_from_env_bad_number(self, monkeypatch):
        monkeypatch.setenv('NETARCH_WINDOW_LEN', 'many')
        with pytest.raises(ConfigurationError) as exc_info:
            Config.from_env()
        assert 'NETARCH_WINDOW_LEN' in str(exc_info.value)

    def test_from_file(self, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps({'window_len': 500, 'seed': 42}))
        config = Config.from_file(path, base=Config())
        assert config.window_len == 500
        assert config.seed == 42
        assert config.alpha == 0.10

    def test_from_file_unknown_key(self, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps({'window': 500}))
        with pytest.raises(ConfigurationError) as exc_info:
            Config.from_file(path, base=Config())
        assert 'window' in str(exc_info.value)

    def test_from_file_missing(self, tmp_path):
        with pytest.raises(ConfigurationError):
            Config.from_file(tmp_path / 'absent.json')

    def test_from_file_not_an_object(self, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text('[1, 2]')
        with pytest.raises(ConfigurationError):
            Config.from_file(path)

    def test_with_overrides_ignores_none(self):
        config = Config().with_overrides(seed=5, alpha=None)
        assert config.seed == 5
        assert config.alpha == 0.10

    def test_to_dict_round_trip(self):
        config = Config(seed=9, window_len=400)
        assert Config(**config.to_dict()) == config


class TestGlobalConfig:
    """Singleton accessors"""

    def test_get_config_caches(self):
        assert get_config() is get_config()

    def test_set_and_reset(self):
        custom = Config(seed=123)
        set_config(custom)
        assert get_config() is custom
        reset_config()
        assert get_config() is not custom


class TestErrorHierarchy:
    """Exit codes carried by each error family"""

    def test_exit_codes(self):
        assert ConfigurationError('x').exit_code == 2
        assert isinstance(ConfigurationError('x'), UsageError)
        assert ParseError('x').exit_code == 3
        assert isinstance(ParseError('x'), DataError)
        assert SingularMoment('x').exit_code == 4
        assert isinstance(SingularMoment('x'), NumericError)

    def test_parse_error_location(self):
        error = ParseError('Non-numeric value', row=4, column='AAPL')
        assert error.row == 4
        assert error.column == 'AAPL'
        assert "row 4" in str(error)
        assert "'AAPL'" in str(error)

    def test_backtest_step_error_inherits_exit_code(self):
        error = BacktestStepError('B.3.1', 17, SingularMoment('collinear'))
        assert error.exit_code == 4
        assert error.model_id == 'B.3.1'
        assert error.step == 17
        assert 'B.3.1' in str(error) and '17' in str(error)
