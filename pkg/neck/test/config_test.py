import os

import pytest

from neck.parameters import SeriesSettings, WeightSpec
from neck.specfun import HypergeomParams, hyp2f1_disk, series_settings, using_series_settings
from neck.utils.config import DEFAULTS, Config
from neck.utils.errors import ConfigError, DomainError


def write_config(tmp_path, text):
    path = tmp_path / "neck.env"
    path.write_text(text)
    return str(path)


def test_defaults():
    config = Config()
    assert config.T_LIST == (25.0, 50.0, 100.0)
    assert config.SPECTRUM.provider == 'torus'
    assert config.SPECTRUM.n_max == 8
    assert config['K_PLUS'] == -1
    assert config['NOT_A_KEY'] is None
    assert config.SVG is True


def test_env_example_lists_every_key():
    path = os.path.join(os.path.dirname(__file__), "..", "..", ".env.example")
    with open(path) as handle:
        keys = {line.split('=')[0] for line in handle if '=' in line and not line.startswith('#')}
    assert keys == set(DEFAULTS)


def test_file_values_and_overrides(tmp_path):
    path = write_config(tmp_path, "# run settings\nT_LIST=10,20\nSPECTRUM=synthetic:40,3\nSVG=false\n")
    config = Config(path)
    assert config.T_LIST == (10.0, 20.0)
    assert config.SPECTRUM.tag == "synthetic:40,3"
    assert config.SVG is False

    config = Config(path, {'T_LIST': '5,6', 'K_MINUS': None})
    assert config.T_LIST == (5.0, 6.0)
    assert config.K_MINUS == 0


def test_unknown_key_points_at_its_line(tmp_path):
    path = write_config(tmp_path, "T_LIST=10\nFOO=1\n")
    with pytest.raises(ConfigError) as error:
        Config(path)
    assert str(error.value).startswith(f"{path}:2: FOO:")
    assert error.value.line == 2


def test_bad_value_points_at_its_line(tmp_path):
    path = write_config(tmp_path, "\nK_MINUS=abc\n")
    with pytest.raises(ConfigError) as error:
        Config(path)
    assert error.value.key == 'K_MINUS'
    assert error.value.line == 2


def test_malformed_line(tmp_path):
    with pytest.raises(ConfigError):
        Config(write_config(tmp_path, "T_LIST=10\njust words\n"))


@pytest.mark.parametrize("overrides", [
    {'T_LIST': '50,25'},
    {'SPECTRUM': 'sphere:3'},
    {'LAMBDA_LIST': '1,99'},
    {'C2': '-1'},
    {'DISK_MARGIN': '0.3'},
    {'SVG': 'maybe'},
])
def test_invalid_settings(overrides):
    with pytest.raises(ConfigError):
        Config(overrides=overrides)


def test_missing_file():
    with pytest.raises(ConfigError):
        Config("does/not/exist.env")


def test_run_config():
    config = Config(overrides={'T_LIST': '25,50'})
    cfg = config.run_config('verify')
    assert cfg.command == 'verify'
    assert cfg.T_list == (25.0, 50.0)
    assert cfg.weights.T == 50.0
    assert cfg.weights_at(25.0).T == 25.0
    assert cfg.exact_family is None


def test_config_hash_tracks_command_and_settings():
    first = Config().run_config('verify').config_hash
    assert first == Config().run_config('verify').config_hash
    assert first != Config().run_config('limits').config_hash
    assert first != Config(overrides={'SPECTRUM': 'synthetic:40,8'}).run_config('verify').config_hash
    # logging settings do not change results
    assert first == Config(overrides={'LOG_LEVEL': '4'}).run_config('verify').config_hash


def test_series_settings_reach_the_solver():
    cfg = Config(overrides={'SERIES_TOL': '1e-4', 'SERIES_MAX_TERMS': '500', 'DISK_MARGIN': '0.1'}).run_config('modes')
    assert cfg.series == SeriesSettings(abs_tol=1e-4, max_terms=500, margin=0.1)

    p = HypergeomParams(1.0, 2.0, 3.0)
    default_terms = hyp2f1_disk(p, 0.5).terms
    hyp2f1_disk(p, 0.92)
    with using_series_settings(cfg.series):
        assert hyp2f1_disk(p, 0.5).terms < default_terms
        with pytest.raises(DomainError):
            hyp2f1_disk(p, 0.92)
    assert series_settings() == SeriesSettings()


def test_seed_comes_from_the_spectrum():
    assert Config().run_config('verify').seed == 0
    assert Config(overrides={'SPECTRUM': 'synthetic:40,3'}).run_config('verify').seed == 3


def test_weights_come_from_the_parameter_records():
    import neck.utils.config as config_module

    spec = Config().run_config('verify').weights_at(50)
    assert isinstance(spec, WeightSpec)
    assert spec.T == 50.0
    sources = {getattr(value, '__module__', None) for value in vars(config_module).values()}
    assert 'neck.validation' not in sources
