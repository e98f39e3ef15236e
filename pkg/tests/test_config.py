import json

import pytest

from qbmft.models.experiment_config import ExperimentConfig
from qbmft.services.config_service import ConfigService
from qbmft.utils.error_handling import EXIT_CONFIG, ConfigError


def test_defaults():
    config = ExperimentConfig()
    assert config.bath.kind == 'OhmicDrude'
    assert config.bath.gamma0 == 0.5
    assert config.numerics.dt == 0.0025
    assert config.protocol.tau == 5.0
    assert config.mc.samples == 10000
    assert config.mc.seed == 12345
    assert config.validation_errors() == []


def test_from_dict_round_trip():
    config = ExperimentConfig.from_dict({'bath': {'hbar': 0.5}, 'mc': {'samples': 2000}})
    again = ExperimentConfig.from_dict(config.to_dict())
    assert again == config
    assert again.bath.hbar == 0.5


def test_errors_are_collected():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({
            'bath': {'gamma0': -1.0, 'colour': 'red'},
            'system': {'Omega': 'fast'},
            'extra': {},
        })
    errors = info.value.field_errors
    assert info.value.exit_code == EXIT_CONFIG
    assert 'extra: unknown block' in errors
    assert 'bath.colour: unknown field' in errors
    assert 'system.Omega: expected a number' in errors
    assert 'bath.gamma0: must be > 0' in errors


def test_integer_fields_reject_fractions():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({'mc': {'samples': 10.5}})
    assert 'mc.samples: expected an integer' in info.value.field_errors


def test_tau_must_be_multiple_of_dt():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({'protocol': {'tau': 1.0}, 'numerics': {'dt': 0.3}})
    assert any('multiple of dt' in e for e in info.value.field_errors)


def test_discrete_oracle_requires_classical_mode():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'mc': {'oracle': 'discrete:100'}})
    config = ExperimentConfig.from_dict({'mc': {'oracle': 'discrete:100', 'mode': 'classical'}})
    assert config.discrete_modes == 100
    assert config.effective_hbar == 0.0


def test_with_value_revalidates():
    config = ExperimentConfig()
    assert config.with_value('bath.hbar', 0.2).bath.hbar == 0.2
    assert config.bath.hbar == 1.0
    with pytest.raises(ConfigError):
        config.with_value('bath.beta', -1.0)
    with pytest.raises(ConfigError):
        config.with_value('bath.temperature', 1.0)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        ConfigService.get_config(str(tmp_path / 'absent.json'), environ={})
    bad = tmp_path / 'bad.json'
    bad.write_text('{"bath": ')
    with pytest.raises(ConfigError):
        ConfigService.get_config(str(bad), environ={})


def test_environment_overrides(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'output': {'directory': 'from-file'}}))
    config = ConfigService.get_config(str(path), environ={'QBMFT_OUTPUT_DIR': 'from-env',
                                                          'QBMFT_THREADS': '4'})
    assert config.output.directory == 'from-env'
    assert config.mc.threads == 4
    with pytest.raises(ConfigError):
        ConfigService.get_config(str(path), environ={'QBMFT_THREADS': 'many'})


def test_save_and_reload(tmp_path):
    config = ExperimentConfig().with_value('protocol.shape', 'gaussian')
    path = tmp_path / 'saved.json'
    assert ConfigService.save_config(config, str(path))
    assert ConfigService.get_config(str(path), environ={}) == config


@pytest.mark.parametrize('exponent', [None, 0.0, 2.0, 3.0])
def test_power_law_exponent_range(exponent):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({'bath': {'kind': 'PowerLaw', 'exponent': exponent}})
    assert 'bath.exponent: required in (0, 2) for PowerLaw' in info.value.field_errors
    config = ExperimentConfig.from_dict({'bath': {'kind': 'PowerLaw', 'exponent': 1.5}})
    assert config.bath.exponent == 1.5
