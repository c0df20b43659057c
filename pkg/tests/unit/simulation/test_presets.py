import pytest

from mcdh.enums import Enums
from mcdh.errors import ConfigError
from mcdh.simulation import PRESETS, preset_config


@pytest.mark.parametrize("preset", list(Enums.Preset))
def test_every_preset_builds(preset):
    config = preset_config(preset.value, seed=3)
    assert config.seed == 3 and config == PRESETS[preset](3)


def test_sparse_category():
    config = preset_config("sparse-category")
    assert config.choices_per_period == (10, 10, 1)
    assert config.price_correlation == 0.7


def test_overrides():
    assert preset_config("desk-small", individuals=5).individuals == 5


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset_config("huge")
