from __future__ import annotations

from typing import Any, Callable

from mcdh.enums import Enums
from mcdh.errors import ConfigError
from .simulator import SimConfig


def paper_sec4(seed: int) -> SimConfig:
    """100 individuals choose among 6 brands in each of 5 categories, 20 times in each of 10 periods, driven by 4 factors."""
    return SimConfig(individuals=100, brands=(6,) * 5, time_buckets=10, choices_per_period=(20,) * 5, length_scales=(1.0, 2.0, 4.0, 8.0), omega_variance=2.0, alpha=0.0, seed=seed)


def desk_small(seed: int) -> SimConfig:
    return SimConfig(individuals=40, brands=(4,) * 3, time_buckets=8, choices_per_period=(10,) * 3, length_scales=(2.0, 6.0), omega_variance=2.0, alpha=0.0, seed=seed)


def sparse_category(seed: int) -> SimConfig:
    """desk-small with the last category observed ten times less often and price sensitivities correlated across categories."""
    return desk_small(seed).replace(choices_per_period=(10, 10, 1), price_correlation=0.7)


def tiny(seed: int) -> SimConfig:
    return SimConfig(individuals=2, brands=(2,), time_buckets=2, choices_per_period=(1,), length_scales=(2.0,), omega_variance=2.0, alpha=0.0, seed=seed)


PRESETS: dict[Enums.Preset, Callable[[int], SimConfig]] = {
    Enums.Preset.PAPER_SEC4: paper_sec4,
    Enums.Preset.DESK_SMALL: desk_small,
    Enums.Preset.SPARSE_CATEGORY: sparse_category,
    Enums.Preset.TINY: tiny,
}


def preset_config(name: str, seed: int = 0, **overrides: Any) -> SimConfig:
    """The SimConfig of a named preset, with any field overridden by keyword."""
    try:
        preset = Enums.Preset(name)
    except ValueError:
        raise ConfigError(f"Unknown preset '{name}', valid presets are {[member.value for member in Enums.Preset]}.")

    config = PRESETS[preset](seed)
    return config.replace(**overrides) if overrides else config
