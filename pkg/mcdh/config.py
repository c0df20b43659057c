from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field, fields, asdict, is_dataclass
from typing import Any, Optional, Type, TypeVar

from maybe import Maybe

from mcdh.enums import Enums
from mcdh.errors import ConfigError

ConfigT = TypeVar("ConfigT")


class Settings:
    workers_env_var = "MCDH_WORKERS"
    default_out = "mcdh-out"


@dataclass(frozen=True)
class SamplerConfig:
    """Settings of the NUTS sampler. Defaults are knobs, not claims about any published run."""
    chains: int = 4
    warmup: int = 1000
    samples: int = 1000
    target_accept: float = 0.8
    max_tree_depth: int = 10
    seed: int = 0
    init_radius: float = 1.0
    divergence_threshold: float = 1000.0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.chains < 1:
            raise ConfigError(f"sampler.chains must be at least 1, got {self.chains}.")
        if self.warmup < 1 or self.samples < 1:
            raise ConfigError(f"sampler.warmup and sampler.samples must be at least 1, got warmup={self.warmup}, samples={self.samples}.")
        if not 0.5 < self.target_accept <= 0.99:
            raise ConfigError(f"sampler.target_accept must lie in (0.5, 0.99], got {self.target_accept}.")
        if self.max_tree_depth < 1:
            raise ConfigError(f"sampler.max_tree_depth must be at least 1, got {self.max_tree_depth}.")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"sampler.seed must be an unsigned 64-bit integer, got {self.seed}.")
        if self.init_radius <= 0 or self.divergence_threshold <= 0:
            raise ConfigError("sampler.init_radius and sampler.divergence_threshold must be positive.")
        if self.workers < 1:
            raise ConfigError(f"sampler.workers must be at least 1, got {self.workers}.")

    def with_workers_from_env(self) -> SamplerConfig:
        """Return a copy whose worker count is overridden by the MCDH_WORKERS environment variable, when set."""
        if (value := os.environ.get(Settings.workers_env_var)) is None:
            return self

        try:
            return dataclasses.replace(self, workers=int(value))
        except ValueError:
            raise ConfigError(f"{Settings.workers_env_var} must be a positive integer, got '{value}'.")


@dataclass(frozen=True)
class PriorConfig:
    """Hyperprior settings shared by MCDH and the comparison models."""
    length_scale_median: float = 4.0
    length_scale_log_sd: float = 1.0
    alpha_sd: float = 5.0
    tau_scale: float = 1.0
    lkj_shape: float = 2.0
    amplitude_scale: float = 1.0
    arma_coef_sd: float = 0.5
    jitter: float = 1e-8

    def __post_init__(self) -> None:
        for item in fields(self):
            if not (value := getattr(self, item.name)) > 0:
                raise ConfigError(f"priors.{item.name} must be positive, got {value}.")


@dataclass(frozen=True)
class SplitConfig:
    holdout_buckets: int = 4

    def __post_init__(self) -> None:
        if self.holdout_buckets < 0:
            raise ConfigError(f"split.holdout_buckets must be non-negative, got {self.holdout_buckets}.")


@dataclass(frozen=True)
class IngestConfig:
    """Optional activity filters applied at ingest, plus the price standardization switch."""
    standardize_prices: bool = True
    head_buckets: Optional[int] = None
    tail_buckets: Optional[int] = None
    min_active_buckets: Optional[int] = None


@dataclass(frozen=True)
class ForecastConfig:
    max_draws: int = 200
    interval: float = 0.9

    def __post_init__(self) -> None:
        if self.max_draws < 1:
            raise ConfigError(f"forecast.max_draws must be at least 1, got {self.max_draws}.")
        if not 0 < self.interval < 1:
            raise ConfigError(f"forecast.interval must lie in (0, 1), got {self.interval}.")


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one command-line run. Its hash goes into every manifest."""
    model: str = Enums.ModelKind.MCDH.value
    factors: int = 4
    seed: int = 0
    data: Optional[str] = None
    out: str = Settings.default_out
    preset: Optional[str] = None
    priors: PriorConfig = field(default_factory=PriorConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    forecast: ForecastConfig = field(default_factory=ForecastConfig)
    simulation: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        try:
            Enums.ModelKind(self.model)
        except ValueError:
            raise ConfigError(f"model must be one of {[kind.value for kind in Enums.ModelKind]}, got '{self.model}'.")

        if self.preset is not None:
            try:
                Enums.Preset(self.preset)
            except ValueError:
                raise ConfigError(f"preset must be one of {[preset.value for preset in Enums.Preset]}, got '{self.preset}'.")

        if self.factors < 0:
            raise ConfigError(f"factors must be non-negative, got {self.factors}.")

        if self.sampler.seed != self.seed:
            object.__setattr__(self, "sampler", dataclasses.replace(self.sampler, seed=self.seed))

    @property
    def model_kind(self) -> Enums.ModelKind:
        return Enums.ModelKind(self.model)

    def to_dict(self) -> dict:
        data = asdict(self)
        del data["sampler"]["seed"]
        return data

    def hash(self) -> str:
        """SHA-256 of the canonical JSON form of this config."""
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()

    def override(self, **overrides: Any) -> RunConfig:
        """Return a copy with every non-None override applied. Dotted names ('sampler.chains') address nested configs."""
        flat = {name: value for name, value in overrides.items() if value is not None}
        nested: dict[str, dict[str, Any]] = {}
        top: dict[str, Any] = {}

        for name, value in flat.items():
            if "." in name:
                section, key = name.split(".", 1)
                nested.setdefault(section, {})[key] = value
            else:
                top[name] = value

        for section, values in nested.items():
            top[section] = dataclasses.replace(getattr(self, section), **values)

        return dataclasses.replace(self, **top)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        """Build a RunConfig from plain (JSON-like) data. Unknown keys at any level raise ConfigError."""
        if "sampler" in data and "seed" in Maybe(data.get("sampler")).else_({}):
            raise ConfigError("The seed is configured at top level ('seed'), not under 'sampler'.")

        return _build(cls, data, path="")

    @classmethod
    def from_json(cls, path: os.PathLike) -> RunConfig:
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except FileNotFoundError:
            raise ConfigError(f"Config file '{os.fspath(path)}' does not exist.")
        except json.JSONDecodeError as ex:
            raise ConfigError(f"Config file '{os.fspath(path)}' is not valid JSON: {ex}.")

        if not isinstance(data, dict):
            raise ConfigError(f"Config file '{os.fspath(path)}' must contain a JSON object at top level.")

        return cls.from_dict(data)


def _build(cls: Type[ConfigT], data: Any, path: str) -> ConfigT:
    if not isinstance(data, dict):
        raise ConfigError(f"Config section '{path or '<root>'}' must be an object, got {type(data).__name__}.")

    known = {item.name: item for item in fields(cls)}
    if unknown := sorted(set(data) - set(known)):
        raise ConfigError(f"Unknown config key(s) {', '.join(repr(f'{path}{key}') for key in unknown)}. Allowed keys at this level: {', '.join(sorted(known))}.")

    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if known[name].default_factory is not dataclasses.MISSING else None
        kwargs[name] = _build(type(default), value, path=f"{path}{name}.") if is_dataclass(default) else value

    try:
        return cls(**kwargs)
    except TypeError as ex:
        raise ConfigError(f"Invalid config section '{path or '<root>'}': {ex}.")
