import json

import pytest

from mcdh.config import RunConfig, SamplerConfig, PriorConfig, SplitConfig, ForecastConfig
from mcdh.errors import ConfigError


class TestSamplerConfig:
    @pytest.mark.parametrize("changes", [dict(chains=0), dict(warmup=0), dict(samples=0), dict(target_accept=0.5), dict(max_tree_depth=0), dict(seed=-1), dict(workers=0)])
    def test_rejects_invalid(self, changes):
        with pytest.raises(ConfigError):
            SamplerConfig(**changes)

    def test_workers_from_env(self, monkeypatch):
        monkeypatch.setenv("MCDH_WORKERS", "3")
        assert SamplerConfig().with_workers_from_env().workers == 3

    def test_workers_env_unset(self, monkeypatch):
        monkeypatch.delenv("MCDH_WORKERS", raising=False)
        assert SamplerConfig(workers=2).with_workers_from_env().workers == 2

    def test_bad_workers_env(self, monkeypatch):
        monkeypatch.setenv("MCDH_WORKERS", "many")
        with pytest.raises(ConfigError):
            SamplerConfig().with_workers_from_env()


def test_other_sections_validate():
    for build in (lambda: PriorConfig(jitter=0.0), lambda: SplitConfig(holdout_buckets=-1), lambda: ForecastConfig(interval=1.0), lambda: ForecastConfig(max_draws=0)):
        with pytest.raises(ConfigError):
            build()


class TestRunConfig:
    def test_seed_flows_into_sampler(self):
        assert RunConfig(seed=9).sampler.seed == 9

    def test_rejects_unknown_model(self):
        with pytest.raises(ConfigError):
            RunConfig(model="probit")

    def test_rejects_unknown_preset(self):
        with pytest.raises(ConfigError):
            RunConfig(preset="huge")

    def test_hash_is_stable_and_sensitive(self):
        assert RunConfig().hash() == RunConfig().hash()
        assert RunConfig().hash() != RunConfig(factors=3).hash()
        assert len(RunConfig().hash()) == 64

    def test_override(self):
        config = RunConfig().override(**{"sampler.chains": 2, "split.holdout_buckets": 1, "factors": 3, "seed": None})
        assert (config.sampler.chains, config.split.holdout_buckets, config.factors, config.seed) == (2, 1, 3, 0)

    def test_from_dict(self):
        config = RunConfig.from_dict({"model": "gpdh", "seed": 4, "sampler": {"chains": 2}, "forecast": {"max_draws": 10}})
        assert (config.model, config.sampler.chains, config.sampler.seed, config.forecast.max_draws) == ("gpdh", 2, 4, 10)

    def test_round_trip_through_dict(self):
        config = RunConfig(seed=3, factors=2, sampler=SamplerConfig(chains=2))
        assert RunConfig.from_dict(config.to_dict()) == config

    @pytest.mark.parametrize("data", [{"colour": 1}, {"sampler": {"steps": 3}}, {"sampler": {"seed": 3}}, {"priors": 5}, {"split": {"holdout_buckets": "x", "other": 1}}])
    def test_rejects_bad_dicts(self, data):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_from_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"factors": 2}), encoding="utf-8")
        assert RunConfig.from_json(path).factors == 2

    def test_from_json_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.from_json(tmp_path / "absent.json")

        (broken := tmp_path / "broken.json").write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.from_json(broken)

        (listed := tmp_path / "list.json").write_text("[]", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.from_json(listed)
