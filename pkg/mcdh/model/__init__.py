__all__ = [
    "CategoryLayout", "ModelDims",
    "ParameterBlock", "ParameterLayout", "ParameterState",
    "ChoiceObservation", "CategoryBlock", "Panel", "utilities", "choice_probabilities", "log_likelihood",
    "ChoiceModel", "McdhModel", "LatentFactorSet", "HeterogeneityScale", "SensitivityPath",
    "realize_factors", "assemble_sensitivity", "compose_sigma_omega",
    "lkj_log_density_unnormalized", "half_normal_log_density",
    "BenchmarkSpec", "ArmaMeanParams", "arma_mean_recursion", "BENCHMARK_KINDS",
    "LogitModel", "LogitInfoModel", "OffsetsModel", "OffsetsInfoModel", "GpdhModel",
    "LogDensityResult", "Posterior", "log_posterior", "benchmark_log_posterior",
]

from .dims import CategoryLayout, ModelDims
from .layout import ParameterBlock, ParameterLayout, ParameterState
from .choice import ChoiceObservation, CategoryBlock, Panel, utilities, choice_probabilities, log_likelihood
from .base import ChoiceModel
from .core import McdhModel, LatentFactorSet, HeterogeneityScale, SensitivityPath, realize_factors, assemble_sensitivity, compose_sigma_omega
from .transforms import lkj_log_density_unnormalized, half_normal_log_density
from .benchmarks import BenchmarkSpec, ArmaMeanParams, arma_mean_recursion, BENCHMARK_KINDS, LogitModel, LogitInfoModel, OffsetsModel, OffsetsInfoModel, GpdhModel
from .posterior import LogDensityResult, Posterior, log_posterior, benchmark_log_posterior
