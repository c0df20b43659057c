import jax

jax.config.update("jax_enable_x64", True)

__version__ = "0.1.0"

__all__ = [
    "RunConfig", "SamplerConfig", "PriorConfig", "Enums",
    "TimeGrid", "SEKernelParams", "se_kernel", "build_covariance", "gp_extrapolate",
    "ModelDims", "Panel", "ChoiceModel", "McdhModel", "Posterior", "log_posterior", "log_likelihood",
    "run_chains", "PosteriorDraws", "diagnostics",
    "SimConfig", "simulate", "preset_config", "align_factors",
    "forecast", "elasticity_report", "pooling_metric", "macro_metrics",
    "ingest", "export_panel", "persist_draws", "load_draws",
    "build_model", "fit", "run_recovery", "run_comparison", "select_factor_count",
    "Frame",
]

from .config import RunConfig, SamplerConfig, PriorConfig
from .enums import Enums
from .gp import TimeGrid, SEKernelParams, se_kernel, build_covariance, gp_extrapolate
from .model import ModelDims, Panel, ChoiceModel, McdhModel, Posterior, log_posterior, log_likelihood
from .inference import run_chains, PosteriorDraws, diagnostics
from .simulation import SimConfig, simulate, preset_config, align_factors
from .evaluation import forecast, elasticity_report, pooling_metric, macro_metrics
from .io import ingest, export_panel
from .store import persist_draws, load_draws
from .harness import build_model, fit, run_recovery, run_comparison, select_factor_count
from .frame import Frame
