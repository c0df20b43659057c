__all__ = [
    "Point", "NutsStats", "NutsKernel", "ChainResult", "leapfrog", "kinetic_energy", "nuts_draw", "find_reasonable_step_size",
    "run_chain", "run_chains", "chain_generators",
    "DualAveraging", "WelfordVariance", "WindowedAdaptation",
    "PosteriorDraws", "STAT_NAMES",
    "DiagnosticsReport", "diagnostics",
]

from .sampler import Point, NutsStats, NutsKernel, ChainResult, leapfrog, kinetic_energy, nuts_draw, find_reasonable_step_size, run_chain, run_chains, chain_generators
from .adaptation import DualAveraging, WelfordVariance, WindowedAdaptation
from .draws import PosteriorDraws, STAT_NAMES
from .diagnostics import DiagnosticsReport, diagnostics
