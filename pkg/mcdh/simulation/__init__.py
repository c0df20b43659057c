__all__ = ["SimConfig", "SimTruth", "SimOutput", "simulate", "draw_truth", "draw_choices", "PRESETS", "preset_config", "FactorAlignment", "align_factors"]

from .simulator import SimConfig, SimTruth, SimOutput, simulate, draw_truth, draw_choices
from .presets import PRESETS, preset_config
from .alignment import FactorAlignment, align_factors
