__all__ = [
    "build_model", "fit", "map_replications",
    "RecoveryRecord", "RecoveryReport", "run_recovery", "recovery_statistics", "posterior_mode", "factor_scale",
    "ComparisonReport", "run_comparison", "compare_on_panel",
    "FactorSelection", "select_factor_count",
]

from .pipeline import build_model, fit, map_replications
from .recovery import RecoveryRecord, RecoveryReport, run_recovery, recovery_statistics, posterior_mode, factor_scale
from .comparison import ComparisonReport, run_comparison, compare_on_panel
from .selection import FactorSelection, select_factor_count
