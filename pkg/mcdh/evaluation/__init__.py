__all__ = [
    "MacroMetrics", "confusion_matrix", "macro_metrics", "hit_rate",
    "ForecastReport", "forecast", "predictive_probabilities",
    "pooling_metric", "posterior_pooling",
    "ElasticityReport", "elasticity", "elasticity_report", "category_elasticity_series", "representative_prices", "training_window",
    "HitRateGap", "hit_rate_gap", "correlation_summary", "sensitivity_summary", "posterior_mean_pooling",
    "iter_constrained", "summarize",
]

from .metrics import MacroMetrics, confusion_matrix, macro_metrics, hit_rate
from .forecast import ForecastReport, forecast, predictive_probabilities
from .pooling import pooling_metric, posterior_pooling
from .elasticity import ElasticityReport, elasticity, elasticity_report, category_elasticity_series, representative_prices, training_window
from .summaries import HitRateGap, hit_rate_gap, correlation_summary, sensitivity_summary, posterior_mean_pooling
from .posterior_draws import iter_constrained, summarize
