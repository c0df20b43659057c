from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import arviz as az
import numpy as np

from mcdh.frame import Frame

from .draws import PosteriorDraws

logger = logging.getLogger(__name__)

DIAGNOSTIC_COLUMNS = ("parameter", "mean", "sd", "mcse_mean", "rhat", "rhat_defined", "ess_bulk", "ess_tail")


@dataclass(eq=False)
class DiagnosticsReport:
    """Per-parameter convergence table plus run-level summaries. Undefined R-hat values are flagged in 'rhat_defined' and left out of 'max_rhat'."""
    table: Frame = field(repr=False)
    divergences: int
    divergences_per_chain: np.ndarray = field(repr=False)
    mean_accept_stat: np.ndarray = field(repr=False)
    bfmi: np.ndarray = field(repr=False)

    class Settings:
        rhat_threshold = 1.05
        min_ess_bulk = 400.0

    @property
    def max_rhat(self) -> float:
        defined = self.table.loc[self.table["rhat_defined"], "rhat"].to_numpy(dtype=np.float64)
        return float(defined.max()) if defined.size else float("nan")

    @property
    def min_ess_bulk(self) -> float:
        finite = self.table["ess_bulk"].to_numpy(dtype=np.float64)
        finite = finite[np.isfinite(finite)]
        return float(finite.min()) if finite.size else float("nan")

    @property
    def undefined_rhat(self) -> list[str]:
        return self.table.loc[~self.table["rhat_defined"], "parameter"].tolist()

    def converged(self, rhat_threshold: float = None, min_ess_bulk: float = None) -> bool:
        """True when every defined R-hat is below the threshold, bulk ESS clears the minimum and no transition diverged."""
        rhat_threshold = self.Settings.rhat_threshold if rhat_threshold is None else rhat_threshold
        min_ess_bulk = self.Settings.min_ess_bulk if min_ess_bulk is None else min_ess_bulk
        max_rhat, min_ess = self.max_rhat, self.min_ess_bulk
        return (np.isnan(max_rhat) or max_rhat < rhat_threshold) and (np.isnan(min_ess) or min_ess > min_ess_bulk) and self.divergences == 0

    def summary(self) -> dict:
        return {
            "max_rhat": self.max_rhat,
            "min_ess_bulk": self.min_ess_bulk,
            "divergences": self.divergences,
            "undefined_rhat": self.undefined_rhat,
            "mean_accept_stat": [float(value) for value in self.mean_accept_stat],
            "bfmi": [float(value) for value in self.bfmi],
        }


def _compute(values: np.ndarray) -> dict[str, np.ndarray]:
    dataset = az.convert_to_dataset(values)

    # constant or too-short chains produce NaN with runtime warnings; they are flagged below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        return {
            "rhat": np.asarray(az.rhat(dataset, method="rank")["x"].values, dtype=np.float64),
            "ess_bulk": np.asarray(az.ess(dataset, method="bulk")["x"].values, dtype=np.float64),
            "ess_tail": np.asarray(az.ess(dataset, method="tail")["x"].values, dtype=np.float64),
            "mcse_mean": np.asarray(az.mcse(dataset, method="mean")["x"].values, dtype=np.float64),
        }


def _bfmi(energy: np.ndarray) -> np.ndarray:
    if energy.shape[1] < 2 or np.any(np.var(energy, axis=1) == 0):
        return np.full(energy.shape[0], np.nan)

    return np.asarray(az.bfmi(energy), dtype=np.float64)


def diagnostics(draws: PosteriorDraws) -> DiagnosticsReport:
    """Split R-hat (rank-normalized), bulk and tail ESS and Monte Carlo standard error per scalar parameter, with divergence counts per chain."""
    values = draws.values
    computed = _compute(values)

    within_sd = values.std(axis=1)
    defined = np.isfinite(computed["rhat"]) & np.all(within_sd > 0, axis=0)

    table = Frame({
        "parameter": draws.layout.column_names,
        "mean": values.mean(axis=(0, 1)),
        "sd": values.reshape(-1, values.shape[2]).std(axis=0, ddof=1) if draws.n_draws > 1 else np.zeros(values.shape[2]),
        "mcse_mean": computed["mcse_mean"],
        "rhat": np.where(defined, computed["rhat"], np.nan),
        "rhat_defined": defined,
        "ess_bulk": computed["ess_bulk"],
        "ess_tail": computed["ess_tail"],
    }, columns=list(DIAGNOSTIC_COLUMNS))

    report = DiagnosticsReport(
        table=table,
        divergences=draws.divergences,
        divergences_per_chain=draws.stats["divergent"].sum(axis=1).astype(np.int64),
        mean_accept_stat=draws.stats["accept_stat"].mean(axis=1),
        bfmi=_bfmi(draws.stats["energy"]),
    )

    if undefined := report.undefined_rhat:
        logger.warning(f"R-hat is undefined for {len(undefined)} parameter(s) with constant chains: {', '.join(undefined[:10])}{' ...' if len(undefined) > 10 else ''}")

    if report.divergences:
        logger.warning(f"{report.divergences} divergent transition(s) after warmup, per chain: {report.divergences_per_chain.tolist()}")

    logger.info(f"Diagnostics over {draws.n_chains} chain(s) x {draws.n_samples} draw(s): max R-hat {report.max_rhat:.4f}, min bulk ESS {report.min_ess_bulk:.1f}")
    return report
