import numpy as np
import pytest

from mcdh.inference import PosteriorDraws, diagnostics
from mcdh.model import ParameterBlock, ParameterLayout


def make_draws(values, **stats):
    values = np.asarray(values, dtype=np.float64)
    return PosteriorDraws(values=values, layout=ParameterLayout([ParameterBlock("x", (values.shape[2],))]), stats=stats)


class TestDiagnostics:
    def test_constant_chains_are_flagged(self):
        report = diagnostics(make_draws(np.ones((4, 100, 2))))
        assert not report.table["rhat_defined"].any()
        assert report.undefined_rhat == ["x[0]", "x[1]"]
        assert np.isnan(report.max_rhat)

    def test_constant_parameter_does_not_poison_max(self):
        values = np.random.default_rng(0).normal(size=(4, 500, 2))
        values[:, :, 1] = 3.0
        report = diagnostics(make_draws(values))
        assert report.table["rhat_defined"].tolist() == [True, False]
        assert np.isfinite(report.max_rhat)

    def test_iid_draws(self):
        report = diagnostics(make_draws(np.random.default_rng(1).normal(size=(4, 1000, 3))))
        assert np.all((report.table["rhat"] >= 0.99) & (report.table["rhat"] <= 1.01))
        assert report.min_ess_bulk > 1000
        assert report.converged()

    def test_separated_chains(self):
        values = np.random.default_rng(2).normal(size=(2, 500, 1))
        values[0] -= 10
        values[1] += 10
        report = diagnostics(make_draws(values))
        assert report.max_rhat > 1.2
        assert not report.converged()

    def test_divergences(self):
        divergent = np.zeros((2, 50), dtype=bool)
        divergent[1, :3] = True
        report = diagnostics(make_draws(np.random.default_rng(3).normal(size=(2, 50, 1)), divergent=divergent))
        assert report.divergences == 3
        assert report.divergences_per_chain.tolist() == [0, 3]
        assert not report.converged(rhat_threshold=10.0, min_ess_bulk=0.0)

    def test_columns(self):
        report = diagnostics(make_draws(np.random.default_rng(4).normal(size=(2, 50, 2))))
        assert list(report.table.columns) == ["parameter", "mean", "sd", "mcse_mean", "rhat", "rhat_defined", "ess_bulk", "ess_tail"]

    def test_summary(self):
        energy = np.random.default_rng(5).normal(size=(2, 100))
        summary = diagnostics(make_draws(np.random.default_rng(6).normal(size=(2, 100, 1)), energy=energy)).summary()
        assert set(summary) == {"max_rhat", "min_ess_bulk", "divergences", "undefined_rhat", "mean_accept_stat", "bfmi"}
        assert all(np.isfinite(summary["bfmi"]))

    def test_bfmi_undefined_for_constant_energy(self):
        report = diagnostics(make_draws(np.random.default_rng(7).normal(size=(2, 100, 1))))
        assert np.all(np.isnan(report.bfmi))


def test_default_thresholds():
    assert diagnostics(make_draws(np.random.default_rng(8).normal(size=(4, 200, 1)))).Settings.rhat_threshold == pytest.approx(1.05)
