"""The 'mcdh' command line: simulate, fit, forecast, elasticity, diagnose, report, recover, compare and select."""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys
from typing import Any, Callable, Optional, Sequence

from maybe import Maybe

from mcdh.config import RunConfig
from mcdh.enums import Enums
from mcdh.errors import ConsistencyError, InvalidArgumentError, McdhError
from mcdh.evaluation import correlation_summary, elasticity_report, forecast, posterior_pooling, sensitivity_summary
from mcdh.frame import Frame
from mcdh.harness import build_model, fit, run_comparison, run_recovery, select_factor_count
from mcdh.inference import PosteriorDraws, diagnostics
from mcdh.io import export_panel, ingest, write_json, write_manifest
from mcdh.model.base import ChoiceModel
from mcdh.model.choice import Panel
from mcdh.simulation import preset_config, simulate
from mcdh.store import load_draws, persist_draws

logger = logging.getLogger(__name__)


class Settings:
    log_format = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    panel_name = "panel.csv"
    draws_name = "draws.sqlite"
    default_preset = Enums.Preset.DESK_SMALL.value


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors raise InvalidArgumentError instead of exiting."""

    def error(self, message: str) -> None:
        raise InvalidArgumentError(f"{self.prog}: {message}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--model", choices=[kind.value for kind in Enums.ModelKind])
    common.add_argument("--seed", type=int)
    common.add_argument("--chains", type=int)
    common.add_argument("--warmup", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--factors", type=int, help="number of latent factors L of the MCDH model")
    common.add_argument("--holdout-buckets", type=int, dest="holdout_buckets")
    common.add_argument("--max-draws", type=int, dest="max_draws", help="posterior draws used by forecast, elasticity and report")
    common.add_argument("--out", help="output directory")
    common.add_argument("--data", help="long-format panel file")
    common.add_argument("--preset", choices=[preset.value for preset in Enums.Preset])

    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true")
    return common


def build_parser() -> ArgumentParser:
    common = _common_parser()
    parser = ArgumentParser(prog="mcdh", description="Multi-category dynamic heterogeneity choice models: simulate, fit with NUTS, forecast and compare.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    commands.add_parser("simulate", parents=[common], help="simulate a panel from a preset")
    commands.add_parser("fit", parents=[common], help="fit a model to the training buckets of a panel")

    for name, description in [("forecast", "score the holdout buckets"), ("elasticity", "summarize dynamic price elasticities"), ("report", "diagnostics and posterior summaries")]:
        command = commands.add_parser(name, parents=[common], help=description)
        command.add_argument("--draws", help=f"draw store written by 'fit' (default: <out>/{Settings.draws_name})")

    diagnose = commands.add_parser("diagnose", parents=[common], help="convergence diagnostics of a draw store")
    diagnose.add_argument("--draws", help=f"draw store written by 'fit' (default: <out>/{Settings.draws_name})")

    recover = commands.add_parser("recover", parents=[common], help="simulation recovery study")
    recover.add_argument("--replications", type=int, default=1)
    recover.add_argument("--seeds", type=int, nargs="+")
    recover.add_argument("--truth-init", action="store_true", dest="truth_init", help="start every chain at the generating parameters")

    compare = commands.add_parser("compare", parents=[common], help="compare models on identical simulated splits")
    compare.add_argument("--models", nargs="+", default=[kind.value for kind in Enums.ModelKind], choices=[kind.value for kind in Enums.ModelKind])
    compare.add_argument("--seeds", type=int, nargs="+", default=[0])

    select = commands.add_parser("select", parents=[common], help="choose the number of latent factors by holdout hit rate")
    select.add_argument("--candidates", type=int, nargs="+", default=[1, 2, 3, 4, 5])

    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=Settings.log_format, stream=sys.stderr, force=True)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """The file config (or defaults) with every given flag applied on top."""
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    return config.override(**{
        "model": args.model, "seed": args.seed, "factors": args.factors, "out": args.out, "data": args.data, "preset": args.preset,
        "sampler.chains": args.chains, "sampler.warmup": args.warmup, "sampler.samples": args.samples,
        "split.holdout_buckets": args.holdout_buckets, "forecast.max_draws": args.max_draws,
    })


def _out(config: RunConfig) -> pathlib.Path:
    (out := pathlib.Path(config.out)).mkdir(parents=True, exist_ok=True)
    return out


def _require_data(config: RunConfig, command: str) -> str:
    if config.data is None:
        raise InvalidArgumentError(f"'{command}' needs a panel file: pass --data or set 'data' in the config.")
    return config.data


def _load_split(config: RunConfig, command: str) -> tuple[Panel, Panel, Any]:
    result = ingest(_require_data(config, command), config=config.ingest, holdout_buckets=config.split.holdout_buckets)
    training, holdout = result.panel.split(config.split.holdout_buckets)
    return training, holdout, result.metadata


def _draws_path(args: argparse.Namespace, config: RunConfig) -> pathlib.Path:
    return pathlib.Path(Maybe(getattr(args, "draws", None)).else_(pathlib.Path(config.out) / Settings.draws_name))


def _model_for_draws(draws: PosteriorDraws, training: Panel, config: RunConfig) -> ChoiceModel:
    """Rebuild the model a draw store was fitted with; the factor count comes from the stored layout."""
    if not draws.model_kind:
        raise ConsistencyError("The draw store does not record which model produced it.")

    factors = draws.layout["innovations"].shape[0] if "innovations" in draws.layout else 0
    return build_model(draws.model_kind, training, factors=factors, priors=config.priors)


def _write_tables(out: pathlib.Path, tables: dict[str, Frame]) -> list[pathlib.Path]:
    return [table.write_csv(out / f"{name}.csv") for name, table in tables.items()]


def simulate_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    out = _out(config)
    sim = simulate(preset_config(Maybe(config.preset).else_(Settings.default_preset), config.seed, **config.simulation))

    panel_path = export_panel(sim.panel, out / Settings.panel_name)
    truth_path = write_json(out / "truth.json", {"config": sim.config.to_dict(), "truth": sim.truth.to_dict()})
    write_manifest(out, "simulate", config, argv=argv, outputs=[panel_path, truth_path])
    return 0


def fit_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    training, _, metadata = _load_split(config, "fit")
    out = _out(config)

    model = build_model(config.model, training, factors=config.factors, priors=config.priors)
    draws = fit(model, training, config.sampler, config_hash=config.hash())
    report = diagnostics(draws)

    outputs = [persist_draws(draws, out / Settings.draws_name), write_json(out / "ingest.json", metadata.to_dict()), write_json(out / "diagnostics_summary.json", report.summary())]
    write_manifest(out, "fit", config, argv=argv, outputs=outputs, model=model.kind.value, parameters=model.layout.size)
    return 0


def forecast_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    training, holdout, _ = _load_split(config, "forecast")
    out = _out(config)

    draws = load_draws(_draws_path(args, config))
    model = _model_for_draws(draws, training, config)
    report = forecast(draws, holdout, model, training=training, config=config.forecast, seed=config.seed)

    outputs = [*_write_tables(out, report.tables()), write_json(out / "forecast_summary.json", report.summary())]
    write_manifest(out, "forecast", config, argv=argv, outputs=outputs, draws_config_hash=draws.config_hash)
    print(report.by_category.to_ascii())
    return 0


def elasticity_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    training, _, _ = _load_split(config, "elasticity")
    out = _out(config)

    draws = load_draws(_draws_path(args, config))
    report = elasticity_report(draws, _model_for_draws(draws, training, config), training, config=config.forecast)

    outputs = [*_write_tables(out, report.tables()), write_json(out / "elasticity_summary.json", report.summary())]
    write_manifest(out, "elasticity", config, argv=argv, outputs=outputs, draws_config_hash=draws.config_hash)
    return 0


def diagnose_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    out = _out(config)
    report = diagnostics(load_draws(_draws_path(args, config)))

    outputs = [report.table.write_csv(out / "diagnostics.csv"), write_json(out / "diagnostics_summary.json", report.summary())]
    write_manifest(out, "diagnose", config, argv=argv, outputs=outputs)
    print(json.dumps(report.summary(), sort_keys=True))
    return 0


def report_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    out = _out(config)
    draws = load_draws(_draws_path(args, config))
    summary = diagnostics(draws)
    print(summary.table.to_ascii())

    outputs = [summary.table.write_csv(out / "diagnostics.csv")]
    if config.data is not None:
        training, _, _ = _load_split(config, "report")
        model = _model_for_draws(draws, training, config)
        outputs.append(sensitivity_summary(draws, model, config=config.forecast).write_csv(out / "sensitivity_summary.csv"))

        if "corr_unconstrained" in draws.layout:
            correlations = correlation_summary(draws, model, config=config.forecast)
            pooling = posterior_pooling(draws, model, config=config.forecast)
            outputs += [correlations.write_csv(out / "correlation_summary.csv"), pooling.write_csv(out / "pooling.csv")]
            print(pooling.to_ascii())

    write_manifest(out, "report", config, argv=argv, outputs=outputs)
    return 0


def recover_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    out = _out(config)
    preset = Maybe(config.preset).else_(Settings.default_preset)
    seeds = args.seeds if args.seeds is not None else list(range(config.seed, config.seed + args.replications))

    report = run_recovery(preset, seeds=seeds, config=config, truth_init=args.truth_init, out=out)
    write_manifest(out, "recover", config, argv=argv, outputs=[out / "recovery.csv", out / "recovery_summary.json"], seeds=seeds)
    print(report.table.to_ascii())
    return 0


def compare_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    out = _out(config)
    report = run_comparison(Maybe(config.preset).else_(Enums.Preset.SPARSE_CATEGORY.value), args.models, args.seeds, config=config, out=out)

    write_manifest(out, "compare", config, argv=argv, outputs=[out / "comparison.csv", out / "comparison_gaps.csv", out / "comparison_summary.json"], seeds=args.seeds)
    print(report.table.to_ascii())
    return 0


def select_command(args: argparse.Namespace, config: RunConfig, argv: Sequence[str]) -> int:
    out = _out(config)
    result = ingest(_require_data(config, "select"), config=config.ingest, holdout_buckets=config.split.holdout_buckets)
    selection = select_factor_count(result.panel, args.candidates, config=config)

    outputs = [selection.table.write_csv(out / "factor_selection.csv"), write_json(out / "factor_selection.json", selection.summary())]
    write_manifest(out, "select", config, argv=argv, outputs=outputs)
    print(selection.table.to_ascii())
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig, Sequence[str]], int]] = {
    "simulate": simulate_command,
    "fit": fit_command,
    "forecast": forecast_command,
    "elasticity": elasticity_command,
    "diagnose": diagnose_command,
    "report": report_command,
    "recover": recover_command,
    "compare": compare_command,
    "select": select_command,
}


def _fail(category: str, message: str) -> None:
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code. Errors print one JSON line {"error": <category>, "message": ...} to stderr."""
    argv = list(sys.argv[1:] if argv is None else argv)

    try:
        args = build_parser().parse_args(argv)
    except InvalidArgumentError as ex:
        _fail(ex.category.value, str(ex))
        return ex.exit_code
    except SystemExit as ex:
        return int(Maybe(ex.code).else_(0))

    configure_logging(args)

    try:
        return COMMANDS[args.command](args, resolve_config(args), argv)
    except McdhError as ex:
        logger.debug("Command failed.", exc_info=True)
        _fail(ex.category.value, str(ex))
        return ex.exit_code
    except Exception as ex:
        logger.exception("Unexpected failure.")
        _fail(Enums.ErrorCategory.INTERNAL.value, f"{type(ex).__name__}: {ex}")
        return 1


def main() -> None:
    sys.exit(cli_dispatch())
