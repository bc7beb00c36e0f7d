"""Command-line entry point for descriptor observer experiments."""

from __future__ import annotations

import functools
import logging
from pathlib import Path
from typing import Callable, Sequence

import click

from deso import config
from deso.errors import DesoError, PersistentExcitationError
from deso.experiments import (
    ExperimentConfig,
    cmd_estimate,
    cmd_montecarlo,
    cmd_repro,
    cmd_simulate,
    cmd_synthesize,
    cmd_verify,
    load_experiment_config,
)
from deso.runtime import configure_logging
from deso.synthesis import OBSERVER_KINDS
from deso.validation import MODE_ALIASES, MONTECARLO_MODES

logger = logging.getLogger(__name__)

_PATH = click.Path(path_type=Path)


def _exit_codes(command: Callable) -> Callable:
    """Turn package errors into the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except PersistentExcitationError as exc:
            click.echo(f"error: {exc}", err=True)
            raise click.exceptions.Exit(config.EXIT_PE_EXHAUSTED) from exc
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            raise click.exceptions.Exit(config.EXIT_IO) from exc
        except (DesoError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise click.exceptions.Exit(config.EXIT_PARSE) from exc

    return wrapper


def _load_config(path: Path | None, mode: str | None = None) -> ExperimentConfig | None:
    if path is None:
        return None
    cfg = load_experiment_config(path)
    if mode is not None and mode != cfg.mode:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "mode": mode})
    return cfg


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=config.LOG_LEVEL,
    show_default=True,
)
def cli(log_level: str):
    """Data-driven observers for discrete-time descriptor systems."""
    configure_logging(log_level)


@cli.command()
@click.option("--config", "config_path", type=_PATH, required=True, help="Experiment config JSON")
@click.option("--out", type=_PATH, required=True, help="Output directory")
@click.option("--seed", type=int, default=None, help="Override the config seed")
@click.option("--mode", type=click.Choice(OBSERVER_KINDS), default=None, help="Override the config mode")
@_exit_codes
def simulate(config_path: Path, out: Path, seed: int | None, mode: str | None):
    """Record a persistently exciting dataset."""
    cfg = _load_config(config_path, mode)
    rec = cmd_simulate(cfg, out, seed=seed)
    click.echo(f"dataset: {out / config.DATASET_FILE} (T={rec.T}, attempt {rec.meta['attempt']})")


@cli.command()
@click.option("--dataset", type=_PATH, required=True, help="Dataset CSV or its directory")
@click.option("--out", type=_PATH, required=True, help="Output directory")
@click.option("--mode", type=click.Choice(OBSERVER_KINDS), default=None, help="Defaults to the dataset mode")
@click.option("--config", "config_path", type=_PATH, default=None, help="Config with the plant, for model checks")
@_exit_codes
def synthesize(dataset: Path, out: Path, mode: str | None, config_path: Path | None):
    """Synthesize observer gains from a dataset."""
    cfg = _load_config(config_path)
    report = cmd_synthesize(dataset, out, mode=mode, cfg=cfg)
    if not report.feasible:
        click.echo(f"infeasible: {report.reason}", err=True)
        raise click.exceptions.Exit(config.EXIT_INFEASIBLE)
    click.echo(f"gains: {out / config.GAINS_FILE} (spectral radius {report.spectral_radius:.4f})")


@cli.command()
@click.option("--gains", "gains_path", type=_PATH, required=True, help="Gains JSON")
@click.option("--config", "config_path", type=_PATH, required=True, help="Config with the test phase")
@click.option("--out", type=_PATH, required=True, help="Output directory")
@click.option("--seed", type=int, default=None, help="Override the config seed")
@_exit_codes
def estimate(gains_path: Path, config_path: Path, out: Path, seed: int | None):
    """Run the observer on a fresh test trajectory."""
    cfg = _load_config(config_path)
    estimation = cmd_estimate(gains_path, cfg, out, seed=seed)
    click.echo(f"run: {out / config.RUN_FILE} (final error {estimation.err_traj[-1]:.3g})")


@cli.command()
@click.option("--dataset", type=_PATH, required=True, help="Dataset CSV or its directory")
@click.option("--out", type=_PATH, required=True, help="Output directory")
@click.option("--config", "config_path", type=_PATH, default=None, help="Config with the plant, for model checks")
@click.option("--mode", type=click.Choice(OBSERVER_KINDS), default=None, help="Defaults to the dataset mode")
@_exit_codes
def verify(dataset: Path, out: Path, config_path: Path | None, mode: str | None):
    """Compare data-based tests with model-based conditions."""
    cfg = _load_config(config_path)
    document = cmd_verify(dataset, out, cfg=cfg, mode=mode)
    for row in document["agreement"]:
        mark = "ok" if row["agree"] else "MISMATCH"
        click.echo(f"{row['condition']:<20} data={row['data']!s:<5} model={row['model']!s:<5} {mark}")
    click.echo(f"checks: {out / config.CHECKS_FILE}")


@cli.command()
@click.argument("example", type=click.Choice([str(value) for value in config.REFERENCE_EXAMPLES]))
@click.option("--out", type=_PATH, required=True, help="Bundle directory")
@click.option("--seed", type=int, default=None, help="Override the reference seed")
@_exit_codes
def repro(example: str, out: Path, seed: int | None):
    """Reproduce a reference example end to end."""
    summary = cmd_repro(int(example), out, seed=seed)
    for name, passed in summary["criteria"].items():
        click.echo(f"{name:<24} {'pass' if passed else 'FAIL'}")
    if not summary["passed"]:
        raise click.exceptions.Exit(config.EXIT_INFEASIBLE)


@cli.command()
@click.option(
    "--mode",
    type=click.Choice([*MONTECARLO_MODES, *MODE_ALIASES]),
    default="theorem2",
    show_default=True,
)
@click.option("--trials", type=click.IntRange(min=1), default=config.MC_DEFAULT_TRIALS, show_default=True)
@click.option("--seed", type=int, default=config.MC_DEFAULT_SEED, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=config.MC_WORKERS, show_default=True)
@click.option("--out", type=_PATH, required=True, help="Output directory")
@_exit_codes
def montecarlo(mode: str, trials: int, seed: int, workers: int, out: Path):
    """Check data-based and model-based verdicts on random plants."""
    summary = cmd_montecarlo(mode, trials, out, seed=seed, workers=workers)
    click.echo(
        f"{summary.mode}: {summary.agreements}/{summary.pe_passed} agreements on PE-valid trials "
        f"({summary.trials} total)"
    )
    if summary.disagreements:
        raise click.exceptions.Exit(config.EXIT_INFEASIBLE)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code; usage errors map to the parse code."""

    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name="deso", standalone_mode=False)
    except click.exceptions.Abort:
        return config.EXIT_PARSE
    except click.ClickException as exc:
        exc.show()
        return config.EXIT_PARSE
    return code if isinstance(code, int) else config.EXIT_OK


def run() -> None:
    raise SystemExit(main())


__all__ = ["cli", "main", "run"]
