# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Command line entry point ``bregman-vi``."""

import argparse
import concurrent.futures
import csv
import logging
import os
import pathlib
import sys
import typing

import pydantic

from analysis import (
    CoordinateReport,
    Regime,
    fit_rate,
    per_coordinate_report,
    predict_rate_general,
    write_report,
)
from config import Experiment, ExperimentConfig
from domains import classify_solution
from exceptions import BregmanError, ConfigError, DomainError, SolverError, UnknownTargetError
from scenarios import TARGET_ALIASES, TARGETS, reproduce
from solver import MethodConfig, Trajectory, run
from suites import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

MANIFEST_HEADER = ["run", "directory", "parameter", "value", "config_hash", "termination"]
UNAVAILABLE = Regime("unavailable")


def _with_horizon(experiment: Experiment, horizon: int | None) -> Experiment:
    """Override the horizon of an experiment.

    Args:
        experiment: the experiment.
        horizon: the new horizon, None to keep the configured one.

    Returns:
        The experiment.

    Raises:
        ConfigError: if the step schedule is too short for the new horizon.
    """
    if horizon is None:
        return experiment
    try:
        method = MethodConfig.model_validate(experiment.method.model_dump() | {"horizon": horizon})
    except pydantic.ValidationError as exc:
        raise ConfigError(f"invalid horizon {horizon}: {exc.errors()[0]['msg']}") from exc
    return experiment._replace(method=method)


def _rate_reports(experiment: Experiment, traj: Trajectory) -> list[CoordinateReport]:
    """Fit the run and pair every fit with its prediction.

    Args:
        experiment: the experiment.
        traj: its trajectory.

    Returns:
        Per active coordinate reports followed by the whole-iterate report.
    """
    problem, h, cfg = experiment.problem, experiment.regularizer, experiment.method
    if problem.solution is None or traj.distance is None:
        logger.warning("%s has no known solution, rates are not fitted", problem.name)
        return []
    reports: list[CoordinateReport] = []
    try:
        profile = classify_solution(problem.domain, problem.field, problem.solution)
        if profile.active_set:
            reports.extend(per_coordinate_report(traj, profile, h, cfg, problem))
    except (BregmanError, ValueError) as exc:
        logger.warning("per-coordinate rates unavailable: %s", exc)
    try:
        prediction = predict_rate_general(problem, h, cfg)
        predicted = typing.cast(Regime, prediction.norm)
        source = prediction.source
    except (BregmanError, ValueError) as exc:
        logger.warning("no generic rate prediction: %s", exc)
        predicted, source = UNAVAILABLE, "none"
    try:
        fit = fit_rate(traj.distance, allow_finite_time=not h.kernel.steep)
    except BregmanError as exc:
        logger.warning("the distance series cannot be fitted: %s", exc)
        return reports
    reports.append(CoordinateReport(None, fit, predicted, source))
    return reports


def _summary(experiment: Experiment, traj: Trajectory, reports: list[CoordinateReport]) -> str:
    """Render the human-readable run summary.

    Args:
        experiment: the experiment.
        traj: its trajectory.
        reports: the rate reports.

    Returns:
        The summary text.
    """
    cfg = experiment.method
    if not isinstance(cfg.gamma, tuple):
        schedule = f"constant {cfg.gamma!r}"
    elif len(traj.steps):
        schedule = f"variable in [{traj.steps.min()!r}, {traj.steps.max()!r}]"
    else:
        schedule = "variable"
    lines = [
        f"problem: {experiment.problem.name}",
        f"method: {cfg.method_name} (alpha_a={cfg.alpha_a:g}, alpha_b={cfg.alpha_b:g})",
        f"kernel: {experiment.regularizer.kernel.name}",
        f"step: {schedule}",
        f"states: {len(traj)}",
        f"termination: {traj.termination}",
        f"field calls: {traj.field_calls}",
        f"underflow step: {traj.underflow_step or 'none'}",
    ]
    if traj.step_report is not None:
        failed = [name for name, where in traj.step_report.violations.items() if where]
        lines.append(f"step conditions: {'violated: ' + ', '.join(failed) if failed else 'ok'}")
    if traj.neighborhood_exits:
        lines.append(f"neighbourhood exits: {len(traj.neighborhood_exits)}")
    if traj.divergence is not None:
        lines.append(f"final divergence: {traj.divergence[-1]!r}")
    for report in reports:
        label = "whole iterate" if report.coordinate is None else f"x{report.coordinate + 1}"
        lines.append(f"{label}: predicted {report.predicted}, fitted {report.fit.regime}")
    lines.append(
        "only regimes and their leading factor or exponent are compared, "
        "the constants of the bounds are not"
    )
    return "\n".join(lines) + "\n"


def execute(experiment: Experiment, out: pathlib.Path) -> Trajectory:
    """Run an experiment and write its outputs.

    Args:
        experiment: the experiment.
        out: output directory, created when missing.

    Returns:
        The trajectory.
    """
    problem = experiment.problem
    lipschitz_slack = problem.check_lipschitz(seed=experiment.seed)
    if lipschitz_slack < 0:
        logger.warning("declared Lipschitz modulus is violated by %.3e", -lipschitz_slack)
    if problem.strong is not None and problem.solution is not None:
        strong_slack = problem.check_strong_monotonicity(seed=experiment.seed)
        if strong_slack < 0:
            logger.warning("declared strong modulus is violated by %.3e", -strong_slack)
    traj = run(problem, experiment.regularizer, experiment.method)
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv")
    reports = _rate_reports(experiment, traj)
    write_report(reports, out / "rates.csv")
    (out / "summary.txt").write_text(_summary(experiment, traj, reports), encoding="utf-8")
    return traj


def _run_command(args: argparse.Namespace) -> int:
    """Handle ``run``.

    Args:
        args: parsed arguments.

    Returns:
        The exit code.
    """
    config = ExperimentConfig.load(args.config)
    experiment = _with_horizon(config.build(args.config.parent), args.horizon)
    if args.seed is not None:
        experiment = experiment._replace(seed=args.seed)
    out = args.out or experiment.output
    traj = execute(experiment, out)
    print(f"{traj.termination} after {len(traj)} states, outputs in {out}")
    return EXIT_OK


def _reproduce_command(args: argparse.Namespace) -> int:
    """Handle ``reproduce``.

    Args:
        args: parsed arguments.

    Returns:
        The exit code, 1 when a run disagrees with its stated regime.
    """
    out = args.out or pathlib.Path("out")
    rows = reproduce(args.target, out, args.horizon)
    for row in rows:
        verdict = "pass" if row.passed else "fail"
        print(f"{row.scenario}: fitted {row.fitted}, stated {row.stated}: {verdict}")
    return EXIT_OK if all(row.passed for row in rows) else EXIT_FAILED


def _verify_command(args: argparse.Namespace) -> int:
    """Handle ``verify``.

    Args:
        args: parsed arguments.

    Returns:
        The exit code, 1 when a check fails.
    """
    results = run_suite(args.suite, args.seed or 0, args.horizon)
    writer = csv.writer(sys.stdout)
    writer.writerow(["suite", "check", "passed", "slack"])
    for result in results:
        passed = "true" if result.passed else "false"
        writer.writerow([result.suite, result.check, passed, repr(result.slack)])
    return EXIT_OK if all(result.passed for result in results) else EXIT_FAILED


def _parse_param(raw: str) -> tuple[str, list[str]]:
    """Split ``section.key=v1,v2,...``.

    Args:
        raw: the parameter argument.

    Returns:
        The key path and the values.

    Raises:
        ConfigError: if the argument is malformed.
    """
    path, sep, values = raw.partition("=")
    if not sep or "." not in path or not values:
        raise ConfigError(f"invalid sweep parameter {raw!r}, expected section.key=v1,v2,...")
    return path.strip(), [value.strip() for value in values.split(",")]


def _sweep_worker(task: tuple[str, str, int | None, int | None]) -> str:
    """Run one sweep variant in a worker process.

    Args:
        task: rendered configuration, output directory, horizon and seed overrides.

    Returns:
        The termination cause.
    """
    text, directory, horizon, seed = task
    out = pathlib.Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(text, encoding="utf-8")
    experiment = _with_horizon(ExperimentConfig.parse(text).build(out), horizon)
    if seed is not None:
        experiment = experiment._replace(seed=seed)
    return execute(experiment, out).termination


def _sweep_command(args: argparse.Namespace) -> int:
    """Handle ``sweep``.

    Args:
        args: parsed arguments.

    Returns:
        The exit code.
    """
    config = ExperimentConfig.load(args.config)
    path, values = _parse_param(args.param)
    variants = [config.with_override(path, value) for value in values]
    out = args.out or pathlib.Path(config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    directories = [f"run-{index:04d}" for index in range(1, len(variants) + 1)]
    tasks = [
        (variant.render(), str(out / directory), args.horizon, args.seed)
        for variant, directory in zip(variants, directories)
    ]
    logger.info("sweeping %s over %d values with %s workers", path, len(values), args.workers)
    with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as executor:
        terminations = list(executor.map(_sweep_worker, tasks))
    with (out / "manifest.csv").open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(MANIFEST_HEADER)
        for index, (variant, directory, value, termination) in enumerate(
            zip(variants, directories, values, terminations), start=1
        ):
            writer.writerow([index, directory, path, value, variant.digest(), termination])
    print(f"{len(variants)} runs, manifest in {out / 'manifest.csv'}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    """Build the argument parser.

    Returns:
        The parser.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=pathlib.Path, help="output directory")
    common.add_argument("--horizon", type=int, help="override the number of recorded states")
    common.add_argument("--seed", type=int, help="seed of randomized checks")
    common.add_argument(
        "--workers", type=int, default=os.cpu_count(), help="sweep worker processes"
    )
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="root logger level",
    )
    parser = argparse.ArgumentParser(
        prog="bregman-vi", description="Bregman proximal methods for variational inequalities"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", parents=[common], help="run a configuration")
    run_parser.add_argument("config", type=pathlib.Path)
    run_parser.set_defaults(handler=_run_command)

    reproduce_parser = commands.add_parser(
        "reproduce", parents=[common], help="reproduce a table of reference runs"
    )
    reproduce_parser.add_argument(
        "target", help=f"one of {', '.join([*TARGETS, *TARGET_ALIASES])}"
    )
    reproduce_parser.set_defaults(handler=_reproduce_command)

    verify_parser = commands.add_parser("verify", parents=[common], help="run an invariant suite")
    verify_parser.add_argument("suite", help=f"one of all, {', '.join(SUITES)}")
    verify_parser.set_defaults(handler=_verify_command)

    sweep_parser = commands.add_parser(
        "sweep", parents=[common], help="run a configuration over a parameter grid"
    )
    sweep_parser.add_argument("config", type=pathlib.Path)
    sweep_parser.add_argument("--param", required=True, help="section.key=v1,v2,...")
    sweep_parser.set_defaults(handler=_sweep_command)
    return parser


def main(argv: typing.Sequence[str] | None = None) -> int:
    """Run the command line.

    Args:
        argv: arguments, defaults to sys.argv.

    Returns:
        The exit code.
    """
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.handler(args)
    except (ConfigError, UnknownTargetError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except SolverError as exc:
        logger.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except DomainError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except BregmanError as exc:
        logger.error("%s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: nocover
    raise SystemExit(main())
