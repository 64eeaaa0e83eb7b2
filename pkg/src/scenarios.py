# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Named experiment setups and the reproduction targets built on them."""

import csv
import logging
import math
import pathlib
import typing

import numpy as np

from analysis import (
    FINITE_TIME,
    Regime,
    RateFit,
    fit_rate,
    predict_rate_general,
    predict_rate_sharp,
)
from domains import Domain, classify_solution
from exceptions import UnknownTargetError
from kernels import Regularizer, legendre_exponent_analytic, make_kernel
from solver import AffineField, MethodConfig, Problem, Trajectory, run

logger = logging.getLogger(__name__)

STEP = 0.1
BOUNDARY_HORIZON = 100_000
SHARP_HORIZON = 10_000


class Scenario(typing.NamedTuple):
    """A fully specified experiment.

    Attributes:
        name: scenario name.
        problem: the problem.
        kernel: kernel name understood by make_kernel.
        preset: method preset.
        gamma: constant step size.
        init: starting point.
        horizon: default number of base states.
        stated: the regime of ‖X_t − x*‖ the run is known to follow.
        tolerance: accepted deviation of the fitted parameter from the stated one.
    """

    name: str
    problem: Problem
    kernel: str
    preset: str
    gamma: float
    init: tuple[float, ...]
    horizon: int
    stated: Regime
    tolerance: float

    def regularizer(self) -> Regularizer:
        """Pair the kernel with the problem's domain.

        Returns:
            The regularizer.
        """
        return Regularizer(make_kernel(self.kernel), self.problem.domain)

    def method(self, horizon: int | None = None) -> MethodConfig:
        """Build the method config.

        Args:
            horizon: overrides the scenario's horizon.

        Returns:
            The config.
        """
        return MethodConfig.preset(
            self.preset,
            gamma=self.gamma,
            init=self.init,
            horizon=horizon or self.horizon,
        )


def _half_line(
    name: str, kernel: str, shift: float, stated: Regime, tolerance: float, horizon: int
) -> Scenario:
    """Build a one-dimensional run of F(x) = x + shift on [0, ∞) from 0.5.

    Args:
        name: scenario name.
        kernel: kernel name.
        shift: constant drift, 0 for a boundary solution with F(x*) = 0.
        stated: known regime.
        tolerance: accepted deviation.
        horizon: default horizon.

    Returns:
        The scenario.
    """
    domain = Domain.interval(0.0, 1.0) if kernel.startswith("tsallis") else Domain.interval()
    problem = Problem(
        domain,
        AffineField.shifted_identity([-shift]),
        lipschitz=1.0,
        solution=[0.0],
        strong=1.0,
        name=name,
    )
    return Scenario(name, problem, kernel, "md", STEP, (0.5,), horizon, stated, tolerance)


def _hellinger(name: str, shift: float, init: float, stated: Regime, horizon: int) -> Scenario:
    """Build a run of F(x) = x + shift on [−1, 1] under the Hellinger kernel.

    Args:
        name: scenario name.
        shift: constant drift.
        init: starting point.
        stated: known regime.
        horizon: default horizon.

    Returns:
        The scenario.
    """
    solution = -1.0 if shift >= 1 else -shift
    problem = Problem(
        Domain.interval(-1.0, 1.0),
        AffineField.shifted_identity([-shift]),
        lipschitz=1.0,
        solution=[solution],
        strong=1.0,
        name=name,
    )
    tolerance = 1e-3 if stated.kind == "geometric" else 0.05
    return Scenario(name, problem, "hellinger", "md", STEP, (init,), horizon, stated, tolerance)


def _simplex(name: str, u: tuple[float, float, float], stated: Regime) -> Scenario:
    """Build the exponential weights run of F(x) = x − u on the simplex of ℝ³.

    Args:
        name: scenario name.
        u: the shift, (−σ_1, −σ_2, 1) puts the solution at (0, 0, 1).
        stated: known regime of the slowest coordinate.

    Returns:
        The scenario.
    """
    problem = Problem(
        Domain.simplex(3),
        AffineField.shifted_identity(u),
        lipschitz=1.0,
        solution=[0.0, 0.0, 1.0],
        strong=1.0,
        name=name,
    )
    init = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    return Scenario(name, problem, "entropy", "md", STEP, init, BOUNDARY_HORIZON, stated, 0.05)


def _line(name: str, epsilon: float = 0.1, drift: float = 1.0) -> Scenario:
    """Build the entropic run on the ray {x ≥ 0 : x_1 = εx_2} with F(0) = (drift, 0).

    Args:
        name: scenario name.
        epsilon: slope of the ray.
        drift: first coordinate of F(0).

    Returns:
        The scenario.
    """
    problem = Problem(
        Domain.polyhedron([[1.0, -epsilon]], [0.0]),
        AffineField.shifted_identity([-drift, 0.0]),
        lipschitz=1.0,
        solution=[0.0, 0.0],
        strong=1.0,
        name=name,
    )
    factor = math.exp(-STEP * epsilon * drift / (1.0 + epsilon))
    return Scenario(
        name,
        problem,
        "entropy",
        "md",
        STEP,
        (epsilon, 1.0),
        SHARP_HORIZON,
        Regime("geometric", factor),
        1e-3,
    )


SCENARIOS: dict[str, typing.Callable[[], Scenario]] = {
    "euclidean-boundary": lambda: _half_line(
        "euclidean-boundary", "euclidean", 0.0, Regime("geometric", 1.0 - STEP), 1e-6, 500
    ),
    "entropy-boundary": lambda: _half_line(
        "entropy-boundary", "entropy", 0.0, Regime("power", -1.0), 0.05, BOUNDARY_HORIZON
    ),
    "tsallis-boundary": lambda: _half_line(
        "tsallis-boundary",
        "tsallis:q=0.5",
        0.0,
        Regime("power", -2.0 / 3.0),
        0.03,
        BOUNDARY_HORIZON,
    ),
    "hellinger-boundary": lambda: _hellinger(
        "hellinger-boundary", 1.0, -0.5, Regime("power", -2.0 / 3.0), BOUNDARY_HORIZON
    ),
    "euclidean-sharp": lambda: _half_line(
        "euclidean-sharp", "euclidean", 1.0, FINITE_TIME, 0.0, SHARP_HORIZON
    ),
    "entropy-sharp": lambda: _half_line(
        "entropy-sharp",
        "entropy",
        1.0,
        Regime("geometric", math.exp(-STEP)),
        1e-3,
        SHARP_HORIZON,
    ),
    "tsallis-sharp": lambda: _half_line(
        "tsallis-sharp", "tsallis:q=0.5", 1.0, Regime("power", -2.0), 0.05, SHARP_HORIZON
    ),
    "hellinger-sharp": lambda: _hellinger(
        "hellinger-sharp", 2.0, -0.5, Regime("power", -2.0), SHARP_HORIZON
    ),
    "hellinger-interior": lambda: _hellinger(
        "hellinger-interior", 0.0, 0.5, Regime("geometric", 1.0 - STEP), 500
    ),
    "simplex-mixed": lambda: _simplex("simplex-mixed", (-0.4, 0.0, 1.0), Regime("power", -1.0)),
    "simplex-sharp": lambda: _simplex(
        "simplex-sharp", (-0.4, -0.2, 1.0), Regime("geometric", math.exp(-STEP * 0.2))
    ),
    "line-tightness": lambda: _line("line-tightness"),
}


def get_scenario(name: str) -> Scenario:
    """Look up a scenario.

    Args:
        name: scenario name.

    Returns:
        The scenario.

    Raises:
        UnknownTargetError: if the name is not known.
    """
    try:
        return SCENARIOS[name]()
    except KeyError as exc:
        raise UnknownTargetError(
            f"unknown scenario {name!r}, expected one of {sorted(SCENARIOS)}"
        ) from exc


def run_scenario(
    scenario: Scenario, horizon: int | None = None
) -> tuple[Trajectory, Regularizer, MethodConfig]:
    """Run a scenario.

    Args:
        scenario: the scenario.
        horizon: overrides the scenario's horizon.

    Returns:
        The trajectory with the regularizer and config that produced it.
    """
    h = scenario.regularizer()
    cfg = scenario.method(horizon)
    return run(scenario.problem, h, cfg), h, cfg


def matches(stated: Regime, fit: RateFit, tolerance: float) -> bool:
    """Compare a fitted regime with a stated one.

    Args:
        stated: the stated regime.
        fit: the fit.
        tolerance: accepted deviation of the parameter.

    Returns:
        Whether the kinds agree and the parameters are within tolerance.
    """
    if stated.kind != fit.regime.kind:
        return False
    if stated.parameter is None or fit.parameter is None:
        return True
    return abs(stated.parameter - fit.parameter) <= tolerance


class TargetRow(typing.NamedTuple):
    """One line of a reproduction table.

    Attributes:
        scenario: scenario name.
        kernel: kernel name.
        exponent: analytic Legendre exponent at the solution.
        predicted: regime predicted by the theory.
        fitted: regime fitted on the run.
        stated: the known regime of the run.
        passed: whether the fit matches the stated regime.
    """

    scenario: str
    kernel: str
    exponent: float
    predicted: Regime
    fitted: Regime
    stated: Regime
    passed: bool


TARGET_HEADER = [
    "scenario",
    "kernel",
    "analytic_exponent",
    "predicted_regime",
    "fitted_regime",
    "fitted_parameter",
    "stated_regime",
    "passed",
]

BOUNDARY_SCENARIOS = (
    "euclidean-boundary",
    "entropy-boundary",
    "tsallis-boundary",
    "hellinger-boundary",
)
SHARP_SCENARIOS = ("euclidean-sharp", "entropy-sharp", "tsallis-sharp", "hellinger-sharp")


def _distance_fit(scenario: Scenario, traj: Trajectory, h: Regularizer) -> RateFit:
    """Fit the decay of ‖X_t − x*‖.

    Args:
        scenario: the scenario.
        traj: its trajectory.
        h: its regularizer.

    Returns:
        The fit.
    """
    return fit_rate(typing.cast(np.ndarray, traj.distance), allow_finite_time=not h.kernel.steep)


def _write_series(path: pathlib.Path, traj: Trajectory) -> None:
    """Write distance and divergence with their base-10 logarithms.

    Args:
        path: output file.
        traj: the trajectory.
    """
    distance = typing.cast(np.ndarray, traj.distance)
    divergence = typing.cast(np.ndarray, traj.divergence)
    with np.errstate(divide="ignore"):
        columns = [distance, np.log10(distance), divergence, np.log10(divergence)]
    with path.open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(["t", "distance", "log10_distance", "divergence", "log10_divergence"])
        for t in range(len(traj)):
            writer.writerow([str(t + 1)] + [repr(float(c[t])) for c in columns])


def _boundary_row(name: str, horizon: int | None, out: pathlib.Path | None) -> TargetRow:
    """Run a boundary scenario and compare it with the generic theory.

    Args:
        name: scenario name.
        horizon: horizon override.
        out: directory receiving the series, None to skip writing.

    Returns:
        The table row.
    """
    scenario = get_scenario(name)
    traj, h, cfg = run_scenario(scenario, horizon)
    if out is not None:
        _write_series(out / f"{name}.csv", traj)
    solution = typing.cast(np.ndarray, scenario.problem.solution)
    prediction = predict_rate_general(scenario.problem, h, cfg)
    fit = _distance_fit(scenario, traj, h)
    return TargetRow(
        name,
        h.kernel.name,
        legendre_exponent_analytic(h, solution),
        typing.cast(Regime, prediction.norm),
        fit.regime,
        scenario.stated,
        matches(scenario.stated, fit, scenario.tolerance),
    )


def _sharp_row(name: str, horizon: int | None) -> TargetRow:
    """Run a sharp scenario and compare it with the sharp theory.

    Args:
        name: scenario name.
        horizon: horizon override.

    Returns:
        The table row.
    """
    scenario = get_scenario(name)
    traj, h, cfg = run_scenario(scenario, horizon)
    problem = scenario.problem
    solution = typing.cast(np.ndarray, problem.solution)
    profile = classify_solution(problem.domain, problem.field, solution)
    prediction = predict_rate_sharp(profile, h, cfg)
    fit = _distance_fit(scenario, traj, h)
    return TargetRow(
        name,
        h.kernel.name,
        legendre_exponent_analytic(h, solution),
        typing.cast(Regime, prediction.norm),
        fit.regime,
        scenario.stated,
        matches(scenario.stated, fit, scenario.tolerance),
    )


def reproduce_trajectories(
    out: pathlib.Path | None, horizon: int | None = None
) -> list[TargetRow]:
    """Run the four boundary scenarios and write their series.

    Args:
        out: output directory.
        horizon: horizon override.

    Returns:
        One row per scenario; only the Euclidean run is linear on semilog axes.
    """
    return [_boundary_row(name, horizon, out) for name in BOUNDARY_SCENARIOS]


def reproduce_legendre_rates(
    out: pathlib.Path | None, horizon: int | None = None
) -> list[TargetRow]:
    """Compare the generic rate theory with the boundary runs.

    Args:
        out: unused, the table is written by the caller.
        horizon: horizon override.

    Returns:
        One row per kernel.
    """
    del out
    return [_boundary_row(name, horizon, None) for name in BOUNDARY_SCENARIOS]


def reproduce_sharp_rates(out: pathlib.Path | None, horizon: int | None = None) -> list[TargetRow]:
    """Compare the sharp rate theory with the sharp runs.

    Args:
        out: unused, the table is written by the caller.
        horizon: horizon override.

    Returns:
        One row per kernel.
    """
    del out
    return [_sharp_row(name, horizon) for name in SHARP_SCENARIOS]


TARGETS: dict[str, typing.Callable[[pathlib.Path | None, int | None], list[TargetRow]]] = {
    "trajectories": reproduce_trajectories,
    "legendre-rates": reproduce_legendre_rates,
    "sharp-rates": reproduce_sharp_rates,
}

# short names accepted in place of the target names
TARGET_ALIASES = {"fig1": "trajectories", "table1": "legendre-rates", "table2": "sharp-rates"}


def reproduce(target: str, out: pathlib.Path, horizon: int | None = None) -> list[TargetRow]:
    """Run a reproduction target and write its table to ``<target name>.csv``.

    Args:
        target: target name or one of its aliases ``fig1``, ``table1`` and ``table2``.
        out: output directory, created when missing.
        horizon: horizon override.

    Returns:
        The table rows.

    Raises:
        UnknownTargetError: if the target is not known.
    """
    target = TARGET_ALIASES.get(target, target)
    if target not in TARGETS:
        raise UnknownTargetError(
            f"unknown target {target!r}, expected one of {sorted(TARGETS | TARGET_ALIASES)}"
        )
    out.mkdir(parents=True, exist_ok=True)
    rows = TARGETS[target](out, horizon)
    with (out / f"{target}.csv").open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(TARGET_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.scenario,
                    row.kernel,
                    repr(row.exponent),
                    str(row.predicted),
                    row.fitted.kind,
                    "nan" if row.fitted.parameter is None else repr(row.fitted.parameter),
                    str(row.stated),
                    "pass" if row.passed else "fail",
                ]
            )
    for row in rows:
        log = logger.info if row.passed else logger.warning
        log("%s: fitted %s, stated %s", row.scenario, row.fitted, row.stated)
    return rows
