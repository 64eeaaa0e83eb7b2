# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

# pylint: disable=missing-function-docstring

"""Scenario and reproduction target unit tests."""

import csv
import pathlib

import numpy as np
import pytest

from analysis import RateFit, Regime
from domains import classify_solution
from exceptions import UnknownTargetError
from scenarios import SCENARIOS, get_scenario, matches, reproduce, run_scenario


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_scenarios_are_consistent(name: str):
    """
    arrange: given a named scenario.
    act: build it and classify its solution.
    assert: the start and the solution are feasible and x* solves the problem.
    """
    scenario = get_scenario(name)
    problem = scenario.problem
    assert problem.solution is not None
    assert problem.domain.contains(np.asarray(scenario.init))
    profile = classify_solution(problem.domain, problem.field, problem.solution)
    assert profile.solution.tolist() == problem.solution.tolist()
    assert scenario.regularizer().dim == problem.domain.dim


def test_unknown_scenario():
    """
    arrange: given an unknown scenario name.
    act: look it up.
    assert: UnknownTargetError is raised.
    """
    with pytest.raises(UnknownTargetError):
        get_scenario("nowhere")


@pytest.mark.parametrize(
    "stated,fitted,tolerance,expected",
    [
        pytest.param(Regime("geometric", 0.9), Regime("geometric", 0.9005), 1e-3, True, id="ok"),
        pytest.param(Regime("geometric", 0.9), Regime("geometric", 0.91), 1e-3, False, id="far"),
        pytest.param(Regime("power", -1.0), Regime("geometric", 0.9), 1.0, False, id="kind"),
        pytest.param(Regime("finite_time"), Regime("finite_time", 5.0), 0.0, True, id="finite"),
    ],
)
def test_matches(stated: Regime, fitted: Regime, tolerance: float, expected: bool):
    """
    arrange: given a stated regime and a fit.
    act: compare them.
    assert: kinds must agree and parameters must be within tolerance.
    """
    fit = RateFit(fitted, 0.0, (1, 100), 1.0)
    assert matches(stated, fit, tolerance) is expected


def test_euclidean_boundary_run():
    """
    arrange: given Euclidean mirror descent on F(x) = x from 0.5.
    act: run the scenario.
    assert: X_t = 0.5·0.9^(t−1) until the divergence drops below 1e-28.
    """
    traj, _, _ = run_scenario(get_scenario("euclidean-boundary"))
    assert traj.termination == "converged-to-precision"
    expected = 0.5 * 0.9 ** np.arange(len(traj))
    assert traj.base[:, 0] == pytest.approx(expected, rel=1e-9)
    assert traj.divergence is not None
    assert traj.divergence[1:] / traj.divergence[:-1] == pytest.approx(0.81, abs=1e-6)


def test_euclidean_sharp_run_terminates():
    """
    arrange: given Euclidean mirror descent on F(x) = x + 1 from 0.5.
    act: run the scenario.
    assert: the fifth state sits exactly on the boundary.
    """
    traj, _, _ = run_scenario(get_scenario("euclidean-sharp"))
    assert traj.base[:4, 0] == pytest.approx([0.5, 0.35, 0.215, 0.0935])
    assert traj.base[4, 0] == 0.0
    assert traj.termination == "converged-to-precision"


def test_reproduce_trajectories(tmp_path: pathlib.Path):
    """
    arrange: given a short horizon.
    act: reproduce the boundary trajectories.
    assert: the table and one series per kernel are written.
    """
    rows = reproduce("trajectories", tmp_path, horizon=300)
    assert [row.scenario for row in rows] == [
        "euclidean-boundary",
        "entropy-boundary",
        "tsallis-boundary",
        "hellinger-boundary",
    ]
    with (tmp_path / "trajectories.csv").open(encoding="utf-8") as stream:
        table = list(csv.reader(stream))
    assert table[0][0] == "scenario"
    assert len(table) == 5
    for row in rows:
        series = (tmp_path / f"{row.scenario}.csv").read_text(encoding="utf-8").splitlines()
        assert series[0] == "t,distance,log10_distance,divergence,log10_divergence"
    assert rows[0].passed
    assert rows[0].predicted.kind == "geometric"
    assert rows[1].predicted == Regime("power", -1.0)


def test_reproduce_sharp_rates_finite_time(tmp_path: pathlib.Path):
    """
    arrange: given a short horizon.
    act: reproduce the sharp rate table.
    assert: the Euclidean run is predicted and fitted as finite time.
    """
    rows = reproduce("sharp-rates", tmp_path, horizon=500)
    euclidean = rows[0]
    assert euclidean.predicted == Regime("finite_time")
    assert euclidean.fitted == Regime("finite_time", 5.0)
    assert euclidean.passed


def test_reproduce_unknown_target(tmp_path: pathlib.Path):
    """
    arrange: given an unknown target.
    act: reproduce it.
    assert: UnknownTargetError is raised and nothing is written.
    """
    with pytest.raises(UnknownTargetError):
        reproduce("figures", tmp_path / "out")
    assert not (tmp_path / "out").exists()


def test_reproduce_table_alias(tmp_path: pathlib.Path):
    """
    arrange: given the short name of the generic rate table and a short horizon.
    act: reproduce it.
    assert: the four boundary kernels are listed with their analytic exponents.
    """
    rows = reproduce("table1", tmp_path, horizon=300)
    assert [row.exponent for row in rows] == [0.0, 0.5, 0.75, 0.75]
    assert (tmp_path / "legendre-rates.csv").exists()
