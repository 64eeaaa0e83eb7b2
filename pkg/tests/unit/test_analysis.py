# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

# pylint: disable=missing-function-docstring

"""Rate prediction, rate fitting and oracle unit tests."""

import math
import pathlib

import numpy as np
import pytest

from analysis import (
    CoordinateReport,
    RateFit,
    Regime,
    estimate_legendre_exponent,
    fit_rate,
    general_bound_sequence,
    general_exponents,
    oracle_basicnum,
    oracle_polyak,
    predict_rate_general,
    predict_rate_sharp,
    report_rows,
    write_report,
)
from domains import Domain, SolutionProfile, classify_solution
from exceptions import InsufficientDataError, InvalidStepError
from kernels import Regularizer, make_kernel
from solver import AffineField, MethodConfig, Problem, run


@pytest.fixture(name="mixed_profile")
def mixed_profile_fixture() -> SolutionProfile:
    """Classify x* = (0, 0, 1) for F(x) = x − (−0.4, 0, 1) on the simplex."""
    field = AffineField.shifted_identity([-0.4, 0.0, 1.0])
    return classify_solution(Domain.simplex(3), field, [0.0, 0.0, 1.0])


@pytest.fixture(name="sharp_profile")
def sharp_profile_fixture() -> SolutionProfile:
    """Classify x* = (0, 0, 1) for F(x) = x − (−0.4, −0.2, 1) on the simplex."""
    field = AffineField.shifted_identity([-0.4, -0.2, 1.0])
    return classify_solution(Domain.simplex(3), field, [0.0, 0.0, 1.0])


@pytest.mark.parametrize(
    "alpha,expected",
    [
        pytest.param(0.5, (-1.0, -1.0), id="entropy"),
        pytest.param(0.75, (-1.0 / 3.0, -2.0 / 3.0), id="tsallis"),
    ],
)
def test_general_exponents(alpha: float, expected: tuple[float, float]):
    """
    arrange: given a Legendre exponent.
    act: compute the power exponents.
    assert: they are 1 − 1/α for the divergence and −1/(2α) for the norm.
    """
    assert general_exponents(alpha) == pytest.approx(expected)


def test_general_exponents_slow_down_with_alpha():
    """
    arrange: given a grid of Legendre exponents in (0, 1).
    act: compute the power exponents.
    assert: both are negative and strictly increase with α.
    """
    exponents = np.array([general_exponents(alpha) for alpha in np.linspace(0.05, 0.95, 19)])
    assert np.all(exponents < 0)
    assert np.all(np.diff(exponents, axis=0) > 0)


def test_predict_rate_general_is_monotone_in_alpha():
    """
    arrange: given F(x) = x on [0, 1] and kernels with α* = 0, 1/4, 1/2 and 3/4 at 0.
    act: predict the generic rate for each kernel.
    assert: α* = 0 is geometric and the power exponents get slower as α* grows.
    """
    dom = Domain.interval(0.0, 1.0)
    prob = Problem(
        dom, AffineField.shifted_identity([0.0]), lipschitz=1.0, solution=[0.0], strong=1.0
    )
    cfg = MethodConfig.preset("md", gamma=0.1, horizon=100, init=(0.5,))
    predictions = [
        predict_rate_general(prob, Regularizer(make_kernel(kernel), dom), cfg)
        for kernel in ("euclidean", "tsallis:q=1.5", "entropy", "tsallis:q=0.5")
    ]
    assert [p.constants["alpha"] for p in predictions] == pytest.approx([0.0, 0.25, 0.5, 0.75])
    assert predictions[0].regime.kind == "geometric"
    powers = [p.regime.parameter for p in predictions[1:]]
    norms = [p.norm.parameter for p in predictions[1:] if p.norm is not None]
    assert powers == pytest.approx([-3.0, -1.0, -1.0 / 3.0])
    assert norms == pytest.approx([-2.0, -1.0, -2.0 / 3.0])


def test_fit_rate_geometric():
    """
    arrange: given s_t = 0.9^t.
    act: fit the rate.
    assert: a geometric factor of 0.9 is found on the post burn-in window.
    """
    fit = fit_rate(0.9 ** np.arange(1, 1001, dtype=float))
    assert fit.regime.kind == "geometric"
    assert fit.parameter == pytest.approx(0.9, rel=1e-9)
    assert fit.window == (201, 1000)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_rate_power():
    """
    arrange: given s_t = t^(−2).
    act: fit the rate.
    assert: a power exponent of −2 is found.
    """
    fit = fit_rate(np.arange(1, 1001, dtype=float) ** -2.0)
    assert fit.regime.kind == "power"
    assert fit.parameter == pytest.approx(-2.0, rel=1e-9)


def test_fit_rate_finite_time():
    """
    arrange: given a series that reaches exactly 0 at its fifth value.
    act: fit the rate with and without finite-time detection.
    assert: finite time is reported at t = 5, otherwise the data is insufficient.
    """
    series = np.r_[[1.0, 0.5, 0.25, 0.125], np.zeros(200)]
    fit = fit_rate(series)
    assert fit.regime == Regime("finite_time", 5.0)
    with pytest.raises(InsufficientDataError):
        fit_rate(series, allow_finite_time=False)


def test_fit_rate_trims_underflow():
    """
    arrange: given a geometric series that underflows below 1e-300.
    act: fit the rate.
    assert: the window ends before the first underflowed value.
    """
    series = 0.5 ** np.arange(1, 2001, dtype=float)
    fit = fit_rate(series)
    assert fit.window[1] == 996
    assert fit.parameter == pytest.approx(0.5, rel=1e-9)


def test_fit_rate_insufficient_data():
    """
    arrange: given a 50-value series.
    act: fit the rate.
    assert: InsufficientDataError is raised.
    """
    with pytest.raises(InsufficientDataError):
        fit_rate(np.linspace(1.0, 0.5, 50))


@pytest.mark.parametrize(
    "a,r",
    [
        pytest.param(0.1, 1.0, id="order one"),
        pytest.param(0.1, 0.5, id="order one half"),
        pytest.param(0.05, 2.0, id="order two"),
    ],
)
def test_oracle_basicnum_normalized(a: float, r: float):
    """
    arrange: given the explicit recursion s − a s^(1+r) from s_0 = 1.
    act: iterate it 10⁴ times.
    assert: s_t (a r t)^(1/r) approaches 1.
    """
    sequence = oracle_basicnum(a, r, 1.0, 10_000)
    assert math.isnan(sequence.normalized[0])
    assert sequence.normalized[-1] == pytest.approx(1.0, abs=0.05)
    assert np.all(np.diff(sequence.values) < 0)


def test_oracle_basicnum_resolvent_is_exact():
    """
    arrange: given the resolvent recursion with a = 0.1, r = 1/2 and s_0 = 1.
    act: iterate it 100 times.
    assert: s_t^(−r) = s_0^(−r) + a r t.
    """
    sequence = oracle_basicnum(0.1, 0.5, 1.0, 100, resolvent=True)
    assert sequence.values[-1] == pytest.approx(1.0 / 36.0, rel=1e-12)


@pytest.mark.parametrize(
    "a,r,s0",
    [
        pytest.param(-0.1, 1.0, 1.0, id="negative coefficient"),
        pytest.param(0.1, 0.0, 1.0, id="zero order"),
        pytest.param(1.0, 1.0, 0.5, id="start too large"),
    ],
)
def test_oracle_basicnum_invalid(a: float, r: float, s0: float):
    """
    arrange: given out-of-range recursion parameters.
    act: iterate the recursion.
    assert: a ValueError is raised.
    """
    with pytest.raises(ValueError):
        oracle_basicnum(a, r, s0, 10)


@pytest.mark.parametrize("r", [0.5, 1.0])
def test_oracle_polyak_bounds_recursion(r: float, rng: np.random.Generator):
    """
    arrange: given d_{t+1} = d_t − ρ_t d_t^(1+r) with random ρ_t in [0, 0.2].
    act: compute the closed-form bound.
    assert: every iterate lies below the bound.
    """
    rho = rng.uniform(0.0, 0.2, size=500)
    d = np.empty(501)
    d[0] = 1.0
    for t, coefficient in enumerate(rho):
        d[t + 1] = d[t] - coefficient * d[t] ** (1.0 + r)
    bound = oracle_polyak(1.0, rho, r)
    assert np.all(d <= bound * (1 + 1e-12))


def test_oracle_polyak_invalid():
    """
    arrange: given a negative coefficient.
    act: compute the bound.
    assert: a ValueError is raised.
    """
    with pytest.raises(ValueError):
        oracle_polyak(1.0, [0.1, -0.1], 1.0)


def test_predict_rate_general_power(boundary_problem: Problem, entropy_half_line: Regularizer):
    """
    arrange: given entropic mirror descent towards the boundary point 0.
    act: predict the generic rate.
    assert: D decays as t^(−1) and the norm as t^(−1).
    """
    cfg = MethodConfig.preset("md", gamma=0.1, horizon=100, init=(0.5,))
    prediction = predict_rate_general(boundary_problem, entropy_half_line, cfg)
    assert prediction.regime == Regime("power", -1.0)
    assert prediction.norm == Regime("power", -1.0)
    assert prediction.constants["alpha"] == 0.5
    assert prediction.constants["d1"] == pytest.approx(0.5)
    assert 0 < prediction.constants["C"]


def test_predict_rate_general_geometric(boundary_problem: Problem):
    """
    arrange: given Euclidean mirror descent towards the boundary point 0.
    act: predict the generic rate.
    assert: D contracts by 1 − μγ/(2β) with β = 1.
    """
    h = Regularizer(make_kernel("euclidean"), Domain.interval())
    cfg = MethodConfig.preset("md", gamma=0.1, horizon=100, init=(0.5,))
    prediction = predict_rate_general(boundary_problem, h, cfg)
    assert prediction.regime.kind == "geometric"
    assert prediction.regime.parameter == pytest.approx(0.95, rel=1e-6)
    assert prediction.norm is not None
    assert prediction.norm.parameter == pytest.approx(math.sqrt(0.95), rel=1e-6)


def test_predict_rate_general_invalid_step(
    boundary_problem: Problem, entropy_half_line: Regularizer
):
    """
    arrange: given a step above the golden-ratio cap.
    act: predict the generic rate.
    assert: InvalidStepError is raised.
    """
    cfg = MethodConfig.preset("md", gamma=0.5, horizon=100, init=(0.5,))
    with pytest.raises(InvalidStepError):
        predict_rate_general(boundary_problem, entropy_half_line, cfg)


@pytest.mark.parametrize("kernel", ["euclidean", "entropy"])
def test_general_bound_dominates_run(boundary_problem: Problem, kernel: str):
    """
    arrange: given mirror descent towards the boundary point 0.
    act: run the method and evaluate the explicit bound.
    assert: D(x*, X_t) never exceeds the bound.
    """
    h = Regularizer(make_kernel(kernel), Domain.interval())
    cfg = MethodConfig.preset("md", gamma=0.1, horizon=500, init=(0.5,), stop_tolerance=None)
    traj = run(boundary_problem, h, cfg)
    bound = general_bound_sequence(boundary_problem, h, cfg)
    assert traj.divergence is not None
    assert bound[0] == pytest.approx(traj.divergence[0])
    assert np.all(traj.divergence <= bound * (1 + 1e-9))


def test_predict_rate_sharp_mixed(mixed_profile: SolutionProfile, entropy_simplex: Regularizer):
    """
    arrange: given entropy and a solution with one sharp and one flat coordinate.
    act: predict the sharp rates.
    assert: only the sharp coordinate is predicted, geometric at e^(−γδ_eff/2).
    """
    cfg = MethodConfig.preset("md", gamma=0.1, horizon=100, init=(0.2, 0.3, 0.5))
    prediction = predict_rate_sharp(mixed_profile, entropy_simplex, cfg)
    delta_eff = 0.4 / (2.0 * math.sqrt(6.0))
    assert prediction.source == "thm_sharp"
    assert prediction.norm is None
    assert prediction.coordinates is not None
    assert list(prediction.coordinates) == [0]
    assert prediction.coordinates[0].kind == "geometric"
    assert prediction.coordinates[0].parameter == pytest.approx(math.exp(-0.05 * delta_eff))


@pytest.mark.parametrize(
    "kernel,expected",
    [
        pytest.param("euclidean", Regime("finite_time"), id="euclidean"),
        pytest.param("entropy", Regime("geometric", math.exp(-0.01)), id="entropy"),
        pytest.param("tsallis:q=0.5", Regime("power", -2.0), id="tsallis"),
    ],
)
def test_predict_rate_sharp_extreme(sharp_profile: SolutionProfile, kernel: str, expected: Regime):
    """
    arrange: given a sharp extreme solution with δ_eff = 0.2.
    act: predict the sharp rates.
    assert: the whole iterate follows the boundary class of the kernel.
    """
    h = Regularizer(make_kernel(kernel), Domain.simplex(3))
    cfg = MethodConfig.preset("md", gamma=0.1, horizon=100, init=(0.2, 0.3, 0.5))
    prediction = predict_rate_sharp(sharp_profile, h, cfg)
    assert prediction.source == "corollary_sharp"
    assert prediction.norm is not None
    assert prediction.norm.kind == expected.kind
    if expected.parameter is None:
        assert prediction.norm.parameter is None
    else:
        assert prediction.norm.parameter == pytest.approx(expected.parameter)


@pytest.mark.parametrize(
    "kernel,point,expected",
    [
        pytest.param("euclidean", [0.0], 0.0, id="euclidean"),
        pytest.param("entropy", [0.0], 0.5, id="entropy boundary"),
        pytest.param("entropy", [0.5], 0.0, id="entropy interior"),
    ],
)
def test_estimate_legendre_exponent(kernel: str, point: list, expected: float):
    """
    arrange: given a regularizer on the half line and a point.
    act: estimate the Legendre exponent numerically.
    assert: the estimate is within 0.05 of the analytic value.
    """
    h = Regularizer(make_kernel(kernel), Domain.interval())
    assert estimate_legendre_exponent(h, point) == pytest.approx(expected, abs=0.05)


def test_write_report(tmp_path: pathlib.Path):
    """
    arrange: given a coordinate report and a whole-iterate report.
    act: write the report CSV.
    assert: coordinates are 1-based and the whole iterate is labelled all.
    """
    fit = RateFit(Regime("geometric", 0.9), 0.0, (201, 1000), 1.0)
    reports = [
        CoordinateReport(0, fit, Regime("finite_time"), "thm_sharp"),
        CoordinateReport(None, fit, Regime("geometric", 0.9), "thm_general"),
    ]
    rows = list(report_rows(reports))
    assert rows[0][:3] == ["1", "finite_time", "nan"]
    assert rows[1][:3] == ["all", "geometric", "0.9"]
    path = tmp_path / "rates.csv"
    write_report(reports, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("coordinate,regime_predicted")
    assert len(lines) == 3
