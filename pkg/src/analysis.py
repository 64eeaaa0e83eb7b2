# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Predicted and measured last-iterate convergence rates."""

import csv
import logging
import math
import pathlib
import typing

import numpy as np
import scipy.stats

from domains import SolutionProfile
from exceptions import (
    DivergenceError,
    InsufficientDataError,
    InvalidStepError,
    NotDecomposableError,
)
from kernels import Regularizer, legendre_constant, legendre_exponent_analytic, legendre_slopes
from solver import MethodConfig, Problem, Trajectory, validate_step

logger = logging.getLogger(__name__)

MIN_FIT_LENGTH = 100
GEOMETRIC_R2 = 0.999
UNDERFLOW_FLOOR = 1e-300

REPORT_HEADER = [
    "coordinate",
    "regime_predicted",
    "param_predicted",
    "regime_fitted",
    "param_fitted",
    "window_lo",
    "window_hi",
    "r2",
]


class Regime(typing.NamedTuple):
    """A convergence regime.

    Attributes:
        kind: ``geometric``, ``power``, ``finite_time`` or ``per_coordinate``.
        parameter: the factor of a geometric regime or the exponent of a power one.
    """

    kind: str
    parameter: float | None = None

    def __str__(self) -> str:
        """Render the regime.

        Returns:
            The kind with its parameter.
        """
        if self.parameter is None:
            return self.kind
        return f"{self.kind}({self.parameter:.6g})"


FINITE_TIME = Regime("finite_time")


class RatePrediction(typing.NamedTuple):
    """A rate predicted by a convergence theorem.

    Only the regime and its leading factor or exponent are predicted; the
    multiplicative constants of the bounds are not compared against runs.

    Attributes:
        regime: the regime of D(x*, X_t), or ``per_coordinate``.
        source: ``thm_general``, ``thm_sharp`` or ``corollary_sharp``.
        constants: the instantiated constants of the bound.
        norm: the regime of ‖X_t − x*‖, or of the whole iterate for sharp solutions.
        coordinates: the regime of |X_{t,i} − x*_i| per sharp coordinate.
    """

    regime: Regime
    source: str
    constants: dict[str, float]
    norm: Regime | None = None
    coordinates: dict[int, Regime] | None = None


class RateFit(typing.NamedTuple):
    """A rate measured on a series.

    Attributes:
        regime: the detected regime with its fitted parameter.
        stderr: standard error of the parameter.
        window: first and last 1-based index used by the fit.
        r_squared: coefficient of determination of the regression.
    """

    regime: Regime
    stderr: float
    window: tuple[int, int]
    r_squared: float

    @property
    def parameter(self) -> float | None:
        """The fitted factor or exponent."""
        return self.regime.parameter


class CoordinateReport(typing.NamedTuple):
    """Measured and predicted rate of one active coordinate.

    Attributes:
        coordinate: the 0-based coordinate index, None for the whole iterate.
        fit: the fitted rate.
        predicted: the predicted regime.
        source: the theorem the prediction comes from.
    """

    coordinate: int | None
    fit: RateFit
    predicted: Regime
    source: str


def general_exponents(alpha: float) -> tuple[float, float]:
    """Return the power exponents of the divergence and of the norm.

    Args:
        alpha: Legendre exponent in (0, 1).

    Returns:
        The exponents 1 − 1/α and −1/(2α).
    """
    return 1.0 - 1.0 / alpha, -1.0 / (2.0 * alpha)


def _general_constants(
    prob: Problem,
    h: Regularizer,
    cfg: MethodConfig,
    beta: float | None,
    d1: float | None,
) -> dict[str, float]:
    """Instantiate α*, β, μ, γ, D_1 and, for α* > 0, C and κ.

    Args:
        prob: the problem, with known solution and strong modulus.
        h: the regularizer.
        cfg: the method config.
        beta: Legendre constant, measured on the ball through X_1 when omitted.
        d1: D(x*, X_1), computed when omitted.

    Returns:
        The constants.

    Raises:
        ValueError: if x* or μ is unknown or the Legendre exponent is 1.
        InvalidStepError: if the step conditions fail.
    """
    if prob.solution is None or prob.strong is None:
        raise ValueError(f"{prob.name} needs a known solution and strong modulus")
    solution = prob.solution
    alpha = legendre_exponent_analytic(h, solution)
    if alpha >= 1:
        raise ValueError("no rate is available for a Legendre exponent of 1")
    init = np.asarray(cfg.init, dtype=float)
    if d1 is None:
        d1 = h.divergence(solution, init)
    if beta is None:
        radius = max(float(np.linalg.norm(init - solution)), 1e-6)
        beta = legendre_constant(h, solution, radius, alpha=alpha)
    report = validate_step(cfg, prob, beta)
    if not report.valid:
        failed = sorted(name for name, steps in report.violations.items() if steps)
        raise InvalidStepError(f"step size violates the conditions {', '.join(failed)}")
    constants = {
        "alpha": alpha,
        "beta": beta,
        "mu": prob.strong,
        "gamma": cfg.step_size(1),
        "d1": d1,
    }
    if alpha > 0:
        kappa = alpha / (1.0 - alpha)
        with np.errstate(divide="ignore"):
            denominator = max(
                2.0 * beta ** (1.0 / (1.0 - alpha)) * float(np.power(d1, -kappa)), 2.0**kappa
            )
        constants["kappa"] = kappa
        constants["C"] = kappa / denominator
    return constants


def predict_rate_general(
    prob: Problem,
    h: Regularizer,
    cfg: MethodConfig,
    *,
    beta: float | None = None,
    d1: float | None = None,
) -> RatePrediction:
    """Predict the rate of D(x*, X_t) and ‖X_t − x*‖ from the Legendre exponent at x*.

    Args:
        prob: the problem, with known solution and strong modulus.
        h: the regularizer.
        cfg: the method config.
        beta: Legendre constant at x*.
        d1: D(x*, X_1).

    Returns:
        Geometric rates for α* = 0, power rates otherwise.
    """
    constants = _general_constants(prob, h, cfg, beta, d1)
    alpha = constants["alpha"]
    if alpha == 0:
        factor = 1.0 - constants["mu"] * constants["gamma"] / (2.0 * constants["beta"])
        return RatePrediction(
            Regime("geometric", factor),
            "thm_general",
            constants,
            norm=Regime("geometric", math.sqrt(factor)),
        )
    divergence_exponent, norm_exponent = general_exponents(alpha)
    return RatePrediction(
        Regime("power", divergence_exponent),
        "thm_general",
        constants,
        norm=Regime("power", norm_exponent),
    )


def general_bound_sequence(
    prob: Problem,
    h: Regularizer,
    cfg: MethodConfig,
    *,
    beta: float | None = None,
    d1: float | None = None,
) -> np.ndarray:
    """Evaluate the explicit upper bound on D(x*, X_t) for t = 1..T.

    Variable steps enter through the products Π(1 − μγ_s/(2β)) when α* = 0 and
    through the partial sums Σγ_s otherwise.

    Args:
        prob: the problem, with known solution and strong modulus.
        h: the regularizer.
        cfg: the method config.
        beta: Legendre constant at x*.
        d1: D(x*, X_1).

    Returns:
        The bound sequence, starting at D_1.
    """
    constants = _general_constants(prob, h, cfg, beta, d1)
    gammas = cfg.steps(cfg.horizon - 1)
    mu, d1 = constants["mu"], constants["d1"]
    bound = np.empty(cfg.horizon)
    bound[0] = d1
    if constants["alpha"] == 0:
        bound[1:] = d1 * np.cumprod(1.0 - mu * gammas / (2.0 * constants["beta"]))
    else:
        exponent = 1.0 - 1.0 / constants["alpha"]
        bound[1:] = d1 * np.power(1.0 + constants["C"] * mu * np.cumsum(gammas), exponent)
    return bound


def _sharp_regime(h: Regularizer, delta_eff: float, gamma: float) -> Regime:
    """Map the boundary class of the kernel to the regime of a sharp coordinate.

    Args:
        h: the regularizer.
        delta_eff: the effective sharpness.
        gamma: the step size.

    Returns:
        The regime.

    Raises:
        NotDecomposableError: if the kernel declares no boundary class.
    """
    boundary_class = h.kernel.boundary_class
    if boundary_class is None:
        raise NotDecomposableError(f"kernel {h.kernel.name} declares no boundary class")
    if boundary_class.kind == "euclidean_like":
        return FINITE_TIME
    if boundary_class.kind == "entropy_like":
        return Regime("geometric", math.exp(-gamma * delta_eff / 2.0))
    return Regime("power", -1.0 / typing.cast(float, boundary_class.nu))


def _slowest(regimes: typing.Iterable[Regime]) -> Regime:
    """Pick the slowest of several regimes.

    Args:
        regimes: the regimes.

    Returns:
        Power beats geometric beats finite time; ties keep the slowest parameter.
    """
    order = {"finite_time": 0, "geometric": 1, "power": 2}
    return max(regimes, key=lambda r: (order[r.kind], r.parameter or 0.0))


def predict_rate_sharp(
    profile: SolutionProfile, h: Regularizer, cfg: MethodConfig
) -> RatePrediction:
    """Predict the rate of each sharp coordinate from the kernel's boundary class.

    Euclidean-like kernels reach a sharp coordinate in finite time, entropy-like
    ones at a factor e^(−γδ_eff/2) and power-like(ν) ones at the exponent −1/ν.
    When x* is an extreme point with no flat coordinate the whole iterate follows
    the slowest coordinate.

    Args:
        profile: the sharpness profile of x*.
        h: the regularizer.
        cfg: the method config; variable schedules use their smallest step.

    Returns:
        A ``per_coordinate`` prediction.

    Raises:
        NotDecomposableError: if the kernel has no boundary class.
    """
    gamma = float(np.min(cfg.steps(max(cfg.horizon - 1, 1))))
    delta_eff = profile.delta_eff if profile.delta_eff is not None else 0.0
    coordinates = {i: _sharp_regime(h, delta_eff, gamma) for i in profile.sharps}
    if not coordinates and h.kernel.boundary_class is None:
        raise NotDecomposableError(f"kernel {h.kernel.name} declares no boundary class")
    constants = {"delta_eff": delta_eff, "gamma": gamma}
    if profile.separation_constant is not None:
        constants["separation_constant"] = profile.separation_constant
    nu = typing.cast(typing.Any, h.kernel.boundary_class).nu
    if nu is not None:
        constants["nu"] = nu
    if coordinates and profile.is_extreme and profile.is_field_sharp:
        whole = _slowest(coordinates.values())
        return RatePrediction(
            Regime("per_coordinate"), "corollary_sharp", constants, whole, coordinates
        )
    return RatePrediction(Regime("per_coordinate"), "thm_sharp", constants, None, coordinates)


def fit_rate(
    series: typing.Sequence[float] | np.ndarray,
    burn_in_fraction: float = 0.2,
    *,
    allow_finite_time: bool = True,
) -> RateFit:
    """Classify the decay of a positive series and fit its rate.

    A series whose tail is exactly zero converged in finite time. Otherwise the
    series is cut where it first drops below 1e-300, the burn-in is discarded and
    a semilog regression with R² ≥ 0.999 means geometric decay; anything else is
    fitted as a power law in t.

    Args:
        series: s_1, s_2, ...
        burn_in_fraction: share of the leading values to discard.
        allow_finite_time: whether an exact-zero tail may be read as finite time.

    Returns:
        The fit.

    Raises:
        InsufficientDataError: if fewer than 100 values remain.
    """
    values = np.asarray(series, dtype=float)
    zeros = np.flatnonzero(values == 0)
    if allow_finite_time and len(zeros) and zeros[0] > 0 and np.all(values[zeros[0] :] == 0):
        first = int(zeros[0])
        return RateFit(Regime("finite_time", float(first + 1)), 0.0, (1, first + 1), 1.0)
    small = np.flatnonzero(~(values > UNDERFLOW_FLOOR))
    if len(small):
        values = values[: small[0]]
    if len(values) < MIN_FIT_LENGTH:
        raise InsufficientDataError(
            f"{len(values)} usable values, at least {MIN_FIT_LENGTH} are needed"
        )
    start = int(burn_in_fraction * len(values))
    t = np.arange(start + 1, len(values) + 1, dtype=float)
    logs = np.log(values[start:])
    window = (start + 1, len(values))
    semilog = scipy.stats.linregress(t, logs)
    if semilog.rvalue**2 >= GEOMETRIC_R2:
        factor = math.exp(semilog.slope)
        return RateFit(
            Regime("geometric", factor), factor * semilog.stderr, window, semilog.rvalue**2
        )
    loglog = scipy.stats.linregress(np.log(t), logs)
    return RateFit(Regime("power", float(loglog.slope)), loglog.stderr, window, loglog.rvalue**2)


def estimate_legendre_exponent(
    h: Regularizer, p: typing.Sequence[float], radii: np.ndarray | None = None, seed: int = 0
) -> float:
    """Estimate the Legendre exponent at p from the decay of √D(p, x) near p.

    The exponent is one minus the smallest log-log slope over the coordinate
    directions and 32 random feasible directions.

    Args:
        h: the regularizer.
        p: a point of the domain.
        radii: relative geometric grid.
        seed: seed of the random directions.

    Returns:
        The estimate, clamped to [0, 1].
    """
    slopes = legendre_slopes(h, p, radii, seed)
    if not slopes:
        logger.warning("no feasible direction to estimate the Legendre exponent at %s", p)
        return 0.0
    return float(np.clip(1.0 - min(slopes), 0.0, 1.0))


class BasicSequence(typing.NamedTuple):
    """Iterates of s_{t+1} = s_t − a s_t^(1+r).

    Attributes:
        values: s_0, ..., s_T.
        normalized: s_t (a r t)^(1/r), with t = 0 mapped to nan.
    """

    values: np.ndarray
    normalized: np.ndarray


def oracle_basicnum(
    a: float, r: float, s0: float, T: int, *, resolvent: bool = False  # noqa: N803
) -> BasicSequence:
    """Iterate the scalar recursion behind the power-law rates.

    The explicit map is s − a s^(1+r). The resolvent map s (1 + a r s^r)^(−1/r)
    belongs to the same asymptotic class and solves s_t^(−r) = s_0^(−r) + a r t
    exactly.

    Args:
        a: nonnegative coefficient.
        r: positive order.
        s0: positive start.
        T: number of steps.
        resolvent: iterate the resolvent map instead of the explicit one.

    Returns:
        The iterates and their normalized products.

    Raises:
        ValueError: if the parameters are out of range or 1 − 2a s0^r ≤ 0.
        DivergenceError: if an iterate leaves (0, s0].
    """
    if a < 0 or r <= 0 or s0 <= 0 or T < 0:
        raise ValueError(f"invalid recursion parameters a={a}, r={r}, s0={s0}, T={T}")
    if 1.0 - 2.0 * a * s0**r <= 0:
        raise ValueError(f"start {s0} is too large for a={a}, r={r}")
    values = np.empty(T + 1)
    values[0] = s = s0
    for t in range(1, T + 1):
        s = s * (1.0 + a * r * s**r) ** (-1.0 / r) if resolvent else s - a * s ** (1.0 + r)
        if not 0 < s <= s0:
            raise DivergenceError(f"iterate {s} left (0, {s0}] at t = {t}")
        values[t] = s
    steps = np.arange(T + 1, dtype=float)
    normalized = values * np.power(a * r * steps, 1.0 / r)
    normalized[0] = math.nan
    return BasicSequence(values, normalized)


def oracle_polyak(
    d0: float, rho: typing.Sequence[float] | np.ndarray, r: float
) -> np.ndarray:
    """Bound any sequence with d_{t+1} ≤ d_t − ρ_t d_t^(1+r) from above.

    Args:
        d0: the first value.
        rho: the coefficients ρ_1, ρ_2, ...
        r: positive order.

    Returns:
        d0/(1 + r d0^r Σ_{s<t} ρ_s)^(1/r) for t = 1..len(rho) + 1.

    Raises:
        ValueError: if d0 or a coefficient is negative or r is not positive.
    """
    coefficients = np.asarray(rho, dtype=float)
    if d0 < 0 or r <= 0 or np.any(coefficients < 0):
        raise ValueError(f"invalid bound parameters d0={d0}, r={r}")
    sums = np.r_[0.0, np.cumsum(coefficients)]
    return d0 / np.power(1.0 + r * d0**r * sums, 1.0 / r)


def per_coordinate_report(
    traj: Trajectory,
    profile: SolutionProfile,
    h: Regularizer,
    cfg: MethodConfig,
    prob: Problem | None = None,
) -> list[CoordinateReport]:
    """Fit every active coordinate and pair it with its predicted regime.

    Sharp coordinates get the boundary-class prediction; flat coordinates get the
    norm rate of the generic theorem, which needs the problem.

    Args:
        traj: the trajectory.
        profile: the sharpness profile of x*.
        h: the regularizer.
        cfg: the method config.
        prob: the problem, required when there are flat coordinates.

    Returns:
        One report per active coordinate, in index order.

    Raises:
        ValueError: if flat coordinates exist and prob is omitted.
    """
    sharp = predict_rate_sharp(profile, h, cfg)
    coordinates = typing.cast(dict[int, Regime], sharp.coordinates)
    flat_prediction: RatePrediction | None = None
    if profile.flats:
        if prob is None:
            raise ValueError("flat coordinates need the problem for the generic prediction")
        flat_prediction = predict_rate_general(prob, h, cfg)
    reports = []
    for i in profile.active_set:
        series = traj.coordinate_series(i, profile.solution[i])
        fit = fit_rate(series, allow_finite_time=not h.kernel.steep)
        if i in coordinates:
            reports.append(CoordinateReport(i, fit, coordinates[i], sharp.source))
        else:
            prediction = typing.cast(RatePrediction, flat_prediction)
            reports.append(
                CoordinateReport(i, fit, typing.cast(Regime, prediction.norm), prediction.source)
            )
        logger.info("coordinate %d: predicted %s, fitted %s", i, reports[-1].predicted, fit.regime)
    return reports


def _format(value: float | None) -> str:
    """Format an optional float for the report.

    Args:
        value: the value.

    Returns:
        Its repr, or ``nan``.
    """
    return "nan" if value is None else repr(float(value))


def report_rows(reports: typing.Iterable[CoordinateReport]) -> typing.Iterator[list[str]]:
    """Yield the report CSV rows.

    Args:
        reports: coordinate reports.

    Yields:
        One row per report, coordinates 1-based and the whole iterate as ``all``.
    """
    for report in reports:
        yield [
            "all" if report.coordinate is None else str(report.coordinate + 1),
            report.predicted.kind,
            _format(report.predicted.parameter),
            report.fit.regime.kind,
            _format(report.fit.parameter),
            str(report.fit.window[0]),
            str(report.fit.window[1]),
            _format(report.fit.r_squared),
        ]


def write_report(reports: typing.Iterable[CoordinateReport], path: pathlib.Path) -> None:
    """Write the per-coordinate report CSV.

    Args:
        reports: coordinate reports.
        path: output file.
    """
    with path.open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(REPORT_HEADER)
        writer.writerows(report_rows(reports))
