# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Bregman proximal method iteration engine."""

import csv
import logging
import math
import pathlib
import typing

import numpy as np
import pydantic

from domains import Domain, VectorField
from kernels import Regularizer
from prox import prox

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (math.sqrt(5.0) + 1.0) / 2.0
DEFAULT_STOP_TOLERANCE = 1e-28
DEFAULT_HORIZON = 100_000
UNDERFLOW_THRESHOLD = 1e-300
DECREMENT_SLACK = 1e-9

PRESETS = {"md": (0.0, 0.0), "mp": (1.0, 0.0), "omd": (0.0, 1.0)}


class AffineField:
    """The vector field F(x) = Mx + q.

    Attributes:
        matrix: M.
        offset: q.
    """

    def __init__(self, matrix: np.ndarray, offset: np.ndarray):
        """Initialize the field.

        Args:
            matrix: square matrix M.
            offset: vector q.

        Raises:
            ValueError: if the shapes do not match.
        """
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.offset = np.atleast_1d(np.asarray(offset, dtype=float))
        n = self.offset.shape[0]
        if self.matrix.shape != (n, n):
            raise ValueError(f"field matrix {self.matrix.shape} does not match offset {n}")

    @classmethod
    def shifted_identity(cls, u: typing.Sequence[float]) -> "AffineField":
        """Build F(x) = x − u.

        Args:
            u: the shift.

        Returns:
            The field.
        """
        shift = np.atleast_1d(np.asarray(u, dtype=float))
        return cls(np.eye(len(shift)), -shift)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the field.

        Args:
            x: a point.

        Returns:
            Mx + q.
        """
        return self.matrix @ x + self.offset


class Problem:
    """A variational inequality over a feasible set.

    Attributes:
        domain: the feasible set.
        field: the vector field F.
        solution: the known solution x*, if any.
        lipschitz: Lipschitz modulus L of F.
        strong: strong monotonicity modulus μ around x*, if known.
        strong_radius: radius of the neighbourhood where μ is valid.
        name: a label used in logs and reports.
    """

    def __init__(  # pylint: disable=too-many-arguments
        self,
        domain: Domain,
        field: VectorField,
        *,
        lipschitz: float,
        solution: typing.Sequence[float] | None = None,
        strong: float | None = None,
        strong_radius: float = math.inf,
        name: str = "problem",
    ):
        """Initialize the problem.

        Args:
            domain: the feasible set.
            field: the vector field.
            lipschitz: Lipschitz modulus.
            solution: known solution.
            strong: strong monotonicity modulus.
            strong_radius: radius of validity of the strong modulus.
            name: label.

        Raises:
            ValueError: if a modulus is not positive.
        """
        if not lipschitz > 0:
            raise ValueError(f"lipschitz modulus must be positive, got {lipschitz}")
        if strong is not None and not strong > 0:
            raise ValueError(f"strong monotonicity modulus must be positive, got {strong}")
        self.domain = domain
        self.field = field
        self.solution = None if solution is None else domain.check_point(solution)
        self.lipschitz = float(lipschitz)
        self.strong = None if strong is None else float(strong)
        self.strong_radius = float(strong_radius)
        self.name = name

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the field at a point.

        Args:
            x: a feasible point.

        Returns:
            F(x) as a float array.
        """
        return np.asarray(self.field(x), dtype=float)

    def check_lipschitz(self, samples: int = 1000, seed: int = 0) -> float:
        """Spot-check ‖F(x') − F(x)‖ ≤ L‖x' − x‖ on random feasible pairs.

        Args:
            samples: number of pairs.
            seed: random seed.

        Returns:
            The smallest slack L‖x' − x‖ − ‖F(x') − F(x)‖ observed.
        """
        rng = np.random.default_rng(seed)
        worst = math.inf
        for _ in range(samples):
            x, x_prime = self.domain.random_point(rng), self.domain.random_point(rng)
            gap = self.lipschitz * np.linalg.norm(x_prime - x)
            worst = min(worst, gap - np.linalg.norm(self.evaluate(x_prime) - self.evaluate(x)))
        return float(worst)

    def check_strong_monotonicity(self, samples: int = 1000, seed: int = 0) -> float:
        """Spot-check ⟨F(x) − F(x*), x − x*⟩ ≥ μ‖x − x*‖² near the solution.

        Args:
            samples: number of points.
            seed: random seed.

        Returns:
            The smallest slack observed.

        Raises:
            ValueError: if x* or μ is unknown.
        """
        if self.solution is None or self.strong is None:
            raise ValueError(f"{self.name} has no known solution or strong modulus")
        rng = np.random.default_rng(seed)
        anchor = self.evaluate(self.solution)
        worst = math.inf
        for _ in range(samples):
            x = self.domain.random_point(rng)
            offset = x - self.solution
            norm = float(np.linalg.norm(offset))
            if norm > self.strong_radius:
                x = self.solution + offset * (self.strong_radius / norm)
                offset = x - self.solution
            gap = float((self.evaluate(x) - anchor) @ offset)
            worst = min(worst, gap - self.strong * float(offset @ offset))
        return float(worst)


class MethodConfig(pydantic.BaseModel):
    """Coefficients, step schedule and start of a BPM run.

    Attributes:
        alpha_a: weight of F(X_t) in the oracle signal.
        alpha_b: weight of F(X_{t−1/2}) in the oracle signal.
        gamma: a constant step or the sequence γ_1, γ_2, ...
        horizon: number of base states T recorded.
        init: the starting point X_1.
        stop_tolerance: stop once D(x*, X_t) falls below it, None to never stop.
    """

    model_config = pydantic.ConfigDict(extra="forbid", frozen=True)

    alpha_a: typing.Annotated[float, pydantic.Field(ge=0.0, le=1.0)] = 0.0
    alpha_b: typing.Annotated[float, pydantic.Field(ge=0.0, le=1.0)] = 0.0
    gamma: typing.Annotated[float, pydantic.Field(ge=0.0)] | tuple[
        typing.Annotated[float, pydantic.Field(ge=0.0)], ...
    ]
    horizon: typing.Annotated[int, pydantic.Field(ge=1)] = DEFAULT_HORIZON
    init: tuple[float, ...]
    stop_tolerance: typing.Annotated[float, pydantic.Field(ge=0.0)] | None = (
        DEFAULT_STOP_TOLERANCE
    )

    @pydantic.model_validator(mode="after")
    def _check_signal(self) -> "MethodConfig":
        """Check the oracle signal coefficients and the schedule length.

        Returns:
            The validated config.

        Raises:
            ValueError: if the coefficients or the schedule are inconsistent.
        """
        total = self.alpha_a + self.alpha_b
        if total > 1.0 + 1e-12:
            raise ValueError(f"alpha_a + alpha_b must not exceed 1, got {total}")
        if self.alpha_b > 0 and abs(total - 1.0) > 1e-12:
            raise ValueError("alpha_a + alpha_b must equal 1 when alpha_b is positive")
        if isinstance(self.gamma, tuple) and len(self.gamma) < self.horizon - 1:
            raise ValueError(
                f"step sequence has {len(self.gamma)} entries, horizon {self.horizon} needs "
                f"{self.horizon - 1}"
            )
        return self

    @classmethod
    def preset(cls, name: str, **kwargs: typing.Any) -> "MethodConfig":
        """Build a config for a named method.

        Args:
            name: ``md``, ``mp`` or ``omd``.
            kwargs: remaining config fields.

        Returns:
            The config.

        Raises:
            ValueError: if the preset is unknown.
        """
        if name not in PRESETS:
            raise ValueError(f"unknown method preset {name!r}, expected one of {sorted(PRESETS)}")
        alpha_a, alpha_b = PRESETS[name]
        return cls(alpha_a=alpha_a, alpha_b=alpha_b, **kwargs)

    @property
    def method_name(self) -> str:
        """The preset name when the coefficients match one."""
        for name, coefficients in PRESETS.items():
            if coefficients == (self.alpha_a, self.alpha_b):
                return name
        return f"bpm({self.alpha_a:g},{self.alpha_b:g})"

    @property
    def is_mirror_descent(self) -> bool:
        """Whether the leading state coincides with the base state."""
        return self.alpha_a == 0 and self.alpha_b == 0

    def step_size(self, t: int) -> float:
        """Return γ_t.

        Args:
            t: 1-based iteration index.

        Returns:
            The step size.
        """
        if isinstance(self.gamma, tuple):
            return self.gamma[t - 1]
        return self.gamma

    def steps(self, count: int) -> np.ndarray:
        """Return γ_1, ..., γ_count.

        Args:
            count: number of steps.

        Returns:
            The step sizes.
        """
        if isinstance(self.gamma, tuple):
            return np.asarray(self.gamma[:count], dtype=float)
        return np.full(count, float(self.gamma))


class StepReport(typing.NamedTuple):
    """Outcome of the step-size conditions.

    Attributes:
        caps: upper bound of each condition on a constant step.
        violations: step indices (1-based) violating each condition.
    """

    caps: dict[str, float]
    violations: dict[str, list[int]]

    @property
    def valid(self) -> bool:
        """Whether every condition holds at every step."""
        return not any(self.violations.values())

    def satisfied(self, condition: str) -> bool:
        """Tell whether one condition holds at every step.

        Args:
            condition: condition name.

        Returns:
            Whether it holds.
        """
        return not self.violations[condition]


def step_caps(prob: Problem, alpha_a: float, alpha_b: float) -> dict[str, float]:
    """Compute the largest constant step allowed by each condition.

    ``golden`` is γ ≤ 1/(2φL), ``mixing`` is γ(1 − α_a − α_b)² ≤ μ/(8L²) and
    ``energy`` is 2μγ + 4γ²L² ≤ 1.

    Args:
        prob: the problem.
        alpha_a: signal weight of F(X_t).
        alpha_b: signal weight of F(X_{t−1/2}).

    Returns:
        Caps by condition name.

    Raises:
        ValueError: if μ is unknown.
    """
    if prob.strong is None:
        raise ValueError(f"{prob.name} declares no strong monotonicity modulus")
    lip, mu = prob.lipschitz, prob.strong
    remainder = (1.0 - alpha_a - alpha_b) ** 2
    return {
        "golden": 1.0 / (2.0 * GOLDEN_RATIO * lip),
        "mixing": mu / (8.0 * lip**2 * remainder) if remainder > 1e-15 else math.inf,
        "energy": (-2.0 * mu + math.sqrt(4.0 * mu**2 + 16.0 * lip**2)) / (8.0 * lip**2),
    }


def default_step(prob: Problem, alpha_a: float, alpha_b: float) -> float:
    """Pick 0.9 times the smaller of the golden-ratio and mixing caps.

    Args:
        prob: the problem.
        alpha_a: signal weight of F(X_t).
        alpha_b: signal weight of F(X_{t−1/2}).

    Returns:
        The step size.
    """
    caps = step_caps(prob, alpha_a, alpha_b)
    return 0.9 * min(caps["golden"], caps["mixing"])


def validate_step(cfg: MethodConfig, prob: Problem, beta: float | None = None) -> StepReport:
    """Check the step-size conditions of the convergence theorem at every step.

    With a Legendre constant β the report also checks that μγ/(2β) < 1, which keeps
    the geometric factor of the generic bound in (0, 1).

    Args:
        cfg: the method config.
        prob: the problem.
        beta: Legendre constant at the solution.

    Returns:
        The report, nothing is raised on violations.
    """
    caps = step_caps(prob, cfg.alpha_a, cfg.alpha_b)
    gammas = cfg.steps(max(cfg.horizon - 1, 1))
    remainder = (1.0 - cfg.alpha_a - cfg.alpha_b) ** 2
    mu, lip = typing.cast(float, prob.strong), prob.lipschitz
    checks = {
        "golden": gammas <= caps["golden"] * (1 + 1e-12),
        "mixing": gammas * remainder <= mu / (8.0 * lip**2) * (1 + 1e-12),
        "energy": 2.0 * mu * gammas + 4.0 * gammas**2 * lip**2 <= 1.0 + 1e-12,
    }
    if beta is not None:
        caps["contraction"] = 2.0 * beta / mu
        checks["contraction"] = mu * gammas / (2.0 * beta) < 1.0
    violations = {name: (np.flatnonzero(~ok) + 1).tolist() for name, ok in checks.items()}
    report = StepReport(caps, violations)
    for name, steps in violations.items():
        if steps:
            logger.warning(
                "step condition %s violated at %d steps (first %d)", name, len(steps), steps[0]
            )
    return report


class Trajectory:
    """Record of a BPM run.

    Base and leading states have the same length: leading[0] is X_{1/2} = X_1 and
    leading[k] is X_{k+1/2}. The per-step arrays hold one row per transition
    X_t → X_{t+1}.

    Attributes:
        base: base states X_1, ..., X_T.
        leading: leading states X_{1/2}, X_{3/2}, ..., X_{T−1/2}.
        signal: oracle signals V_1, ..., V_{T−1}.
        lead_field: F(X_{3/2}), ..., F(X_{T−1/2}).
        steps: step sizes γ_1, ..., γ_{T−1}.
        divergence: D(x*, X_t) when x* is known.
        distance: ‖X_t − x*‖ when x* is known.
        energy: energy E_t when x* is known.
        termination: ``horizon`` or ``converged-to-precision``.
        field_calls: number of evaluations of F.
        underflow_step: first t where a coordinate of a steep run left the float range.
        neighborhood_exits: steps whose leading state left the declared neighbourhood.
        step_report: the step-size report, when μ is known.
    """

    def __init__(self, base: np.ndarray, leading: np.ndarray):
        """Initialize the trajectory.

        Args:
            base: base states.
            leading: leading states.
        """
        self.base = base
        self.leading = leading
        self.signal = np.zeros((0, base.shape[1]))
        self.lead_field = np.zeros((0, base.shape[1]))
        self.steps = np.zeros(0)
        self.divergence: np.ndarray | None = None
        self.distance: np.ndarray | None = None
        self.energy: np.ndarray | None = None
        self.termination = "horizon"
        self.field_calls = 0
        self.underflow_step: int | None = None
        self.neighborhood_exits: list[int] = []
        self.step_report: StepReport | None = None

    def __len__(self) -> int:
        """Return the number of base states.

        Returns:
            T.
        """
        return len(self.base)

    @property
    def dim(self) -> int:
        """Number of coordinates."""
        return self.base.shape[1]

    def coordinate_series(self, i: int, offset: float = 0.0) -> np.ndarray:
        """Return |X_{t,i} − offset| over the run.

        Args:
            i: coordinate index.
            offset: reference value, usually x*_i.

        Returns:
            The series.
        """
        return np.abs(self.base[:, i] - offset)

    def header(self) -> list[str]:
        """Return the CSV header.

        Returns:
            Column names.
        """
        return (
            ["t"]
            + [f"x_{i + 1}" for i in range(self.dim)]
            + [f"lead_{i + 1}" for i in range(self.dim)]
            + ["div", "dist", "energy"]
        )

    def rows(self) -> typing.Iterator[list[str]]:
        """Yield CSV rows with round-trip float formatting.

        Yields:
            One row per base state.
        """
        nan = np.full(len(self), math.nan)
        extras = [
            nan if series is None else series
            for series in (self.divergence, self.distance, self.energy)
        ]
        for t in range(len(self)):
            values = [*self.base[t], *self.leading[t], *(series[t] for series in extras)]
            yield [str(t + 1)] + [repr(float(v)) for v in values]

    def to_csv(self, path: pathlib.Path) -> None:
        """Write the trajectory CSV.

        Args:
            path: output file.
        """
        with path.open("w", newline="", encoding="utf-8") as stream:
            writer = csv.writer(stream)
            writer.writerow(self.header())
            writer.writerows(self.rows())

    @classmethod
    def from_csv(cls, path: pathlib.Path) -> "Trajectory":
        """Read a trajectory CSV written by to_csv.

        Args:
            path: input file.

        Returns:
            The trajectory with states and diagnostics.

        Raises:
            ValueError: if the header is malformed.
        """
        with path.open(newline="", encoding="utf-8") as stream:
            reader = csv.reader(stream)
            header = next(reader)
            table = np.array([[float(v) for v in row[1:]] for row in reader], dtype=float)
        dim = (len(header) - 4) // 2
        if len(header) != 2 * dim + 4 or header[0] != "t":
            raise ValueError(f"malformed trajectory header: {header}")
        table = table.reshape(-1, 2 * dim + 3)
        trajectory = cls(table[:, :dim], table[:, dim : 2 * dim])
        diagnostics = [table[:, 2 * dim + k] for k in range(3)]
        trajectory.divergence, trajectory.distance, trajectory.energy = (
            None if np.all(np.isnan(column)) else column for column in diagnostics
        )
        return trajectory


def _oracle_signal(
    cfg: MethodConfig, field_base: np.ndarray | None, field_lead: np.ndarray
) -> np.ndarray:
    """Combine field values into V_t = α_a F(X_t) + α_b F(X_{t−1/2}).

    Args:
        cfg: the method config.
        field_base: F(X_t), only needed when α_a > 0.
        field_lead: F(X_{t−1/2}).

    Returns:
        V_t.
    """
    signal = cfg.alpha_b * field_lead
    if cfg.alpha_a > 0:
        signal = signal + cfg.alpha_a * typing.cast(np.ndarray, field_base)
    return signal


def bpm_step(
    state: tuple[np.ndarray, np.ndarray],
    cfg: MethodConfig,
    prob: Problem,
    h: Regularizer,
    t: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Perform one BPM transition.

    V_t = α_a F(X_t) + α_b F(X_{t−1/2}), X_{t+1/2} = P_{X_t}(−γ_t V_t) and
    X_{t+1} = P_{X_t}(−γ_t F(X_{t+1/2})). Mirror descent keeps X_{t+1/2} = X_t exactly.

    Args:
        state: the pair (X_t, X_{t−1/2}).
        cfg: the method config.
        prob: the problem.
        h: the regularizer.
        t: 1-based iteration index selecting γ_t.

    Returns:
        The pair (X_{t+1/2}, X_{t+1}).
    """
    base, previous_lead = (np.asarray(s, dtype=float) for s in state)
    gamma = cfg.step_size(t)
    if cfg.is_mirror_descent:
        lead = base
    else:
        field_base = prob.evaluate(base) if cfg.alpha_a > 0 else None
        signal = _oracle_signal(cfg, field_base, prob.evaluate(previous_lead))
        lead = prox(h, base, -gamma * signal)
    return lead, prox(h, base, -gamma * prob.evaluate(lead))


def _is_underflowed(h: Regularizer, point: np.ndarray) -> bool:
    """Tell whether a steep run lost a coordinate to the float range.

    Args:
        h: the regularizer.
        point: a base state.

    Returns:
        Whether some coordinate is below 1e-300 above its bound.
    """
    if not h.kernel.steep:
        return False
    gaps = point - h.domain.lower
    return bool(np.any(gaps < UNDERFLOW_THRESHOLD))


def run(prob: Problem, h: Regularizer, cfg: MethodConfig) -> Trajectory:
    """Iterate the BPM template and record the trajectory.

    The run stops early, with termination ``converged-to-precision``, once
    D(x*, X_t) falls below the stop tolerance. Coordinates leaving the float range
    are recorded in ``underflow_step`` and do not stop the run.

    Args:
        prob: the problem.
        h: the regularizer.
        cfg: the method config.

    Returns:
        The trajectory.
    """
    init = prob.domain.check_point(cfg.init)
    n, horizon = prob.domain.dim, cfg.horizon
    base = np.empty((horizon, n))
    leading = np.empty((horizon, n))
    signals = np.empty((max(horizon - 1, 0), n))
    lead_fields = np.empty((max(horizon - 1, 0), n))
    base[0] = leading[0] = init
    solution = prob.solution
    report = validate_step(cfg, prob) if prob.strong is not None else None
    logger.info(
        "running %s on %s with %s, horizon %d", cfg.method_name, prob.name, h.kernel.name, horizon
    )
    calls = 0
    field_previous_lead = prob.evaluate(init)
    calls += 1
    field_base = field_previous_lead
    underflow_step = None
    exits: list[int] = []
    length = horizon
    termination = "horizon"
    for s in range(horizon - 1):
        t = s + 1
        gamma = cfg.step_size(t)
        current = base[s]
        if cfg.is_mirror_descent:
            signal = np.zeros(n)
            lead = current
            field_lead = field_base
        else:
            if cfg.alpha_a > 0 and s > 0:
                field_base = prob.evaluate(current)
                calls += 1
            signal = _oracle_signal(cfg, field_base, field_previous_lead)
            lead = prox(h, current, -gamma * signal)
            field_lead = prob.evaluate(lead)
            calls += 1
        nxt = prox(h, current, -gamma * field_lead)
        signals[s], lead_fields[s] = signal, field_lead
        leading[s + 1] = lead
        base[s + 1] = nxt
        field_previous_lead = field_lead
        if cfg.is_mirror_descent:
            field_base = prob.evaluate(nxt)
            calls += 1
        if solution is not None:
            if np.linalg.norm(lead - solution) > prob.strong_radius:
                if not exits:
                    logger.warning("leading state left the neighbourhood at step %d", t)
                exits.append(t)
            if cfg.stop_tolerance is not None and (
                h.divergence(solution, nxt) < cfg.stop_tolerance
            ):
                length = s + 2
                termination = "converged-to-precision"
                logger.info("converged to precision at t = %d", length)
                break
        if underflow_step is None and _is_underflowed(h, nxt):
            underflow_step = t + 1
            logger.info("coordinate underflow at t = %d", underflow_step)
    trajectory = Trajectory(base[:length].copy(), leading[:length].copy())
    trajectory.signal = signals[: length - 1].copy()
    trajectory.lead_field = lead_fields[: length - 1].copy()
    trajectory.steps = cfg.steps(length - 1)
    trajectory.termination = termination
    trajectory.field_calls = calls
    trajectory.underflow_step = underflow_step
    trajectory.neighborhood_exits = exits
    trajectory.step_report = report
    if solution is not None:
        trajectory.divergence = np.array([h.divergence(solution, x) for x in trajectory.base])
        trajectory.distance = np.linalg.norm(trajectory.base - solution, axis=1)
        trajectory.energy = energy_series(trajectory, prob, h, cfg).values
    logger.info("run finished: %s after %d states", termination, length)
    return trajectory


class EnergySeries(typing.NamedTuple):
    """Energy values and the outcome of the decrement check.

    Attributes:
        values: E_1, ..., E_T.
        penalty: the oracle discrepancy terms P_1, ..., P_T.
        slack: per transition, the margin of E_{t+1} below its guaranteed bound.
        violations: 1-based t whose transition violates the decrement bound.
    """

    values: np.ndarray
    penalty: np.ndarray
    slack: np.ndarray
    violations: list[int]


def energy_series(
    traj: Trajectory, prob: Problem, h: Regularizer, cfg: MethodConfig
) -> EnergySeries:
    """Compute E_t = D(x*, X_t) + P_t and check its guaranteed decrement.

    P_1 = 0 and P_t = γ_{t−1}²‖(α_a + α_b) F(X_{t−1/2}) − V_{t−1}‖². The decrement
    check flags t with E_{t+1} > E_t − μγ_t P_t − (μγ_t/4)‖X_t − x*‖² + 1e-9.

    Args:
        traj: the trajectory.
        prob: the problem, with known solution.
        h: the regularizer.
        cfg: the method config.

    Returns:
        The energy series.

    Raises:
        ValueError: if the solution is unknown.
    """
    if prob.solution is None:
        raise ValueError(f"{prob.name} has no known solution")
    solution = prob.solution
    divergences = (
        traj.divergence
        if traj.divergence is not None
        else np.array([h.divergence(solution, x) for x in traj.base])
    )
    penalty = np.zeros(len(traj))
    if len(traj) > 1:
        # lead_field[s] is F(X_{s+3/2}), the field at the leading state of transition s.
        mismatch = (cfg.alpha_a + cfg.alpha_b) * traj.lead_field - traj.signal
        penalty[1:] = traj.steps**2 * np.sum(mismatch**2, axis=1)
    values = divergences + penalty
    mu = prob.strong if prob.strong is not None else 0.0
    distances = np.sum((traj.base[:-1] - solution) ** 2, axis=1)
    bound = values[:-1] - mu * traj.steps * penalty[:-1] - 0.25 * mu * traj.steps * distances
    slack = bound - values[1:] + DECREMENT_SLACK
    violations = (np.flatnonzero(slack < 0) + 1).tolist()
    if violations:
        logger.warning("energy decrement violated at %d transitions", len(violations))
    return EnergySeries(values, penalty, slack, violations)


def template_slacks(
    traj: Trajectory, prob: Problem, h: Regularizer, cfg: MethodConfig, c: float = 0.0
) -> np.ndarray:
    """Evaluate the margin of the one-transition template inequality.

    D(x*, X_{t+1}) ≤ D(x*, X_t) − γ⟨F(X_{t+1/2}) − cF(x*), X_{t+1/2} − x*⟩
    + ½γ²‖F(X_{t+1/2}) − V_t − cF(x*)‖² − ½‖X_{t+1/2} − X_t‖²

    Args:
        traj: the trajectory.
        prob: the problem, with known solution.
        h: the regularizer.
        cfg: the method config, kept for symmetry with energy_series.
        c: the shift, 0 or 1 − α_a − α_b.

    Returns:
        Right-hand side minus left-hand side per transition.

    Raises:
        ValueError: if the solution is unknown.
    """
    del cfg
    if prob.solution is None:
        raise ValueError(f"{prob.name} has no known solution")
    solution = prob.solution
    anchor = c * prob.evaluate(solution)
    margins = np.empty(len(traj) - 1)
    for s in range(len(traj) - 1):
        gamma = traj.steps[s]
        lead, current = traj.leading[s + 1], traj.base[s]
        shifted = traj.lead_field[s] - anchor
        rhs = (
            h.divergence(solution, current)
            - gamma * float(shifted @ (lead - solution))
            + 0.5 * gamma**2 * float(np.sum((shifted - traj.signal[s]) ** 2))
            - 0.5 * float(np.sum((lead - current) ** 2))
        )
        margins[s] = rhs - h.divergence(solution, traj.base[s + 1])
    return margins
