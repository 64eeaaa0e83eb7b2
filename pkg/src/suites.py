# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Invariant verification suites behind ``bregman-vi verify``."""

import itertools
import logging
import math
import typing

import numpy as np

from analysis import (
    estimate_legendre_exponent,
    fit_rate,
    general_bound_sequence,
    oracle_basicnum,
    oracle_polyak,
    per_coordinate_report,
    predict_rate_sharp,
)
from domains import (
    CaseA,
    Domain,
    active_set,
    classify_solution,
    separation_certificate,
    separation_constant,
)
from exceptions import ConvergenceError, UnknownTargetError
from kernels import Regularizer, legendre_exponent_analytic, make_kernel
from prox import prox, prox_euclidean_polyhedral, prox_polyhedral_dual, prox_simplex_entropy
from scenarios import (
    BOUNDARY_SCENARIOS,
    get_scenario,
    matches,
    reproduce_legendre_rates,
    reproduce_sharp_rates,
    run_scenario,
)
from solver import PRESETS, MethodConfig, default_step, energy_series, run, template_slacks

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 1000
ENERGY_HORIZON = 2000
THREE_POINT_TOLERANCE = 1e-10
NONEXPANSIVE_TOLERANCE = 1e-9
INEQUALITY_TOLERANCE = 1e-9
DUAL_NEWTON_TOLERANCE = 1e-10
ORACLE_TOLERANCE = 1e-8
ORACLE_SAMPLES = 50
ORACLE_ITERATIONS = 20_000
LEGENDRE_TOLERANCE = 0.05


class CheckResult(typing.NamedTuple):
    """Outcome of one invariant check.

    Attributes:
        suite: suite name.
        check: check name.
        passed: whether the invariant holds.
        slack: margin by which it holds, negative when it fails.
    """

    suite: str
    check: str
    passed: bool
    slack: float


def _check(suite: str, check: str, slack: float) -> CheckResult:
    """Build a result that passes when the slack is nonnegative.

    Args:
        suite: suite name.
        check: check name.
        slack: the margin.

    Returns:
        The result.
    """
    result = CheckResult(suite, check, bool(slack >= 0), float(slack))
    if not result.passed:
        logger.warning("%s/%s failed with slack %.3e", suite, check, slack)
    return result


def box_regularizers() -> dict[str, Regularizer]:
    """Build regularizers that are 1-strongly convex on their boxes.

    Returns:
        Regularizers by label.
    """
    unit_box = Domain.orthant_box(3, [1.0, 1.0, 1.0])
    return {
        "euclidean": Regularizer(make_kernel("euclidean"), unit_box),
        "entropy": Regularizer(make_kernel("entropy"), unit_box),
        "tsallis:q=0.5": Regularizer(make_kernel("tsallis:q=0.5"), unit_box),
        "tsallis:q=1.5": Regularizer(make_kernel("tsallis:q=1.5"), unit_box),
        "hellinger": Regularizer(make_kernel("hellinger"), Domain.interval(-1.0, 1.0, 3)),
    }


def simplex_regularizers() -> dict[str, Regularizer]:
    """Build the simplex regularizers.

    Returns:
        Regularizers by label.
    """
    simplex = Domain.simplex(3)
    return {
        "entropy-simplex": Regularizer(make_kernel("entropy"), simplex),
        "euclidean-simplex": Regularizer(make_kernel("euclidean"), simplex),
    }


def _three_point_error(h: Regularizer, p: np.ndarray, x: np.ndarray, z: np.ndarray) -> float:
    """Evaluate the defect of D(p, x) = D(p, z) + D(z, x) + ⟨∇h(z) − ∇h(x), p − z⟩.

    Args:
        h: the regularizer.
        p: reference point.
        x: base point.
        z: intermediate point.

    Returns:
        The absolute defect.
    """
    rhs = h.divergence(p, z) + h.divergence(z, x) + float((h.grad(z) - h.grad(x)) @ (p - z))
    return abs(h.divergence(p, x) - rhs)


def prox_suite(seed: int = 0, samples: int = DEFAULT_SAMPLES) -> list[CheckResult]:
    """Check the divergence identities and the prox engines.

    Args:
        seed: random seed.
        samples: size of each random battery.

    Returns:
        The results.
    """
    rng = np.random.default_rng(seed)
    results = []
    regularizers = box_regularizers() | simplex_regularizers()
    for label, h in regularizers.items():
        dom = h.domain
        worst_identity = 0.0
        worst_contraction = math.inf
        worst_strong = math.inf
        for _ in range(samples):
            p, x, z = dom.random_point(rng), dom.random_point(rng), dom.random_point(rng)
            worst_identity = max(worst_identity, _three_point_error(h, p, x, z))
            worst_strong = min(
                worst_strong, h.divergence(p, x) - 0.5 * float(np.sum((p - x) ** 2))
            )
            y, y_prime = rng.uniform(-1.0, 1.0, dom.dim), rng.uniform(-1.0, 1.0, dom.dim)
            moved = np.linalg.norm(prox(h, x, y) - prox(h, x, y_prime))
            worst_contraction = min(worst_contraction, np.linalg.norm(y - y_prime) - moved)
        results.append(
            _check("prox", f"three-point:{label}", THREE_POINT_TOLERANCE - worst_identity)
        )
        results.append(
            _check("prox", f"nonexpansive:{label}", worst_contraction + NONEXPANSIVE_TOLERANCE)
        )
        results.append(_check("prox", f"strong-convexity:{label}", worst_strong + 1e-12))
        results.append(_variational_check(label, h, rng, samples))
    results.append(_dual_newton_simplex(rng, samples))
    results.append(_dual_newton_line())
    results.append(_dual_newton_oracle(rng, samples))
    results.append(_euclidean_projection_kkt(rng, samples))
    return results


def _dual_newton_simplex(rng: np.random.Generator, samples: int) -> CheckResult:
    """Compare the dual Newton prox with exponential weights on the simplex.

    Args:
        rng: random generator.
        samples: number of inputs.

    Returns:
        The result.
    """
    h = simplex_regularizers()["entropy-simplex"]
    worst = 0.0
    for _ in range(samples):
        x = h.domain.random_point(rng)
        y = rng.uniform(-1.0, 1.0, h.dim)
        gap = prox_polyhedral_dual(h, h.domain, x, y) - prox_simplex_entropy(x, y)
        worst = max(worst, float(np.max(np.abs(gap))))
    return _check("prox", "dual-newton:simplex", DUAL_NEWTON_TOLERANCE - worst)


def _dual_newton_line(steps: int = 200) -> CheckResult:
    """Compare entropic runs on the ray {x_1 = εx_2} with their scalar recursion.

    Along the ray χ_t = x_{2,t} follows
    χ_{t+1} = χ_t exp((−γ(1 + ε²)χ_t + γ⟨u, (ε, 1)⟩)/(1 + ε)).

    Args:
        steps: horizon of the run.

    Returns:
        The result, with the relative error of the recursion.
    """
    scenario = get_scenario("line-tightness")
    traj, _, cfg = run_scenario(scenario, steps)
    epsilon = scenario.init[0] / scenario.init[1]
    shift = -scenario.problem.field.offset
    gamma = cfg.step_size(1)
    drift = gamma * float(shift @ np.array([epsilon, 1.0]))
    chi = np.empty(len(traj))
    chi[0] = traj.base[0, 1]
    for t in range(1, len(traj)):
        chi[t] = chi[t - 1] * math.exp(
            (-gamma * (1.0 + epsilon**2) * chi[t - 1] + drift) / (1.0 + epsilon)
        )
    error = float(np.max(np.abs(traj.base[:, 1] - chi) / chi))
    return _check("prox", "dual-newton:line", 1e-8 - error)


def _euclidean_projection_kkt(rng: np.random.Generator, samples: int) -> CheckResult:
    """Check the projection inequality ⟨x + y − P, z − P⟩ ≤ 0 on the simplex.

    Args:
        rng: random generator.
        samples: number of inputs.

    Returns:
        The result.
    """
    dom = Domain.simplex(3)
    worst = -math.inf
    for _ in range(samples):
        x = dom.random_point(rng)
        y = rng.uniform(-1.0, 1.0, dom.dim)
        point = prox_euclidean_polyhedral(dom, x, y)
        for _ in range(4):
            z = dom.random_point(rng)
            worst = max(worst, float((x + y - point) @ (z - point)))
    return _check("prox", "projection:euclidean-simplex", INEQUALITY_TOLERANCE - worst)


def _variational_check(
    label: str, h: Regularizer, rng: np.random.Generator, samples: int
) -> CheckResult:
    """Check ⟨∇h(P) − ∇h(x) − y, p − P⟩ ≥ 0 for the prox point P and feasible p.

    The defect is measured relative to the size of the gradients involved.

    Args:
        label: regularizer label.
        h: the regularizer.
        rng: random generator.
        samples: number of inputs.

    Returns:
        The result.
    """
    dom = h.domain
    worst = math.inf
    for _ in range(samples):
        x = dom.random_point(rng)
        y = rng.uniform(-1.0, 1.0, dom.dim)
        point = prox(h, x, y)
        residual = h.grad(point) - h.grad(x) - y
        scale = 1.0 + float(np.max(np.abs(h.grad(point)))) + float(np.max(np.abs(h.grad(x))))
        for _ in range(4):
            p = dom.random_point(rng)
            worst = min(worst, float(residual @ (p - point)) / scale)
    return _check("prox", f"variational:{label}", worst + INEQUALITY_TOLERANCE)


def oracle_polyhedra() -> dict[str, Domain]:
    """Build the three-variable polyhedra the dual Newton prox is compared on.

    Returns:
        Domains by label.
    """
    return {
        "budget": Domain.polyhedron([[1.0, 2.0, 1.5]], [1.0]),
        "two-rows": Domain.polyhedron(
            [[1.0, 1.0, 1.0], [1.0, -1.0, 0.5]], [1.0, 0.2], slater_point=[0.3, 0.3, 0.4]
        ),
    }


def projected_gradient_prox(
    h: Regularizer, x: np.ndarray, y: np.ndarray, iterations: int = ORACLE_ITERATIONS
) -> np.ndarray:
    """Minimize h(z) − ⟨∇h(x) + y, z⟩ over a polyhedron by projected gradient.

    Steps are Euclidean projections with a backtracking step size kept inside the
    positive orthant, stopped once the gradient mapping vanishes.

    Args:
        h: a regularizer on a polyhedral domain.
        x: a strictly feasible prox center.
        y: the dual vector.
        iterations: iteration cap.

    Returns:
        The approximate prox point.

    Raises:
        ConvergenceError: if the gradient mapping does not vanish within the cap.
    """
    dom = h.domain
    target = h.grad(x) + y

    def objective(z: np.ndarray) -> float:
        return h.value(z) - float(target @ z)

    z = np.asarray(x, dtype=float).copy()
    eta = 1.0
    mapping = math.inf
    for _ in range(iterations):
        gradient = h.grad(z) - target
        value = objective(z)
        while eta > 1e-16:
            trial = prox_euclidean_polyhedral(dom, z, -eta * gradient)
            move = trial - z
            model = value + float(gradient @ move) + float(move @ move) / (2.0 * eta)
            if np.all(trial > 0) and objective(trial) <= model + 1e-15 * (1.0 + abs(value)):
                break
            eta *= 0.5
        else:
            raise ConvergenceError("projected gradient step size underflow", mapping, iterations)
        z = trial
        mapping = float(np.linalg.norm(move)) / eta
        if mapping <= 1e-11:
            return z
        eta *= 2.0
    raise ConvergenceError("projected gradient did not converge", mapping, iterations)


def _dual_newton_oracle(rng: np.random.Generator, samples: int) -> CheckResult:
    """Compare the dual Newton prox with projected gradient on three-variable polyhedra.

    Args:
        rng: random generator.
        samples: number of inputs, capped at ORACLE_SAMPLES per polyhedron.

    Returns:
        The result.
    """
    worst = 0.0
    for dom in oracle_polyhedra().values():
        h = Regularizer(make_kernel("entropy"), dom)
        for _ in range(min(samples, ORACLE_SAMPLES)):
            x = dom.random_point(rng)
            y = rng.uniform(-1.0, 1.0, dom.dim)
            gap = prox_polyhedral_dual(h, dom, x, y) - projected_gradient_prox(h, x, y)
            worst = max(worst, float(np.max(np.abs(gap))))
    return _check("prox", "dual-newton:oracle", ORACLE_TOLERANCE - worst)


def lemma_suite(seed: int = 0, samples: int = DEFAULT_SAMPLES) -> list[CheckResult]:
    """Check the one-step and two-step prox inequalities and the scalar lemmas.

    Args:
        seed: random seed.
        samples: size of each random battery.

    Returns:
        The results.
    """
    rng = np.random.default_rng(seed)
    results = []
    for label, h in (box_regularizers() | simplex_regularizers()).items():
        dom = h.domain
        one_step = two_step = math.inf
        for _ in range(samples):
            p, x = dom.random_point(rng), dom.random_point(rng)
            y1, y2 = rng.uniform(-1.0, 1.0, dom.dim), rng.uniform(-1.0, 1.0, dom.dim)
            x1, x2 = prox(h, x, y1), prox(h, x, y2)
            base = h.divergence(p, x)
            one_step = min(
                one_step,
                base + float(y1 @ (x1 - p)) - h.divergence(x1, x) - h.divergence(p, x1),
            )
            two_step = min(
                two_step,
                base
                + float(y2 @ (x1 - p))
                + 0.5 * float(np.sum((y2 - y1) ** 2))
                - 0.5 * float(np.sum((x1 - x) ** 2))
                - h.divergence(p, x2),
            )
        results.append(_check("lemmas", f"one-step:{label}", one_step + INEQUALITY_TOLERANCE))
        results.append(_check("lemmas", f"two-step:{label}", two_step + INEQUALITY_TOLERANCE))
    results.extend(_sequence_checks(rng))
    results.extend(_separation_checks(rng, samples))
    return results


def _sequence_checks(rng: np.random.Generator) -> list[CheckResult]:
    """Check the power-law recursion and the bound on decreasing sequences.

    Args:
        rng: random generator.

    Returns:
        The results.
    """
    results = []
    for a, r in ((0.1, 1.0), (0.1, 0.5), (0.05, 2.0)):
        sequence = oracle_basicnum(a, r, 0.1, 100_000)
        error = abs(sequence.normalized[-1] - 1.0)
        results.append(_check("lemmas", f"basicnum:a={a:g},r={r:g}", 0.02 - error))
    for r in (0.5, 1.0, 1.5, 2.0):
        fit = fit_rate(oracle_basicnum(0.1, r, 0.1, 100_000).values[1:])
        error = abs(typing.cast(float, fit.parameter) + 1.0 / r)
        results.append(_check("lemmas", f"basicnum-fit:r={r:g}", 0.03 / r - error))
    for r in (0.5, 1.0):
        rho = rng.uniform(0.0, 0.2, 10_000)
        bound = oracle_polyak(1.0, rho, r)
        d = np.empty(len(rho) + 1)
        d[0] = 1.0
        for t, coefficient in enumerate(rho):
            d[t + 1] = d[t] - coefficient * d[t] ** (1.0 + r)
        results.append(_check("lemmas", f"polyak:r={r:g}", float(np.min(bound - d)) + 1e-12))
    return results


def _separation_checks(rng: np.random.Generator, samples: int) -> list[CheckResult]:
    """Verify the side conditions of every separation certificate on two domains.

    Kernel certificates must lie in ker A, vanish on I and be at least 1 on the
    rest of the active set; dominance bounds must hold on sampled feasible points.

    Args:
        rng: random generator.
        samples: number of sampled points per dominance bound.

    Returns:
        The results.
    """
    cases = {
        "simplex": (Domain.simplex(3), np.array([0.0, 0.0, 1.0]), math.sqrt(6.0)),
        "line": (
            Domain.polyhedron([[1.0, -0.1]], [0.0], slater_point=[0.1, 1.0]),
            np.zeros(2),
            math.sqrt(101.0),
        ),
    }
    results = []
    for label, (dom, solution, expected) in cases.items():
        active = active_set(dom, solution)
        worst = math.inf
        for size in range(len(active)):
            for subset in itertools.combinations(active, size):
                certificate = separation_certificate(dom, solution, subset)
                rest = [i for i in active if i not in subset]
                if isinstance(certificate, CaseA):
                    points = [dom.random_point(rng) for _ in range(samples)]
                    margins = [
                        certificate.bound * max((x[j] for j in subset), default=0.0)
                        - x[certificate.index]
                        for x in points
                    ]
                    worst = min(worst, min(margins) + INEQUALITY_TOLERANCE)
                else:
                    z = certificate.vector
                    worst = min(
                        worst,
                        1e-10 - float(np.max(np.abs(dom.A @ z), initial=0.0)),
                        1e-10 - float(np.max(np.abs(z[list(subset)]), initial=0.0)),
                        float(np.min(z[rest])) - 1.0 + 1e-10,
                        certificate.constant - float(np.max(np.abs(z))),
                    )
        results.append(_check("lemmas", f"separation:{label}", worst))
        constant = separation_constant(dom, solution)
        results.append(
            _check("lemmas", f"separation-constant:{label}", 1e-6 - abs(constant - expected))
        )
    return results


def energy_suite(seed: int = 0, horizon: int | None = None) -> list[CheckResult]:
    """Check the energy decrement, the template inequality and the generic bound on runs.

    Args:
        seed: unused, the runs are deterministic.
        horizon: horizon of each run.

    Returns:
        The results.
    """
    del seed
    horizon = horizon or ENERGY_HORIZON
    results = []
    for name in BOUNDARY_SCENARIOS + ("hellinger-interior",):
        scenario = get_scenario(name)
        problem = scenario.problem
        h = scenario.regularizer()
        for preset in ("md", "mp", "omd"):
            cfg = MethodConfig.preset(
                preset,
                gamma=default_step(problem, *PRESETS[preset]),
                init=scenario.init,
                horizon=min(horizon, scenario.horizon),
            )
            traj = run(problem, h, cfg)
            energy = energy_series(traj, problem, h, cfg)
            results.append(
                _check("energy", f"decrement:{name}:{preset}", float(np.min(energy.slack)))
            )
            shifts = {0.0, 1.0 - cfg.alpha_a - cfg.alpha_b}
            for c in sorted(shifts):
                slack = float(np.min(template_slacks(traj, problem, h, cfg, c)))
                check = f"template:{name}:{preset}:c={c:g}"
                results.append(_check("energy", check, slack + INEQUALITY_TOLERANCE))
        traj, h, cfg = run_scenario(scenario, min(horizon, scenario.horizon))
        energy = energy_series(traj, problem, h, cfg)
        results.append(
            _check("energy", f"decrement:{name}:scenario", float(np.min(energy.slack)))
        )
        bound = general_bound_sequence(problem, h, cfg)[: len(traj)]
        divergence = typing.cast(np.ndarray, traj.divergence)
        results.append(
            _check("energy", f"generic-bound:{name}", float(np.min(bound[1:] - divergence[1:])))
        )
    return results


def rate_suite(seed: int = 0, horizon: int | None = None) -> list[CheckResult]:
    """Check Legendre estimates and the rate regimes of the example runs.

    Args:
        seed: seed of the direction sampling.
        horizon: overrides the scenario horizons.

    Returns:
        The results.
    """
    results = []
    points = {
        "euclidean": (Domain.interval(), (0.0, 0.5)),
        "entropy": (Domain.interval(), (0.0, 0.5)),
        "tsallis:q=0.5": (Domain.interval(0.0, 1.0), (0.0, 0.5)),
        "tsallis:q=1.5": (Domain.interval(0.0, 1.0), (0.0, 0.5)),
        "hellinger": (Domain.interval(-1.0, 1.0), (-1.0, 0.0)),
    }
    for kernel, (dom, locations) in points.items():
        h = Regularizer(make_kernel(kernel), dom)
        for location in locations:
            estimate = estimate_legendre_exponent(h, [location], seed=seed)
            error = abs(estimate - legendre_exponent_analytic(h, [location]))
            results.append(
                _check("rates", f"legendre:{kernel}@{location:g}", LEGENDRE_TOLERANCE - error)
            )
    for row in reproduce_legendre_rates(None, horizon) + reproduce_sharp_rates(None, horizon):
        results.append(_check("rates", f"regime:{row.scenario}", 0.0 if row.passed else -1.0))
    results.extend(_sharp_factor_checks(horizon))
    results.append(_simplex_split(horizon))
    return results


def _sharp_factor_checks(horizon: int | None) -> list[CheckResult]:
    """Check that observed sharp factors stay below e^(−γδ_eff/2) + 0.01.

    Args:
        horizon: overrides the scenario horizons.

    Returns:
        The results.
    """
    results = []
    for name in ("entropy-sharp", "simplex-sharp", "line-tightness"):
        scenario = get_scenario(name)
        traj, h, cfg = run_scenario(scenario, horizon)
        problem = scenario.problem
        profile = classify_solution(problem.domain, problem.field, problem.solution)
        prediction = predict_rate_sharp(profile, h, cfg)
        coordinates = typing.cast(dict, prediction.coordinates)
        for i, predicted in coordinates.items():
            fit = fit_rate(traj.coordinate_series(i, profile.solution[i]), allow_finite_time=False)
            slack = predicted.parameter + 0.01 - typing.cast(float, fit.parameter)
            if fit.regime.kind != "geometric":
                slack = -1.0
            results.append(_check("rates", f"sharp-factor:{name}:x{i + 1}", slack))
        if name == "line-tightness":
            fit = fit_rate(traj.coordinate_series(1), allow_finite_time=False)
            passed = matches(scenario.stated, fit, scenario.tolerance)
            results.append(_check("rates", f"regime:{name}", 0.0 if passed else -1.0))
    return results


def _simplex_split(horizon: int | None) -> CheckResult:
    """Check the sharp/flat split of the simplex run.

    The sharp coordinate must decay geometrically and the flat one as t^(−1), with
    x_{2,t}·t inside [1, 40] for t ≥ 1000.

    Args:
        horizon: overrides the scenario horizon.

    Returns:
        The result.
    """
    scenario = get_scenario("simplex-mixed")
    traj, h, cfg = run_scenario(scenario, horizon)
    problem = scenario.problem
    profile = classify_solution(problem.domain, problem.field, problem.solution)
    reports = {r.coordinate: r for r in per_coordinate_report(traj, profile, h, cfg, problem)}
    sharp_ok = reports[0].fit.regime.kind == "geometric"
    flat_error = abs(typing.cast(float, reports[1].fit.parameter) + 1.0)
    t = np.arange(1, len(traj) + 1)
    band = traj.base[999:, 1] * t[999:]
    band_slack = min(float(np.min(band)) - 1.0, 40.0 - float(np.max(band)))
    slack = min(0.05 - flat_error, band_slack) if sharp_ok else -1.0
    return _check("rates", "simplex-split", slack)


SUITES: dict[str, typing.Callable[[int, int | None], list[CheckResult]]] = {
    "prox": lambda seed, horizon: prox_suite(seed),
    "energy": energy_suite,
    "lemmas": lambda seed, horizon: lemma_suite(seed),
    "rates": rate_suite,
}


def run_suite(name: str, seed: int = 0, horizon: int | None = None) -> list[CheckResult]:
    """Run a suite, or every suite for ``all``.

    Args:
        name: suite name.
        seed: random seed.
        horizon: horizon override for the suites that run the method.

    Returns:
        The results.

    Raises:
        UnknownTargetError: if the suite is not known.
    """
    if name == "all":
        return [result for suite in SUITES.values() for result in suite(seed, horizon)]
    if name not in SUITES:
        raise UnknownTargetError(
            f"unknown suite {name!r}, expected one of all, {', '.join(SUITES)}"
        )
    return SUITES[name](seed, horizon)
