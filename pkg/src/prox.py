# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Prox-mapping engines P_x(y) = argmin_p {⟨y, x − p⟩ + D(p, x)}."""

import logging
import typing

import numpy as np
import scipy.special

from domains import Domain
from exceptions import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    ProxDomainError,
    ProxUndefinedError,
    SteepnessRequiredError,
    UnsupportedCombinationError,
)
from kernels import EntropyKernel, EuclideanKernel, Regularizer

logger = logging.getLogger(__name__)

NEWTON_TOLERANCE = 1e-11
NEWTON_MAX_ITERATIONS = 100
KKT_TOLERANCE = 1e-9
ACTIVE_SET_MAX_ITERATIONS = 500

Point = typing.Sequence[float] | np.ndarray


def prox_closed_form(h: Regularizer, x: Point, y: Point) -> np.ndarray:
    """Apply the coordinate-wise closed-form prox on an interval or orthant box.

    Coordinates already sitting on a steep end are left in place.

    Args:
        h: the regularizer.
        x: the prox center.
        y: the dual vector.

    Returns:
        The prox point.

    Raises:
        DomainError: if the domain is not a box.
        ProxUndefinedError: if the mirror step has no solution or overflows.
    """
    if h.domain.is_polyhedral:
        raise DomainError(f"closed-form prox needs a box, got {h.domain}")
    center = h.domain.check_point(x)
    step = np.asarray(y, dtype=float)
    frozen = h.steep_boundary(center)
    moved = h.kernel.mirror_step(np.where(frozen, h.domain.slater_point, center), step)
    point = h.domain.clip(np.where(frozen, center, moved))
    if not np.all(np.isfinite(point)):
        raise ProxUndefinedError(f"{h.kernel.name} prox overflowed at {center.tolist()}")
    return point


def prox_simplex_entropy(x: Point, y: Point) -> np.ndarray:
    """Apply the exponential weights update z ∝ x·exp(y) in log-domain.

    Coordinates that underflowed to 0 stay at 0.

    Args:
        x: a point of the simplex.
        y: the dual vector.

    Returns:
        The prox point.

    Raises:
        InfeasibleError: if x is not on the simplex.
    """
    center = np.asarray(x, dtype=float)
    if np.any(center < 0) or abs(float(np.sum(center)) - 1.0) > 1e-10:
        raise InfeasibleError(f"{center.tolist()} is not on the simplex")
    with np.errstate(divide="ignore"):
        logits = np.log(center) + np.asarray(y, dtype=float)
    return np.exp(logits - scipy.special.logsumexp(logits))


def _dual_point(h: Regularizer, x: np.ndarray, shift: np.ndarray) -> np.ndarray | None:
    """Evaluate z(λ) for a given Aᵀλ + y.

    Args:
        h: the regularizer.
        x: the prox center.
        shift: y + Aᵀλ.

    Returns:
        z(λ), or None where it is undefined or not finite.
    """
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            z = h.kernel.mirror_step(x, shift)
    except ProxUndefinedError:
        return None
    return z if np.all(np.isfinite(z)) else None


def _dual_objective(h: Regularizer, z: np.ndarray, lam: np.ndarray) -> float:
    """Evaluate the dual objective Σ θ*(θ'(x_i) + y_i + (Aᵀλ)_i) − ⟨b, λ⟩.

    The conjugate terms are evaluated at the primal point z(λ).

    Args:
        h: the regularizer.
        z: z(λ).
        lam: λ.

    Returns:
        The dual objective, inf when it overflows.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        value = float(np.sum(h.kernel.conjugate_at(z)) - h.domain.b @ lam)
    return value if np.isfinite(value) else np.inf


def prox_polyhedral_dual(h: Regularizer, dom: Domain, x: Point, y: Point) -> np.ndarray:
    """Solve the prox on {z ≥ 0 : Az = b} through its m-dimensional dual.

    The stationarity condition θ'(z_i) = θ'(x_i) + y_i + (Aᵀλ)_i defines z(λ); damped
    Newton steps on λ, starting at λ = 0, drive Az(λ) − b to zero.

    Args:
        h: a regularizer whose kernel is steep at 0.
        dom: the polyhedral domain.
        x: a strictly feasible prox center.
        y: the dual vector.

    Returns:
        The prox point.

    Raises:
        SteepnessRequiredError: if the kernel is not steep at the lower bound.
        ProxDomainError: if x has coordinates on the boundary.
        ProxUndefinedError: if the mirror step is undefined at λ = 0.
        ConvergenceError: if Newton fails to reach the tolerance.
    """
    if not h.kernel.steep_lo or np.any(dom.lower != h.kernel.lo):
        raise SteepnessRequiredError(
            f"{h.kernel.name} is not steep at the lower bound of {dom}, use the Euclidean path"
        )
    center = dom.check_point(x)
    if np.any(h.steep_boundary(center)):
        raise ProxDomainError(f"prox center {center.tolist()} is on the boundary of {dom}")
    step = np.asarray(y, dtype=float)
    lam = np.zeros(dom.A.shape[0])
    shift = step.copy()
    z = _dual_point(h, center, shift)
    if z is None:
        raise ProxUndefinedError(f"{h.kernel.name} prox is not defined at λ = 0")
    objective = _dual_objective(h, z, lam)
    residual = dom.A @ z - dom.b
    for iteration in range(NEWTON_MAX_ITERATIONS):
        error = float(np.max(np.abs(residual)))
        if error <= NEWTON_TOLERANCE:
            logger.debug("dual newton converged after %d iterations", iteration)
            return np.maximum(z, dom.lower)
        with np.errstate(divide="ignore"):
            slope = 1.0 / h.kernel.hess(z)
        hessian = (dom.A * slope) @ dom.A.T
        direction = -np.linalg.lstsq(hessian, residual, rcond=None)[0]
        scale = 1.0
        while scale > 1e-12:
            trial_lam = lam + scale * direction
            trial_shift = step + dom.A.T @ trial_lam
            trial_z = _dual_point(h, center, trial_shift)
            if trial_z is not None:
                trial_objective = _dual_objective(h, trial_z, trial_lam)
                trial_residual = dom.A @ trial_z - dom.b
                if trial_objective < objective or np.max(np.abs(trial_residual)) < error:
                    break
            scale *= 0.5
        else:
            raise ConvergenceError("dual newton line search stalled", error, iteration)
        lam, z, objective, residual = trial_lam, trial_z, trial_objective, trial_residual
    raise ConvergenceError(
        "dual newton did not converge",
        float(np.max(np.abs(residual))),
        NEWTON_MAX_ITERATIONS,
    )


def _equality_step(
    gap: np.ndarray, constraints: np.ndarray
) -> np.ndarray:
    """Solve the equality-constrained step min ½‖p − gap‖² s.t. constraints·p = 0.

    Args:
        gap: target displacement v − z.
        constraints: active constraint rows.

    Returns:
        The step p.
    """
    n = len(gap)
    k = constraints.shape[0]
    if k == 0:
        return gap.copy()
    kkt = np.block([[np.eye(n), constraints.T], [constraints, np.zeros((k, k))]])
    rhs = np.r_[gap, np.zeros(k)]
    return np.linalg.lstsq(kkt, rhs, rcond=None)[0][:n]


def prox_euclidean_polyhedral(dom: Domain, x: Point, y: Point) -> np.ndarray:
    """Project x + y onto {z ≥ lower : Az = b} with a primal active-set method.

    Args:
        dom: a domain without finite upper bounds.
        x: the prox center.
        y: the dual vector.

    Returns:
        The projection, with bound-active coordinates set exactly to their bound.

    Raises:
        DomainError: if the domain has finite upper bounds.
        ConvergenceError: if the KKT conditions are not met.
    """
    if np.any(np.isfinite(dom.upper)):
        raise DomainError(f"{dom} has upper bounds, use the closed-form prox")
    target = np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
    z = dom.slater_point.astype(float).copy()
    working: list[int] = []
    eye = np.eye(dom.dim)
    for iteration in range(ACTIVE_SET_MAX_ITERATIONS):
        constraints = np.vstack([dom.A, eye[working]])
        p = _equality_step(target - z, constraints)
        if np.linalg.norm(p) <= 1e-13 * (1.0 + np.linalg.norm(z)):
            gradient = z - target
            basis = np.hstack([dom.A.T, eye[:, working]])
            if basis.shape[1]:
                multipliers = np.linalg.lstsq(basis, gradient, rcond=None)[0]
            else:
                multipliers = np.zeros(0)
            bound_multipliers = multipliers[dom.A.shape[0] :]
            if not working or np.min(bound_multipliers) >= -1e-12:
                stationarity = float(np.linalg.norm(gradient - basis @ multipliers))
                if stationarity > KKT_TOLERANCE:
                    raise ConvergenceError(
                        "active-set projection off KKT", stationarity, iteration
                    )
                z[working] = dom.lower[working]
                logger.debug("active-set projection done in %d iterations", iteration)
                return z
            released = working[int(np.argmin(bound_multipliers))]
            working.remove(released)
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(p < 0, (z - dom.lower) / -p, np.inf)
        ratios[working] = np.inf
        blocking = int(np.argmin(ratios))
        length = min(1.0, float(ratios[blocking]))
        z = z + length * p
        if length < 1.0:
            z[blocking] = dom.lower[blocking]
            working.append(blocking)
    raise ConvergenceError(
        "active-set projection did not converge",
        float(np.linalg.norm(z - target)),
        ACTIVE_SET_MAX_ITERATIONS,
    )


def prox(h: Regularizer, x: Point, y: Point) -> np.ndarray:
    """Apply the prox engine matched to the regularizer's kernel and domain.

    Args:
        h: the regularizer.
        x: the prox center.
        y: the dual vector.

    Returns:
        The prox point.

    Raises:
        UnsupportedCombinationError: if no engine handles the pair.
    """
    dom = h.domain
    if not dom.is_polyhedral:
        return prox_closed_form(h, x, y)
    if isinstance(h.kernel, EntropyKernel) and dom.kind == "simplex":
        return prox_simplex_entropy(x, y)
    if isinstance(h.kernel, EuclideanKernel):
        return prox_euclidean_polyhedral(dom, x, y)
    if h.kernel.steep_lo and h.kernel.lo == 0:
        return prox_polyhedral_dual(h, dom, x, y)
    raise UnsupportedCombinationError(f"no prox engine for {h.kernel.name} on {dom}")
