# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Feasible sets in normal form and the sharpness structure of their solutions."""

import itertools
import logging
import math
import typing

import numpy as np
import scipy.linalg
import scipy.optimize

from exceptions import (
    CombinatorialLimitError,
    DegenerateError,
    DomainError,
    InfeasibleError,
    NotASolution,
    NotDecomposableError,
)

logger = logging.getLogger(__name__)

ACTIVE_TOLERANCE = 1e-9
EQUALITY_TOLERANCE = 1e-10
SLATER_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-8
SHARP_TOLERANCE = 1e-9
MAX_ENUMERATED_ACTIVE = 12
RANDOM_DIRECTIONS = 32

VectorField = typing.Callable[[np.ndarray], np.ndarray]


class Domain:
    """A feasible set {x : lower ≤ x ≤ upper, Ax = b}.

    Only equality constraints are accepted; inequality-constrained sets are brought
    to this form with slack variables.

    Attributes:
        kind: one of ``interval``, ``orthant_box``, ``simplex`` or ``polyhedron``.
        dim: number of coordinates.
        lower: coordinate-wise lower bounds.
        upper: coordinate-wise upper bounds (inf when absent).
        A: constraint matrix, with zero rows for boxes.
        b: right-hand side.
        slater_point: a feasible point strictly above the lower bounds.
    """

    def __init__(  # pylint: disable=too-many-arguments
        self,
        kind: str,
        lower: np.ndarray,
        upper: np.ndarray,
        A: np.ndarray,  # noqa: N803
        b: np.ndarray,
        slater_point: np.ndarray,
    ):
        """Initialize the domain, prefer the named constructors.

        Args:
            kind: domain kind.
            lower: lower bounds.
            upper: upper bounds.
            A: constraint matrix.
            b: right-hand side.
            slater_point: strictly feasible point.
        """
        self.kind = kind
        self.dim = len(lower)
        self.lower = lower
        self.upper = upper
        self.A = A  # pylint: disable=invalid-name
        self.b = b
        self.slater_point = slater_point
        self._kernel_basis: np.ndarray | None = None

    @classmethod
    def interval(cls, lo: float = 0.0, hi: float = math.inf, dim: int = 1) -> "Domain":
        """Build the box [lo, hi]^dim.

        Args:
            lo: lower end.
            hi: upper end.
            dim: number of coordinates.

        Returns:
            The domain.

        Raises:
            DomainError: if the interval is empty.
        """
        if not lo < hi or dim < 1:
            raise DomainError(f"invalid interval [{lo}, {hi}]^{dim}")
        lower = np.full(dim, float(lo))
        upper = np.full(dim, float(hi))
        center = lo + 0.5 * (min(hi, lo + 2.0) - lo)
        return cls("interval", lower, upper, np.zeros((0, dim)), np.zeros(0), np.full(dim, center))

    @classmethod
    def orthant_box(cls, dim: int, upper: typing.Sequence[float] | None = None) -> "Domain":
        """Build the nonnegative orthant, optionally capped by upper bounds.

        Args:
            dim: number of coordinates.
            upper: optional upper bounds.

        Returns:
            The domain.

        Raises:
            DomainError: if the bounds are invalid.
        """
        caps = np.full(dim, math.inf) if upper is None else np.asarray(upper, dtype=float)
        if dim < 1 or caps.shape != (dim,) or np.any(~(caps > 0)):
            raise DomainError(f"invalid orthant box of dimension {dim} with upper {upper}")
        slater = np.minimum(0.5 * caps, 1.0)
        return cls("orthant_box", np.zeros(dim), caps, np.zeros((0, dim)), np.zeros(0), slater)

    @classmethod
    def simplex(cls, dim: int) -> "Domain":
        """Build the probability simplex of ℝ^dim.

        Args:
            dim: number of coordinates.

        Returns:
            The domain.

        Raises:
            DomainError: if dim is smaller than 2.
        """
        if dim < 2:
            raise DomainError(f"simplex needs at least 2 coordinates, got {dim}")
        return cls(
            "simplex",
            np.zeros(dim),
            np.full(dim, math.inf),
            np.ones((1, dim)),
            np.ones(1),
            np.full(dim, 1.0 / dim),
        )

    @classmethod
    def polyhedron(
        cls,
        A: typing.Sequence[typing.Sequence[float]],  # noqa: N803
        b: typing.Sequence[float],
        slater_point: typing.Sequence[float] | None = None,
    ) -> "Domain":
        """Build the polyhedron {x ≥ 0 : Ax = b}.

        Args:
            A: constraint matrix, one row per constraint.
            b: right-hand side.
            slater_point: a strictly positive feasible point, found by an LP when omitted.

        Returns:
            The domain.

        Raises:
            DomainError: if the data are inconsistent or there is no Slater point.
        """
        matrix = np.atleast_2d(np.asarray(A, dtype=float))
        rhs = np.atleast_1d(np.asarray(b, dtype=float))
        if matrix.ndim != 2 or rhs.shape != (matrix.shape[0],):
            raise DomainError(f"constraint matrix {matrix.shape} does not match rhs {rhs.shape}")
        dim = matrix.shape[1]
        if slater_point is None:
            point = _find_slater_point(matrix, rhs)
        else:
            point = np.asarray(slater_point, dtype=float)
            if point.shape != (dim,) or np.any(point <= 0):
                raise DomainError(f"slater point {slater_point} is not strictly positive")
            if np.max(np.abs(matrix @ point - rhs), initial=0.0) > SLATER_TOLERANCE * max(
                1.0, float(np.max(np.abs(rhs), initial=0.0))
            ):
                raise DomainError(f"slater point {slater_point} violates Ax = b")
        return cls("polyhedron", np.zeros(dim), np.full(dim, math.inf), matrix, rhs, point)

    def __str__(self) -> str:
        """Describe the domain.

        Returns:
            A short description.
        """
        if self.kind == "interval":
            return f"interval[{self.lower[0]:g}, {self.upper[0]:g}]^{self.dim}"
        if self.kind == "polyhedron":
            return f"polyhedron({self.A.shape[0]}x{self.dim})"
        return f"{self.kind}({self.dim})"

    __repr__ = __str__

    @property
    def is_polyhedral(self) -> bool:
        """Whether the domain carries equality constraints."""
        return self.A.shape[0] > 0

    def coordinate_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the bounds each coordinate is confined to.

        Returns:
            Lower and upper bounds, including those implied by the simplex constraint.
        """
        if self.kind == "simplex":
            return self.lower, np.ones(self.dim)
        return self.lower, self.upper

    def contains(self, x: typing.Sequence[float]) -> bool:
        """Test feasibility.

        Args:
            x: a point.

        Returns:
            Whether x satisfies the bounds and ‖Ax − b‖∞ ≤ 1e-10.
        """
        point = np.asarray(x, dtype=float)
        if point.shape != (self.dim,) or not np.all(np.isfinite(point)):
            return False
        if np.any(point < self.lower) or np.any(point > self.upper):
            return False
        return bool(np.max(np.abs(self.A @ point - self.b), initial=0.0) <= EQUALITY_TOLERANCE)

    def check_point(self, x: typing.Sequence[float] | float) -> np.ndarray:
        """Convert a point to an array and check it is feasible.

        Args:
            x: a point, scalars are accepted for one-dimensional domains.

        Returns:
            The point as a float array.

        Raises:
            InfeasibleError: if x is not feasible.
        """
        point = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.contains(point):
            raise InfeasibleError(f"{point.tolist()} is not a feasible point of {self}")
        return point

    def clip(self, points: np.ndarray) -> np.ndarray:
        """Clip points to the coordinate bounds.

        Args:
            points: points, one per row or a single point.

        Returns:
            The clipped points.
        """
        return np.clip(points, self.lower, self.upper)

    def kernel_basis(self) -> np.ndarray:
        """Return an orthonormal basis of ker A.

        Returns:
            Matrix whose columns span ker A.
        """
        if self._kernel_basis is None:
            self._kernel_basis = (
                scipy.linalg.null_space(self.A) if self.is_polyhedral else np.eye(self.dim)
            )
        return self._kernel_basis

    def project_direction(self, d: np.ndarray) -> np.ndarray:
        """Project a direction onto ker A.

        Args:
            d: a direction.

        Returns:
            The orthogonal projection of d onto ker A.
        """
        basis = self.kernel_basis()
        return basis @ (basis.T @ np.asarray(d, dtype=float))

    def max_step(self, p: np.ndarray, d: np.ndarray) -> float:
        """Return the largest s with p + s·d inside the coordinate bounds.

        Args:
            p: a feasible point.
            d: a direction in ker A.

        Returns:
            The step, inf when the ray never leaves the bounds.
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            down = np.where(d < 0, (p - self.lower) / -d, math.inf)
            up = np.where(d > 0, (self.upper - p) / d, math.inf)
        return float(min(np.min(down), np.min(up)))

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a point strictly inside the domain.

        Unbounded coordinates are sampled within one unit of the lower bound.

        Args:
            rng: random generator.

        Returns:
            The point.
        """
        if self.kind == "simplex":
            return rng.dirichlet(np.ones(self.dim))
        if not self.is_polyhedral:
            top = np.minimum(self.upper, self.lower + 1.0)
            return self.lower + (top - self.lower) * rng.uniform(0.02, 0.98, self.dim)
        direction = self.project_direction(rng.standard_normal(self.dim))
        norm = np.linalg.norm(direction)
        if norm == 0:
            return self.slater_point.copy()
        direction /= norm
        reach = min(self.max_step(self.slater_point, direction), 1.0)
        return self.slater_point + rng.uniform(0.0, 0.98) * reach * direction

    def feasible_directions(
        self, p: np.ndarray, *, n_random: int = RANDOM_DIRECTIONS, seed: int = 0
    ) -> list[np.ndarray]:
        """List unit directions along which p can move inside the domain.

        The list holds the signed coordinate directions projected onto ker A and
        n_random directions towards random interior points.

        Args:
            p: a feasible point.
            n_random: number of random directions.
            seed: random seed.

        Returns:
            Unit directions with a positive feasible step.
        """
        candidates = []
        for i, sign in itertools.product(range(self.dim), (1.0, -1.0)):
            unit = np.zeros(self.dim)
            unit[i] = sign
            candidates.append(self.project_direction(unit))
        rng = np.random.default_rng(seed)
        candidates.extend(self.random_point(rng) - p for _ in range(n_random))
        directions = []
        for d in candidates:
            norm = np.linalg.norm(d)
            if norm <= 1e-12:
                continue
            d = d / norm
            if self.max_step(p, d) > 0:
                directions.append(d)
        return directions


def _find_slater_point(A: np.ndarray, b: np.ndarray) -> np.ndarray:  # noqa: N803
    """Find a strictly positive point of {Ax = b} by maximizing its smallest coordinate.

    Args:
        A: constraint matrix.
        b: right-hand side.

    Returns:
        The point.

    Raises:
        DomainError: if the polyhedron has no strictly positive point.
    """
    m, n = A.shape
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    a_eq = np.hstack([A, np.zeros((m, 1))])
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    bounds = [(0, None)] * n + [(None, 1.0)]
    result = _linprog(cost, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=b, bounds=bounds)
    if result.status != 0 or -result.fun <= SLATER_TOLERANCE:
        raise DomainError("polyhedron has no strictly positive feasible point")
    logger.debug("slater point %s with margin %s", result.x[:n], -result.fun)
    return result.x[:n]


class SlackDecomposition(typing.NamedTuple):
    """Decomposition g = Σ σ_i e_i + Aᵀλ over the active coordinates.

    Attributes:
        slacks: σ_i per active coordinate.
        multipliers: λ.
        residual: norm of what the decomposition fails to explain.
    """

    slacks: dict[int, float]
    multipliers: np.ndarray
    residual: float


class CaseA(typing.NamedTuple):
    """Dominance certificate: x_i ≤ constant·max_{j∈I} x_j over the domain.

    Attributes:
        index: the dominated active coordinate i.
        constant: the bound, floored at 1.
        bound: the bound returned by the LP.
    """

    index: int
    constant: float
    bound: float


class CaseB(typing.NamedTuple):
    """Kernel certificate: z ∈ ker A, z = 0 on I and 1 ≤ z ≤ constant on the rest.

    Attributes:
        vector: the certificate z.
        constant: max(1, ‖z‖, ‖z‖∞).
    """

    vector: np.ndarray
    constant: float


class SolutionProfile(typing.NamedTuple):
    """Sharpness structure of a solution.

    Attributes:
        solution: the solution x*.
        active_set: active coordinates.
        slacks: slack coefficient per active coordinate.
        multipliers: multipliers of the equality constraints.
        residual: decomposition residual.
        sharps: active coordinates with positive slack.
        flats: active coordinates with zero slack.
        delta: the sharpness, None without sharp coordinates.
        is_field_sharp: whether there are no flat coordinates.
        is_extreme: whether x* is an extreme point.
        delta_eff: the effective sharpness.
        separation_constant: separation constant of the domain at x*.
    """

    solution: np.ndarray
    active_set: tuple[int, ...]
    slacks: dict[int, float]
    multipliers: np.ndarray
    residual: float
    sharps: tuple[int, ...]
    flats: tuple[int, ...]
    delta: float | None
    is_field_sharp: bool
    is_extreme: bool
    delta_eff: float | None
    separation_constant: float | None


def active_set(
    dom: Domain, x: typing.Sequence[float], tol: float = ACTIVE_TOLERANCE
) -> tuple[int, ...]:
    """Return the coordinates sitting on their lower bound.

    Args:
        dom: the domain.
        x: a feasible point.
        tol: absolute tolerance.

    Returns:
        Sorted active coordinate indices.
    """
    point = dom.check_point(x)
    return tuple(int(i) for i in np.flatnonzero(point - dom.lower <= tol))


def _decompose(dom: Domain, g: np.ndarray, active: typing.Sequence[int]) -> SlackDecomposition:
    """Find σ ≥ 0 and λ minimizing ‖g − Σ σ_i e_i − Aᵀλ‖ and make σ canonical.

    Args:
        dom: the domain.
        g: the dual vector.
        active: active coordinates.

    Returns:
        The decomposition.

    Raises:
        NotASolution: if the residual exceeds the tolerance.
    """
    active = list(active)
    k, m = len(active), dom.A.shape[0]
    columns = np.hstack([np.eye(dom.dim)[:, active], dom.A.T])
    if k + m == 0:
        sigma, lam, fitted = np.zeros(0), np.zeros(0), np.zeros(dom.dim)
    else:
        solution = scipy.optimize.lsq_linear(
            columns,
            g,
            bounds=(np.r_[np.zeros(k), np.full(m, -np.inf)], np.full(k + m, np.inf)),
            method="bvls",
        )
        sigma, lam = solution.x[:k], solution.x[k:]
        fitted = columns @ solution.x
    residual = float(np.linalg.norm(g - fitted))
    if residual > RESIDUAL_TOLERANCE:
        raise NotASolution(f"F(x*) is not in the normal cone (residual {residual:.3e})", residual)
    if k == 0:
        return SlackDecomposition({}, lam, residual)
    sigma, lam = _canonical_slacks(columns, fitted, k, m, sigma, lam)
    return SlackDecomposition(
        {i: float(s) for i, s in zip(active, sigma)}, lam, residual
    )


def _canonical_slacks(  # pylint: disable=too-many-arguments
    columns: np.ndarray,
    fitted: np.ndarray,
    k: int,
    m: int,
    sigma: np.ndarray,
    lam: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Pick the decomposition that maximizes the smallest positive slack.

    Each slack is first maximized on its own to find the coordinates that can be
    sharp, then the smallest of those is maximized jointly.

    Args:
        columns: the matrix [E_active | Aᵀ].
        fitted: the exactly decomposable part of g.
        k: number of active coordinates.
        m: number of equality constraints.
        sigma: a feasible σ.
        lam: the matching λ.

    Returns:
        The canonical σ and λ.
    """
    bounds = [(0, None)] * k + [(None, None)] * m
    can_be_sharp = []
    for i in range(k):
        cost = np.zeros(k + m)
        cost[i] = -1.0
        result = _linprog(cost, A_eq=columns, b_eq=fitted, bounds=bounds)
        if result.status == 0 and -result.fun > SHARP_TOLERANCE:
            can_be_sharp.append(i)
    if not can_be_sharp:
        return np.zeros(k), lam
    cost = np.zeros(k + m + 1)
    cost[-1] = -1.0
    a_ub = np.zeros((len(can_be_sharp), k + m + 1))
    for row, i in enumerate(can_be_sharp):
        a_ub[row, i] = -1.0
        a_ub[row, -1] = 1.0
    result = _linprog(
        cost,
        A_ub=a_ub,
        b_ub=np.zeros(len(can_be_sharp)),
        A_eq=np.hstack([columns, np.zeros((columns.shape[0], 1))]),
        b_eq=fitted,
        bounds=bounds + [(None, None)],
    )
    if result.status != 0:  # pragma: nocover
        logger.warning("slack canonicalization failed (%s), keeping least squares", result.message)
        return sigma, lam
    canonical = np.maximum(result.x[:k], 0.0)
    flat = np.ones(k, dtype=bool)
    flat[can_be_sharp] = False
    canonical[flat] = 0.0
    return canonical, result.x[k : k + m]


def slack_decomposition(
    dom: Domain, g: typing.Sequence[float], active: typing.Sequence[int]
) -> tuple[dict[int, float], float]:
    """Decompose a dual vector into active normals plus a row-space component.

    Solves min over σ ≥ 0 and λ of ‖g − Σ_{i∈active} σ_i e_i − Aᵀλ‖².
    Among exact decompositions the one maximizing the smallest positive slack is returned.

    Args:
        dom: the domain.
        g: the dual vector, usually F(x*).
        active: active coordinates.

    Returns:
        The slack per active coordinate and the residual norm.
    """
    decomposition = _decompose(dom, np.asarray(g, dtype=float), active)
    return decomposition.slacks, decomposition.residual


def _linprog(cost: np.ndarray, **kwargs: typing.Any) -> scipy.optimize.OptimizeResult:
    """Run HiGHS on a small LP.

    Args:
        cost: objective coefficients.
        kwargs: constraint data passed to linprog.

    Returns:
        The LP result.
    """
    return scipy.optimize.linprog(cost, method="highs", **kwargs)


def _kernel_certificate(
    dom: Domain, active: list[int], subset: list[int]
) -> CaseB | None:
    """Look for z ∈ ker A with z = 0 on the subset and z ≥ 1 on the other active coordinates.

    Args:
        dom: the domain.
        active: active coordinates.
        subset: the subset I.

    Returns:
        The certificate minimizing ‖z‖∞, or None when the system is infeasible.
    """
    rows = [dom.A] + [np.eye(dom.dim)[subset]] if subset else [dom.A]
    stacked = np.vstack(rows)
    basis = scipy.linalg.null_space(stacked) if stacked.shape[0] else np.eye(dom.dim)
    if basis.shape[1] == 0:
        return None
    rest = [i for i in active if i not in subset]
    r = basis.shape[1]
    # variables (w, t): minimize t with z = basis @ w
    cost = np.r_[np.zeros(r), 1.0]
    a_ub = np.vstack(
        [
            np.hstack([-basis[rest], np.zeros((len(rest), 1))]),
            np.hstack([basis, -np.ones((dom.dim, 1))]),
            np.hstack([-basis, -np.ones((dom.dim, 1))]),
        ]
    )
    b_ub = np.r_[-np.ones(len(rest)), np.zeros(2 * dom.dim)]
    result = _linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * (r + 1))
    if result.status != 0:
        return None
    z = basis @ result.x[:r]
    z[subset] = 0.0
    smallest = float(np.min(z[rest]))
    if smallest < 1.0:
        z /= smallest
    constant = max(1.0, float(np.linalg.norm(z)), float(np.max(np.abs(z))))
    return CaseB(z, constant)


def _dominance_certificate(
    dom: Domain, active: list[int], subset: list[int]
) -> CaseA | None:
    """Bound an active coordinate by the largest coordinate of the subset over the tangent cone.

    Args:
        dom: the domain.
        active: active coordinates.
        subset: the subset I.

    Returns:
        The certificate with the smallest bound, None if every LP is unbounded.
    """
    basis = dom.kernel_basis()
    r = basis.shape[1]
    a_ub = np.vstack([-basis[active], basis[subset]]) if subset else -basis[active]
    b_ub = np.r_[np.zeros(len(active)), np.ones(len(subset))]
    best: CaseA | None = None
    for i in active:
        if i in subset:
            continue
        result = _linprog(-basis[i], A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * r)
        if result.status != 0:
            continue
        bound = max(0.0, float(-result.fun))
        if best is None or bound < best.bound:
            best = CaseA(i, max(1.0, bound), bound)
    return best


def separation_certificate(
    dom: Domain, x_star: typing.Sequence[float], I: typing.Collection[int]  # noqa: N803,E741
) -> CaseA | CaseB:
    """Certify one side of the separation dichotomy for a subset of the active set.

    The kernel certificate is attempted first; when its system is infeasible the
    dominance bound is computed instead.

    Args:
        dom: the domain.
        x_star: the solution.
        I: a subset of the active coordinates.

    Returns:
        The certificate.

    Raises:
        DegenerateError: if I is the whole active set or the dichotomy fails.
        ValueError: if I is not a subset of the active set.
    """
    active = list(active_set(dom, x_star))
    subset = sorted(set(I))
    if not set(subset) <= set(active):
        raise ValueError(f"{subset} is not a subset of the active set {active}")
    if len(subset) == len(active):
        raise DegenerateError("the subset covers the whole active set")
    certificate = _kernel_certificate(dom, active, subset)
    if certificate is not None:
        return certificate
    dominance = _dominance_certificate(dom, active, subset)
    if dominance is None:  # pragma: nocover
        raise DegenerateError(f"no separation certificate for subset {subset}")
    return dominance


def separation_constant(dom: Domain, x_star: typing.Sequence[float]) -> float:
    """Compute the separation constant as the largest certificate bound.

    Args:
        dom: the domain.
        x_star: the solution.

    Returns:
        c ≥ 1.

    Raises:
        CombinatorialLimitError: if the active set has more than 12 coordinates.
    """
    active = active_set(dom, x_star)
    if len(active) > MAX_ENUMERATED_ACTIVE:
        raise CombinatorialLimitError(
            f"{len(active)} active coordinates exceed the limit {MAX_ENUMERATED_ACTIVE}"
        )
    constant = 1.0
    for size in range(len(active)):
        for subset in itertools.combinations(active, size):
            certificate = separation_certificate(dom, x_star, subset)
            constant = max(constant, certificate.constant)
    return constant


def is_extreme_point(dom: Domain, x: typing.Sequence[float]) -> bool:
    """Test whether the active normals and the rows of A span the whole space.

    Args:
        dom: the domain.
        x: a feasible point.

    Returns:
        Whether x is an extreme point.
    """
    active = list(active_set(dom, x))
    upper_active = np.flatnonzero(dom.upper - dom.check_point(x) <= ACTIVE_TOLERANCE).tolist()
    normals = np.vstack([np.eye(dom.dim)[active + upper_active], dom.A])
    return bool(normals.shape[0] and np.linalg.matrix_rank(normals) == dom.dim)


def classify_solution(
    dom: Domain, F: VectorField, x_star: typing.Sequence[float]  # noqa: N803
) -> SolutionProfile:
    """Assemble the sharpness profile of a solution.

    Args:
        dom: the domain.
        F: the vector field.
        x_star: the solution.

    Returns:
        The profile.

    Raises:
        NotDecomposableError: if the solution sits on an upper bound.
    """
    point = dom.check_point(x_star)
    if np.any(dom.upper - point <= ACTIVE_TOLERANCE):
        raise NotDecomposableError(
            "the solution sits on an upper bound, reflect the coordinate to the lower end"
        )
    active = active_set(dom, point)
    decomposition = _decompose(dom, np.asarray(F(point), dtype=float), active)
    sharps = tuple(i for i in active if decomposition.slacks[i] > 0)
    flats = tuple(i for i in active if decomposition.slacks[i] == 0)
    delta = min((decomposition.slacks[i] for i in sharps), default=None)
    constant = separation_constant(dom, point) if len(active) <= MAX_ENUMERATED_ACTIVE else None
    if delta is None or not flats:
        delta_eff = delta
    else:
        if constant is None:
            raise CombinatorialLimitError("separation constant needed for the effective sharpness")
        delta_eff = delta / (constant * len(active))
    profile = SolutionProfile(
        solution=point,
        active_set=active,
        slacks=decomposition.slacks,
        multipliers=decomposition.multipliers,
        residual=decomposition.residual,
        sharps=sharps,
        flats=flats,
        delta=delta,
        is_field_sharp=not flats,
        is_extreme=is_extreme_point(dom, point),
        delta_eff=delta_eff,
        separation_constant=constant,
    )
    logger.info(
        "solution profile: active %s, sharp %s, flat %s, delta %s, delta_eff %s",
        active,
        sharps,
        flats,
        delta,
        delta_eff,
    )
    return profile
