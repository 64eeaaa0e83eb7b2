# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Scalar Bregman kernels and the decomposable regularizers they induce."""

# Kernel methods are vectorized and unchecked, the module level functions validate.
# flake8: noqa: DCO060

import logging
import math
import typing

import numpy as np
import scipy.optimize
import scipy.special

from domains import Domain
from exceptions import (
    BoundaryDerivativeError,
    DomainError,
    ProxDomainError,
    ProxUndefinedError,
    UnsupportedKernelError,
)

logger = logging.getLogger(__name__)

GRID_LEVELS = 40

_SERIES_THRESHOLD = 1e-3


class BoundaryClass(typing.NamedTuple):
    """Growth class of a kernel derivative at the lower end of its domain.

    Attributes:
        kind: one of ``euclidean_like``, ``entropy_like`` or ``power_like``.
        nu: the growth order of a ``power_like`` kernel, None otherwise.
    """

    kind: str
    nu: float | None = None

    def __str__(self) -> str:
        """Render the class the way reports print it.

        Returns:
            The kind, with the growth order for power-like kernels.
        """
        if self.kind == "power_like":
            return f"power_like({self.nu:g})"
        return self.kind


EUCLIDEAN_LIKE = BoundaryClass("euclidean_like")
ENTROPY_LIKE = BoundaryClass("entropy_like")


def power_like(nu: float) -> BoundaryClass:
    """Build a power-like boundary class.

    Args:
        nu: growth order in (0, 1).

    Returns:
        The boundary class.

    Raises:
        ValueError: if nu is outside (0, 1).
    """
    if not 0 < nu < 1:
        raise ValueError(f"power-like growth order must lie in (0, 1), got {nu}")
    return BoundaryClass("power_like", nu)


class BregmanKernel:
    """A strictly convex scalar kernel θ on a closed interval.

    Subclasses implement the vectorized primitives. The default inverse gradient
    is a bracketed root search, built-in kernels override it with closed forms.

    Attributes:
        name: kernel identifier.
        lo: lower end of the scalar domain.
        hi: upper end of the scalar domain.
        steep_lo: whether θ' diverges at the lower end.
        steep_hi: whether θ' diverges at the upper end.
        boundary_class: growth class at the lower end, None when unknown.
    """

    name: str = "kernel"
    lo: float = 0.0
    hi: float = math.inf
    steep_lo: bool = False
    steep_hi: bool = False
    boundary_class: BoundaryClass | None = None

    @property
    def steep(self) -> bool:
        """Whether θ' diverges at the lower end of the domain."""
        return self.steep_lo

    @property
    def boundary_exponent(self) -> float:
        """Legendre exponent at a steep boundary point.

        Raises:
            UnsupportedKernelError: for kernels without an analytic exponent.
        """
        raise UnsupportedKernelError(
            f"no analytic Legendre exponent for kernel {self.name}, use the empirical estimator"
        )

    def value(self, x: np.ndarray) -> np.ndarray:
        """Evaluate θ coordinate-wise.

        Args:
            x: points in the scalar domain.
        """
        raise NotImplementedError  # pragma: nocover

    def grad(self, x: np.ndarray) -> np.ndarray:
        """Evaluate θ' coordinate-wise.

        Args:
            x: points in the scalar domain.
        """
        raise NotImplementedError  # pragma: nocover

    def hess(self, x: np.ndarray) -> np.ndarray:
        """Evaluate θ'' coordinate-wise.

        Args:
            x: points in the scalar domain.
        """
        raise NotImplementedError  # pragma: nocover

    def grad_inverse(self, u: np.ndarray) -> np.ndarray:
        """Solve θ'(z) = u coordinate-wise.

        Values of u below θ'(lo) (or above θ'(hi)) of a non-steep end map to that end.

        Args:
            u: dual values.

        Returns:
            The primal points z.
        """
        u = np.asarray(u, dtype=float)
        return np.array([self._invert_scalar(float(v)) for v in u.ravel()]).reshape(u.shape)

    def _invert_scalar(self, u: float) -> float:
        """Bracket and solve θ'(z) = u for a single value.

        Args:
            u: dual value.

        Returns:
            The primal point.

        Raises:
            ProxUndefinedError: if no bracket contains the solution.
        """
        def grad(z: float) -> float:
            with np.errstate(divide="ignore", invalid="ignore"):
                return float(self.grad(np.array([z]))[0])

        if math.isfinite(self.lo) and not self.steep_lo and grad(self.lo) >= u:
            return self.lo
        if math.isfinite(self.hi) and not self.steep_hi and grad(self.hi) <= u:
            return self.hi
        if math.isinf(self.hi):
            mid = self.lo + 1.0 if math.isfinite(self.lo) else 0.0
        elif math.isinf(self.lo):
            mid = self.hi - 1.0
        else:
            mid = 0.5 * (self.lo + self.hi)
        a, b = mid, mid
        for k in range(1, 2100):
            if grad(a) <= u:
                break
            a = self.lo + (mid - self.lo) * 2.0**-k if math.isfinite(self.lo) else mid - 2.0**k
        for k in range(1, 2100):
            if grad(b) >= u:
                break
            b = self.hi - (self.hi - mid) * 2.0**-k if math.isfinite(self.hi) else mid + 2.0**k
        if grad(a) > u or grad(b) < u:
            raise ProxUndefinedError(f"θ' of {self.name} never reaches {u}")
        if a == b:
            return a
        return scipy.optimize.brentq(
            lambda z: grad(z) - u, a, b, xtol=1e-300, rtol=1e-15, maxiter=2000
        )

    def mirror_step(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Move x along the dual vector y: z = (θ')⁻¹(θ'(x) + y).

        Args:
            x: primal points in the interior of the domain.
            y: dual increments.

        Returns:
            The unconstrained mirror image, clipped to the scalar domain.
        """
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self.grad_inverse(self.grad(x) + y)

    def conjugate_at(self, z: np.ndarray) -> np.ndarray:
        """Evaluate the convex conjugate θ* at θ'(z).

        Args:
            z: primal points in the interior of the domain.

        Returns:
            z θ'(z) − θ(z), coordinate-wise.
        """
        return z * self.grad(z) - self.value(z)

    def divergence(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Evaluate θ(p) − θ(x) − θ'(x)(p − x) coordinate-wise.

        Args:
            p: reference points.
            x: base points.

        Returns:
            Coordinate divergences; 0 where p equals x, inf when x is a steep end.
        """
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            raw = self.value(p) - self.value(x) - self.grad(x) * (p - x)
        return np.where(p == x, 0.0, np.where(np.isnan(raw), np.inf, np.maximum(raw, 0.0)))

    def __repr__(self) -> str:
        """Represent the kernel by name.

        Returns:
            The representation.
        """
        return f"<{type(self).__name__} {self.name}>"


class EuclideanKernel(BregmanKernel):
    """θ(x) = x²/2, the kernel of the Euclidean projection."""

    name = "euclidean"
    lo = -math.inf
    hi = math.inf
    boundary_class = EUCLIDEAN_LIKE

    @property
    def boundary_exponent(self) -> float:
        """Legendre exponent at any boundary point."""
        return 0.0

    def value(self, x: np.ndarray) -> np.ndarray:
        return 0.5 * np.square(x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) * 1.0

    def hess(self, x: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(x, dtype=float))

    def grad_inverse(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u, dtype=float) * 1.0

    def mirror_step(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) + y

    def conjugate_at(self, z: np.ndarray) -> np.ndarray:
        return 0.5 * np.square(z)

    def divergence(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        return 0.5 * np.square(np.asarray(p, dtype=float) - x)


class EntropyKernel(BregmanKernel):
    """θ(x) = x log x on the half line."""

    name = "entropy"
    steep_lo = True
    boundary_class = ENTROPY_LIKE

    @property
    def boundary_exponent(self) -> float:
        """Legendre exponent at 0."""
        return 0.5

    def value(self, x: np.ndarray) -> np.ndarray:
        return scipy.special.xlogy(x, x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 + np.log(x)

    def hess(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / np.asarray(x, dtype=float)

    def grad_inverse(self, u: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(u, dtype=float) - 1.0)

    def mirror_step(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(x, dtype=float) * np.exp(y)

    def conjugate_at(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) * 1.0

    def divergence(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = (p - x) / x
            series = x * t * t * (0.5 - t / 6.0 + t * t / 12.0)
            direct = scipy.special.xlogy(p, p) - scipy.special.xlogy(p, x) - p + x
            out = np.where(np.abs(t) < _SERIES_THRESHOLD, series, direct)
            out = np.where(x == 0.0, np.inf, out)
        return np.where(p == x, 0.0, np.maximum(out, 0.0))


class TsallisKernel(BregmanKernel):
    """θ(x) = (x − x^q)/(q(1 − q)) on the box [0, upper].

    For q < 1 the kernel is steep at 0 and 1-strongly convex as long as upper ≤ 1.
    For q > 1 it is non-steep and behaves like the Euclidean kernel at 0.

    Attributes:
        q: the Tsallis parameter.
    """

    def __init__(self, q: float, upper: float = 1.0):
        """Initialize the kernel.

        Args:
            q: Tsallis parameter, positive and different from 1.
            upper: right end of the working box.

        Raises:
            ValueError: if the parameters are out of range.
        """
        if q <= 0 or q == 1:
            raise ValueError(f"tsallis parameter must be positive and not 1, got {q}")
        if upper <= 0:
            raise ValueError(f"tsallis box must have a positive upper end, got {upper}")
        if upper > 1:
            logger.warning("tsallis kernel on [0, %s] is not 1-strongly convex", upper)
        self.q = q
        self.hi = upper
        self.name = f"tsallis:q={q:g}" if upper == 1.0 else f"tsallis:q={q:g},upper={upper:g}"
        self.steep_lo = q < 1
        self.boundary_class = power_like(1.0 - q) if q < 1 else EUCLIDEAN_LIKE

    @property
    def boundary_exponent(self) -> float:
        """Legendre exponent at 0."""
        return max(0.0, 1.0 - self.q / 2.0)

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - np.power(x, self.q)) / (self.q * (1.0 - self.q))

    def grad(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return (1.0 - self.q * np.power(np.asarray(x, dtype=float), self.q - 1.0)) / (
                self.q * (1.0 - self.q)
            )

    def hess(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.power(np.asarray(x, dtype=float), self.q - 2.0)

    def grad_inverse(self, u: np.ndarray) -> np.ndarray:
        base = (1.0 - self.q * (1.0 - self.q) * np.asarray(u, dtype=float)) / self.q
        return self._from_base(base)

    def _from_base(self, base: np.ndarray) -> np.ndarray:
        """Map z^(q−1) back to z.

        Args:
            base: values of z^(q−1).

        Returns:
            z, clipped to the box.

        Raises:
            ProxUndefinedError: if base is not positive for a steep kernel.
        """
        if self.q < 1:
            if np.any(~(base > 0)):
                raise ProxUndefinedError(
                    f"{self.name} prox is not defined: dual step exceeds x^(q-1)/(1-q)"
                )
            with np.errstate(over="ignore"):
                z = np.power(base, 1.0 / (self.q - 1.0))
        else:
            with np.errstate(divide="ignore"):
                z = np.power(np.maximum(base, 0.0), 1.0 / (self.q - 1.0))
        return np.minimum(z, self.hi)

    def mirror_step(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            base = np.power(np.asarray(x, dtype=float), self.q - 1.0) - (1.0 - self.q) * y
        return self._from_base(base)

    def conjugate_at(self, z: np.ndarray) -> np.ndarray:
        return np.power(np.asarray(z, dtype=float), self.q) / self.q

    def divergence(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        q = self.q
        scale = q * (1.0 - q)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = (p - x) / x
            series = -t * t * (
                scipy.special.binom(q, 2)
                + scipy.special.binom(q, 3) * t
                + scipy.special.binom(q, 4) * t * t
            )
            direct = q * t - np.expm1(q * np.log1p(t))
            out = np.power(x, q) * np.where(np.abs(t) < _SERIES_THRESHOLD, series, direct) / scale
            at_zero = np.inf if q < 1 else np.power(p, q) / (q * (q - 1.0))
            out = np.where(x == 0.0, at_zero, out)
        return np.where(p == x, 0.0, np.maximum(out, 0.0))


class HellingerKernel(BregmanKernel):
    """θ(x) = −√(1 − x²) on [−1, 1], steep at both ends."""

    name = "hellinger"
    lo = -1.0
    hi = 1.0
    steep_lo = True
    steep_hi = True
    boundary_class = power_like(0.5)

    @property
    def boundary_exponent(self) -> float:
        """Legendre exponent at ±1."""
        return 0.75

    @staticmethod
    def _one_minus_square(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (1.0 - x) * (1.0 + x)

    def value(self, x: np.ndarray) -> np.ndarray:
        return -np.sqrt(self._one_minus_square(x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.asarray(x, dtype=float) / np.sqrt(self._one_minus_square(x))

    def hess(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.power(self._one_minus_square(x), -1.5)

    def grad_inverse(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.clip(u / np.hypot(1.0, u), -1.0, 1.0)

    def conjugate_at(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(self._one_minus_square(z))

    def divergence(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        root_x = np.sqrt(self._one_minus_square(x))
        root_p = np.sqrt(self._one_minus_square(p))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.square(p - x) / ((1.0 - p * x + root_p * root_x) * root_x)
        out = np.where(root_x == 0.0, np.inf, out)
        return np.where(p == x, 0.0, out)


class CustomKernel(BregmanKernel):
    """A user-supplied kernel built from numpy-aware callables.

    No analytic Legendre exponent is available; the inverse gradient is computed
    by a bracketed root search.
    """

    def __init__(  # pylint: disable=too-many-arguments
        self,
        name: str,
        value: typing.Callable[[np.ndarray], np.ndarray],
        grad: typing.Callable[[np.ndarray], np.ndarray],
        hess: typing.Callable[[np.ndarray], np.ndarray],
        *,
        lo: float = 0.0,
        hi: float = math.inf,
        steep_lo: bool = False,
        steep_hi: bool = False,
        boundary_class: BoundaryClass | None = None,
    ):
        """Initialize the kernel.

        Args:
            name: kernel identifier.
            value: θ.
            grad: θ'.
            hess: θ''.
            lo: lower end of the scalar domain.
            hi: upper end of the scalar domain.
            steep_lo: whether θ' diverges at lo.
            steep_hi: whether θ' diverges at hi.
            boundary_class: growth class at lo, if known.
        """
        self.name = name
        self._value = value
        self._grad = grad
        self._hess = hess
        self.lo = lo
        self.hi = hi
        self.steep_lo = steep_lo
        self.steep_hi = steep_hi
        self.boundary_class = boundary_class

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._value(np.asarray(x, dtype=float)), dtype=float)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def hess(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._hess(np.asarray(x, dtype=float)), dtype=float)


def make_kernel(name: str) -> BregmanKernel:
    """Build a built-in kernel from its configuration name.

    Accepted names are ``euclidean``, ``entropy``, ``hellinger`` and
    ``tsallis:q=<float>`` with an optional ``,upper=<float>``.

    Args:
        name: kernel name.

    Returns:
        The kernel.

    Raises:
        ValueError: if the name is not recognised.
    """
    kind, _, options = name.strip().partition(":")
    if kind in ("euclidean", "entropy", "hellinger") and not options:
        builders = {
            "euclidean": EuclideanKernel,
            "entropy": EntropyKernel,
            "hellinger": HellingerKernel,
        }
        return builders[kind]()
    if kind != "tsallis":
        raise ValueError(f"unknown kernel: {name}")
    params: dict[str, float] = {}
    for item in filter(None, options.split(",")):
        key, sep, raw = item.partition("=")
        if not sep or key.strip() not in ("q", "upper") or key.strip() in params:
            raise ValueError(f"invalid tsallis option {item!r} in {name}")
        try:
            params[key.strip()] = float(raw)
        except ValueError as exc:
            raise ValueError(f"invalid tsallis option {item!r} in {name}") from exc
    if "q" not in params:
        raise ValueError(f"tsallis kernel needs q: {name}")
    return TsallisKernel(params["q"], params.get("upper", 1.0))


class Regularizer:
    """The decomposable regularizer h(p) = Σ θ(p_i) paired with a domain.

    Attributes:
        kernel: the scalar kernel replicated over the coordinates.
        domain: the feasible set.
        strong_convexity_norm: norm of the strong convexity requirement.
    """

    strong_convexity_norm = "euclidean"

    def __init__(self, kernel: BregmanKernel, domain: Domain):
        """Initialize the regularizer.

        Args:
            kernel: the scalar kernel.
            domain: the feasible set.

        Raises:
            DomainError: if the domain does not fit inside the kernel's scalar domain.
        """
        lower, upper = domain.coordinate_bounds()
        if np.any(lower < kernel.lo) or np.any(upper > kernel.hi):
            raise DomainError(f"domain {domain} does not fit the {kernel.name} kernel")
        self.kernel = kernel
        self.domain = domain

    @property
    def dim(self) -> int:
        """Number of coordinates."""
        return self.domain.dim

    def value(self, p: np.ndarray) -> float:
        """Evaluate h.

        Args:
            p: a point of the domain.

        Returns:
            h(p).
        """
        return float(np.sum(self.kernel.value(p)))

    def grad(self, x: np.ndarray) -> np.ndarray:
        """Evaluate ∇h.

        Args:
            x: a point of the prox-domain.

        Returns:
            The gradient.
        """
        return self.kernel.grad(x)

    def divergence(self, p: np.ndarray, x: np.ndarray) -> float:
        """Evaluate D(p, x) without validation.

        Args:
            p: reference point.
            x: base point.

        Returns:
            The Bregman divergence.
        """
        return float(np.sum(self.kernel.divergence(p, x)))

    def steep_boundary(self, x: np.ndarray) -> np.ndarray:
        """Flag coordinates sitting on a steep end of the kernel.

        Args:
            x: a point.

        Returns:
            Boolean mask.
        """
        x = np.asarray(x, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        if self.kernel.steep_lo:
            mask |= x <= self.kernel.lo
        if self.kernel.steep_hi:
            mask |= x >= self.kernel.hi
        return mask

    def __repr__(self) -> str:
        """Represent the regularizer.

        Returns:
            The representation.
        """
        return f"<Regularizer {self.kernel.name} on {self.domain}>"


def kernel_eval(k: BregmanKernel, x: float, order: int) -> float:
    """Evaluate a kernel or one of its first two derivatives.

    Args:
        k: the kernel.
        x: scalar point.
        order: 0, 1 or 2.

    Returns:
        θ(x), θ'(x) or θ''(x).

    Raises:
        DomainError: if x is outside the scalar domain.
        BoundaryDerivativeError: if a steep kernel is differentiated at its steep end.
        ValueError: if the order is not 0, 1 or 2.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {order}")
    if not k.lo <= x <= k.hi:
        raise DomainError(f"{x} is outside the domain [{k.lo}, {k.hi}] of {k.name}")
    if order > 0 and ((k.steep_lo and x == k.lo) or (k.steep_hi and x == k.hi)):
        raise BoundaryDerivativeError(f"{k.name} is steep at {x}, derivative {order} is undefined")
    method = (k.value, k.grad, k.hess)[order]
    return float(method(np.array([float(x)]))[0])


def divergence(h: Regularizer, p: typing.Sequence[float], x: typing.Sequence[float]) -> float:
    """Compute the Bregman divergence D(p, x) = h(p) − h(x) − ⟨∇h(x), p − x⟩.

    Coordinates where x sits on a steep end contribute 0 when p agrees with x there.

    Args:
        h: the regularizer.
        p: a point of the domain.
        x: a point of the prox-domain.

    Returns:
        The divergence.

    Raises:
        DomainError: if p or x is not in the domain.
        ProxDomainError: if x is on a steep face that p does not share.
    """
    p_arr = h.domain.check_point(p)
    x_arr = h.domain.check_point(x)
    bad = h.steep_boundary(x_arr) & (p_arr != x_arr)
    if np.any(bad):
        raise ProxDomainError(
            f"{h.kernel.name} is not differentiable at coordinates {np.flatnonzero(bad).tolist()}"
        )
    return h.divergence(p_arr, x_arr)


def legendre_exponent_analytic(h: Regularizer, p: typing.Sequence[float]) -> float:
    """Return the Legendre exponent of a built-in regularizer at p.

    The exponent is computed coordinate-wise: interior coordinates contribute 0 and
    coordinates on the lower end of the kernel or on a steep end contribute the
    kernel's boundary exponent, so non-steep Tsallis kernels get 1 − q/2 at 0.

    Args:
        h: the regularizer.
        p: a point of the domain.

    Returns:
        α(p) in [0, 1].

    Raises:
        UnsupportedKernelError: for user-supplied kernels.
    """
    kernel = h.kernel
    if isinstance(kernel, CustomKernel):
        raise UnsupportedKernelError(
            f"no analytic Legendre exponent for kernel {kernel.name}, use the empirical estimator"
        )
    p_arr = h.domain.check_point(p)
    on_boundary = h.steep_boundary(p_arr) | (p_arr <= kernel.lo)
    if not np.any(on_boundary):
        return 0.0
    if isinstance(kernel, HellingerKernel) and not np.all(on_boundary):
        logger.warning(
            "hellinger exponent at %s mixes boundary and interior coordinates, empirical-only",
            p_arr.tolist(),
        )
    return kernel.boundary_exponent


def _grid_points(
    h: Regularizer, p: np.ndarray, radius: float, seed: int
) -> typing.Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield, per feasible direction, the grid points and their distances to p.

    Args:
        h: the regularizer.
        p: the center.
        radius: largest distance sampled.
        seed: seed of the random directions.

    Yields:
        Pairs of (points, distances), ordered from far to near.
    """
    for direction in h.domain.feasible_directions(p, seed=seed):
        reach = min(radius, 0.99 * h.domain.max_step(p, direction))
        if not reach > 0:
            continue
        radii = reach * 0.5 ** np.arange(GRID_LEVELS)
        points = h.domain.clip(p[None, :] + radii[:, None] * direction[None, :])
        distances = np.linalg.norm(points - p[None, :], axis=1)
        keep = distances > 0
        yield points[keep], distances[keep]


def legendre_constant(
    h: Regularizer,
    p: typing.Sequence[float],
    radius: float,
    *,
    alpha: float | None = None,
    seed: int = 0,
) -> float:
    """Find the Legendre constant β at p over a sampled neighbourhood.

    β is the smallest value with D(p, x) ≤ (β/2)‖x − p‖^(2(1 − α)) over a geometric
    grid of points along feasible directions with ‖x − p‖ ≤ radius.

    Args:
        h: the regularizer.
        p: a point of the domain.
        radius: neighbourhood radius.
        alpha: Legendre exponent to use, the analytic one when omitted.
        seed: seed of the random directions.

    Returns:
        β.

    Raises:
        ValueError: if radius is not positive.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    p_arr = h.domain.check_point(p)
    if alpha is None:
        alpha = legendre_exponent_analytic(h, p_arr)
    beta = 0.0
    for points, distances in _grid_points(h, p_arr, radius, seed):
        values = np.array([h.divergence(p_arr, x) for x in points])
        ratios = 2.0 * values / np.power(distances, 2.0 * (1.0 - alpha))
        beta = max(beta, float(np.max(ratios, initial=0.0)))
    return beta


def legendre_slopes(
    h: Regularizer, p: typing.Sequence[float], radii: np.ndarray | None = None, seed: int = 0
) -> list[float]:
    """Measure the log-log slope of √D(p, x) against ‖x − p‖ per feasible direction.

    The slope is fitted on the small-radius half of the grid.

    Args:
        h: the regularizer.
        p: a point of the domain.
        radii: relative grid, defaults to 2^-k for k = 0..39.
        seed: seed of the random directions.

    Returns:
        One slope per usable direction.
    """
    p_arr = h.domain.check_point(p)
    if radii is None:
        radii = 0.5 ** np.arange(GRID_LEVELS)
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    slopes = []
    for direction in h.domain.feasible_directions(p_arr, seed=seed):
        reach = min(0.5, 0.5 * h.domain.max_step(p_arr, direction))
        if not reach > 0:
            continue
        points = h.domain.clip(p_arr[None, :] + reach * radii[:, None] * direction[None, :])
        distances = np.linalg.norm(points - p_arr[None, :], axis=1)
        values = np.array([h.divergence(p_arr, x) for x in points])
        usable = (distances > 0) & (values > 0) & np.isfinite(values)
        tail = np.flatnonzero(usable & (np.arange(len(radii)) >= len(radii) // 2))
        if len(tail) < 3:
            continue
        slope = np.polyfit(np.log(distances[tail]), 0.5 * np.log(values[tail]), 1)[0]
        slopes.append(float(slope))
    return slopes


def boundary_profile(k: BregmanKernel, boundary_class: BoundaryClass | None = None) -> np.ndarray:
    """Sample the quantity that certifies a boundary class near the lower end.

    The samples are taken at x = lo + 2^-j for j = 1..40. Euclidean-like kernels
    report θ'(x), entropy-like kernels θ'(x) − log(x − lo) and power-like kernels
    (x − lo)^ν θ'(x).

    Args:
        k: the kernel.
        boundary_class: class to test, the kernel's own class by default.

    Returns:
        The sampled quantity.

    Raises:
        UnsupportedKernelError: if no class is given or known.
    """
    boundary_class = boundary_class or k.boundary_class
    if boundary_class is None:
        raise UnsupportedKernelError(f"kernel {k.name} declares no boundary class")
    lo = k.lo if math.isfinite(k.lo) else 0.0
    offsets = 0.5 ** np.arange(1, GRID_LEVELS + 1)
    grads = k.grad(lo + offsets)
    if boundary_class.kind == "entropy_like":
        return grads - np.log(offsets)
    if boundary_class.kind == "power_like":
        return np.power(offsets, boundary_class.nu) * grads
    return grads


def certify_boundary_class(k: BregmanKernel, boundary_class: BoundaryClass | None = None) -> bool:
    """Check that the boundary quantity of a class stays bounded below.

    Args:
        k: the kernel.
        boundary_class: class to test, the kernel's own class by default.

    Returns:
        Whether the sampled tail does not drift downwards.
    """
    profile = boundary_profile(k, boundary_class)
    tail = profile[-11:]
    if not np.all(np.isfinite(tail)):
        return False
    return bool(tail.min() >= tail[0] - 0.1 * (1.0 + abs(tail[0])))
