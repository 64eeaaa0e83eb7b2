# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

# pylint: disable=missing-function-docstring

"""Kernel and regularizer unit tests."""

import math

import numpy as np
import pytest

from domains import Domain
from exceptions import (
    BoundaryDerivativeError,
    DomainError,
    ProxDomainError,
    UnsupportedKernelError,
)
from kernels import (
    ENTROPY_LIKE,
    EUCLIDEAN_LIKE,
    CustomKernel,
    HellingerKernel,
    Regularizer,
    TsallisKernel,
    boundary_profile,
    certify_boundary_class,
    divergence,
    kernel_eval,
    legendre_constant,
    legendre_exponent_analytic,
    legendre_slopes,
    make_kernel,
    power_like,
)


@pytest.mark.parametrize(
    "name,expected",
    [
        pytest.param("euclidean", "euclidean", id="euclidean"),
        pytest.param("entropy", "entropy", id="entropy"),
        pytest.param("hellinger", "hellinger", id="hellinger"),
        pytest.param("tsallis:q=0.5", "tsallis:q=0.5", id="tsallis"),
        pytest.param("tsallis:q=0.5,upper=0.8", "tsallis:q=0.5,upper=0.8", id="tsallis box"),
    ],
)
def test_make_kernel(name: str, expected: str):
    """
    arrange: given a configuration kernel name.
    act: build the kernel.
    assert: the kernel reports the canonical name.
    """
    assert make_kernel(name).name == expected


@pytest.mark.parametrize(
    "name",
    [
        pytest.param("burg", id="unknown kernel"),
        pytest.param("tsallis", id="missing q"),
        pytest.param("tsallis:q=abc", id="q not a number"),
        pytest.param("tsallis:q=1", id="q equal to one"),
        pytest.param("tsallis:p=0.5", id="unknown option"),
        pytest.param("entropy:q=0.5", id="options on entropy"),
    ],
)
def test_make_kernel_invalid(name: str):
    """
    arrange: given an invalid kernel name.
    act: build the kernel.
    assert: a ValueError is raised.
    """
    with pytest.raises(ValueError):
        make_kernel(name)


@pytest.mark.parametrize(
    "name,x,order,expected",
    [
        pytest.param("euclidean", 2.0, 0, 2.0, id="euclidean value"),
        pytest.param("entropy", 1.0, 0, 0.0, id="entropy value"),
        pytest.param("entropy", 0.0, 0, 0.0, id="entropy value at boundary"),
        pytest.param("entropy", math.e, 1, 2.0, id="entropy gradient"),
        pytest.param("entropy", 0.25, 2, 4.0, id="entropy curvature"),
        pytest.param("tsallis:q=0.5", 0.25, 2, 8.0, id="tsallis curvature"),
        pytest.param("hellinger", 0.0, 0, -1.0, id="hellinger value"),
        pytest.param("hellinger", 0.6, 1, 0.75, id="hellinger gradient"),
    ],
)
def test_kernel_eval(name: str, x: float, order: int, expected: float):
    """
    arrange: given a kernel and a point.
    act: evaluate the kernel or its derivatives.
    assert: the value matches the closed form.
    """
    assert kernel_eval(make_kernel(name), x, order) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "name,x,order,error",
    [
        pytest.param("entropy", 0.0, 1, BoundaryDerivativeError, id="entropy steep end"),
        pytest.param("hellinger", 1.0, 2, BoundaryDerivativeError, id="hellinger upper end"),
        pytest.param("entropy", -0.1, 0, DomainError, id="outside the domain"),
        pytest.param("euclidean", 0.0, 3, ValueError, id="unsupported order"),
    ],
)
def test_kernel_eval_errors(name: str, x: float, order: int, error: type[Exception]):
    """
    arrange: given an evaluation that is not defined.
    act: evaluate the kernel.
    assert: the matching error is raised.
    """
    with pytest.raises(error):
        kernel_eval(make_kernel(name), x, order)


def test_entropy_divergence_is_cancellation_free():
    """
    arrange: given two entropy points 1e-12 apart.
    act: compute the divergence.
    assert: it matches the quadratic expansion (p − x)²/(2x).
    """
    k = make_kernel("entropy")
    x, p = np.array([0.3]), np.array([0.3 + 1e-12])
    expected = float((p - x)[0] ** 2 / (2 * x[0]))
    assert k.divergence(p, x)[0] == pytest.approx(expected, rel=1e-6)


def test_divergence_validates_points(entropy_half_line: Regularizer):
    """
    arrange: given the entropy regularizer on the half line.
    act: compute divergences at and away from the steep boundary.
    assert: D(0, 0) is zero and D(p, 0) for p > 0 is rejected.
    """
    assert divergence(entropy_half_line, [0.0], [0.0]) == 0.0
    assert divergence(entropy_half_line, [0.0], [0.5]) == pytest.approx(0.5)
    with pytest.raises(ProxDomainError):
        divergence(entropy_half_line, [0.5], [0.0])


def test_regularizer_rejects_domain_outside_kernel():
    """
    arrange: given the Hellinger kernel and the half line.
    act: pair them in a regularizer.
    assert: a DomainError is raised.
    """
    with pytest.raises(DomainError):
        Regularizer(HellingerKernel(), Domain.interval())


@pytest.mark.parametrize(
    "name,domain,point,expected",
    [
        pytest.param("euclidean", Domain.interval(), [0.0], 0.0, id="euclidean boundary"),
        pytest.param("entropy", Domain.interval(), [0.0], 0.5, id="entropy boundary"),
        pytest.param("entropy", Domain.interval(), [0.5], 0.0, id="entropy interior"),
        pytest.param(
            "tsallis:q=0.5", Domain.interval(0.0, 1.0), [0.0], 0.75, id="tsallis boundary"
        ),
        pytest.param(
            "tsallis:q=1.5",
            Domain.interval(0.0, 1.0),
            [0.0],
            0.25,
            id="non-steep tsallis boundary",
        ),
        pytest.param(
            "tsallis:q=1.5", Domain.interval(0.0, 1.0), [0.5], 0.0, id="non-steep tsallis interior"
        ),
        pytest.param(
            "hellinger", Domain.interval(-1.0, 1.0), [-1.0], 0.75, id="hellinger boundary"
        ),
        pytest.param("entropy", Domain.simplex(3), [0.0, 0.0, 1.0], 0.5, id="simplex vertex"),
    ],
)
def test_legendre_exponent_analytic(name: str, domain: Domain, point: list, expected: float):
    """
    arrange: given a built-in regularizer and a point.
    act: look up the analytic Legendre exponent.
    assert: it matches the kernel's boundary exponent or 0 in the interior.
    """
    h = Regularizer(make_kernel(name), domain)
    assert legendre_exponent_analytic(h, point) == expected


def test_legendre_exponent_custom_kernel():
    """
    arrange: given a user-supplied kernel.
    act: ask for its analytic Legendre exponent.
    assert: UnsupportedKernelError is raised.
    """
    kernel = CustomKernel(
        "quartic", lambda x: x**4 / 12 + x**2 / 2, lambda x: x**3 / 3 + x, lambda x: x**2 + 1
    )
    h = Regularizer(kernel, Domain.interval())
    with pytest.raises(UnsupportedKernelError):
        legendre_exponent_analytic(h, [0.0])


def test_custom_kernel_inverts_gradient():
    """
    arrange: given a user-supplied kernel without a closed-form inverse gradient.
    act: move a point along a dual vector.
    assert: the gradient at the image equals the shifted gradient.
    """
    kernel = CustomKernel(
        "quartic", lambda x: x**4 / 12 + x**2 / 2, lambda x: x**3 / 3 + x, lambda x: x**2 + 1
    )
    z = kernel.mirror_step(np.array([0.5, 1.0]), np.array([0.3, -0.2]))
    assert kernel.grad(z) == pytest.approx(kernel.grad(np.array([0.5, 1.0])) + [0.3, -0.2])


def test_legendre_slopes_entropy_boundary(entropy_half_line: Regularizer):
    """
    arrange: given the entropy regularizer at the boundary point 0.
    act: measure the log-log slopes of √D.
    assert: every slope is close to 1/2.
    """
    slopes = legendre_slopes(entropy_half_line, [0.0])
    assert slopes
    assert np.allclose(slopes, 0.5, atol=0.02)


def test_legendre_constant_euclidean():
    """
    arrange: given the Euclidean regularizer.
    act: compute the Legendre constant with exponent 0.
    assert: β is 1 since D(p, x) = ½‖x − p‖².
    """
    h = Regularizer(make_kernel("euclidean"), Domain.interval())
    assert legendre_constant(h, [0.0], 1.0) == pytest.approx(1.0)


def test_legendre_constant_rejects_radius(entropy_half_line: Regularizer):
    """
    arrange: given a regularizer.
    act: compute the Legendre constant over an empty neighbourhood.
    assert: a ValueError is raised.
    """
    with pytest.raises(ValueError):
        legendre_constant(entropy_half_line, [0.0], 0.0)


@pytest.mark.parametrize(
    "kernel,boundary_class",
    [
        pytest.param(make_kernel("euclidean"), EUCLIDEAN_LIKE, id="euclidean"),
        pytest.param(make_kernel("entropy"), ENTROPY_LIKE, id="entropy"),
        pytest.param(TsallisKernel(0.5), power_like(0.5), id="tsallis"),
        pytest.param(TsallisKernel(0.25), power_like(0.75), id="tsallis small q"),
        pytest.param(HellingerKernel(), power_like(0.5), id="hellinger"),
    ],
)
def test_certify_boundary_class(kernel, boundary_class):
    """
    arrange: given a built-in kernel and its declared boundary class.
    act: certify the class on the sampled boundary profile.
    assert: the certificate holds and matches the declared class.
    """
    assert kernel.boundary_class == boundary_class
    assert certify_boundary_class(kernel)


def test_certify_boundary_class_rejects_wrong_class():
    """
    arrange: given the entropy kernel.
    act: certify the Euclidean-like class, whose profile θ'(x) drifts to −∞.
    assert: the certificate fails.
    """
    assert not certify_boundary_class(make_kernel("entropy"), EUCLIDEAN_LIKE)


def test_boundary_profile_without_class():
    """
    arrange: given a user-supplied kernel without a boundary class.
    act: sample its boundary profile.
    assert: UnsupportedKernelError is raised.
    """
    kernel = CustomKernel("plain", lambda x: x**2 / 2, lambda x: x, lambda x: np.ones_like(x))
    with pytest.raises(UnsupportedKernelError):
        boundary_profile(kernel)


def test_power_like_rejects_exponent():
    """
    arrange: given an exponent outside (0, 1).
    act: build a power-like class.
    assert: a ValueError is raised.
    """
    with pytest.raises(ValueError):
        power_like(1.0)
