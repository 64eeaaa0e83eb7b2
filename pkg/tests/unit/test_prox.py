# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

# pylint: disable=missing-function-docstring

"""Prox engine unit tests."""

import math

import numpy as np
import pytest

import prox as prox_module
from domains import Domain
from exceptions import (
    InfeasibleError,
    ProxDomainError,
    ProxUndefinedError,
    SteepnessRequiredError,
    UnsupportedCombinationError,
)
from kernels import Regularizer, make_kernel
from prox import (
    prox,
    prox_closed_form,
    prox_euclidean_polyhedral,
    prox_polyhedral_dual,
    prox_simplex_entropy,
)


@pytest.mark.parametrize(
    "name,domain,x,y,expected",
    [
        pytest.param("entropy", Domain.interval(), [0.5], [-1.0], [0.5 / math.e], id="entropy"),
        pytest.param("euclidean", Domain.interval(), [0.5], [-1.0], [0.0], id="euclidean clip"),
        pytest.param(
            "euclidean", Domain.interval(0.0, 1.0), [0.5], [2.0], [1.0], id="euclidean upper clip"
        ),
        pytest.param("entropy", Domain.interval(), [0.0], [5.0], [0.0], id="frozen boundary"),
        pytest.param(
            "hellinger", Domain.interval(-1.0, 1.0), [0.0], [0.75], [0.6], id="hellinger"
        ),
    ],
)
def test_prox_closed_form(name: str, domain: Domain, x: list, y: list, expected: list):
    """
    arrange: given a box regularizer, a center and a dual vector.
    act: apply the closed-form prox.
    assert: the point matches θ'(z) = θ'(x) + y with clipping.
    """
    h = Regularizer(make_kernel(name), domain)
    assert prox_closed_form(h, x, y) == pytest.approx(expected, rel=1e-12)


def test_prox_closed_form_tsallis_undefined():
    """
    arrange: given the steep Tsallis kernel and a dual step beyond x^(q−1)/(1 − q).
    act: apply the closed-form prox.
    assert: ProxUndefinedError is raised.
    """
    h = Regularizer(make_kernel("tsallis:q=0.5"), Domain.interval(0.0, 1.0))
    with pytest.raises(ProxUndefinedError):
        prox_closed_form(h, [0.25], [10.0])


def test_prox_simplex_entropy():
    """
    arrange: given the uniform point of the simplex and y = (log 2, 0, 0).
    act: apply the exponential weights update.
    assert: the first weight doubles before normalization.
    """
    z = prox_simplex_entropy(np.full(3, 1.0 / 3.0), [math.log(2.0), 0.0, 0.0])
    assert z == pytest.approx([0.5, 0.25, 0.25], rel=1e-12)


def test_prox_simplex_entropy_keeps_zero_coordinates():
    """
    arrange: given a simplex point with an underflowed coordinate.
    act: apply the exponential weights update with a large push.
    assert: the coordinate stays at 0 and the rest still sums to one.
    """
    z = prox_simplex_entropy([0.0, 0.5, 0.5], [100.0, 0.0, 0.0])
    assert z[0] == 0.0
    assert float(np.sum(z)) == pytest.approx(1.0)


def test_prox_simplex_entropy_rejects_infeasible():
    """
    arrange: given a point off the simplex.
    act: apply the exponential weights update.
    assert: InfeasibleError is raised.
    """
    with pytest.raises(InfeasibleError):
        prox_simplex_entropy([0.5, 0.6, 0.1], [0.0, 0.0, 0.0])


def test_prox_polyhedral_dual_matches_exponential_weights(
    entropy_simplex: Regularizer, rng: np.random.Generator
):
    """
    arrange: given entropy on the simplex, random centers and dual vectors.
    act: solve the prox through the dual Newton method.
    assert: the result matches the closed-form exponential weights update.
    """
    for _ in range(20):
        x = entropy_simplex.domain.random_point(rng)
        y = rng.normal(size=3)
        expected = prox_simplex_entropy(x, y)
        z = prox_polyhedral_dual(entropy_simplex, entropy_simplex.domain, x, y)
        assert z == pytest.approx(expected, abs=1e-10)


def test_prox_polyhedral_dual_tsallis_on_simplex():
    """
    arrange: given the steep Tsallis kernel on the simplex.
    act: solve the prox through the dual Newton method.
    assert: the point is feasible and stationary up to a multiple of the all-ones row.
    """
    h = Regularizer(make_kernel("tsallis:q=0.5"), Domain.simplex(3))
    x, y = np.array([0.2, 0.3, 0.5]), np.array([0.1, -0.2, 0.05])
    z = prox_polyhedral_dual(h, h.domain, x, y)
    assert float(np.sum(z)) == pytest.approx(1.0, abs=1e-10)
    shift = h.grad(z) - h.grad(x) - y
    assert shift == pytest.approx(np.full(3, shift[0]), abs=1e-8)


def test_prox_polyhedral_dual_requires_steepness():
    """
    arrange: given the Euclidean kernel on the simplex.
    act: solve the prox through the dual Newton method.
    assert: SteepnessRequiredError is raised.
    """
    h = Regularizer(make_kernel("euclidean"), Domain.simplex(3))
    with pytest.raises(SteepnessRequiredError):
        prox_polyhedral_dual(h, h.domain, np.full(3, 1.0 / 3.0), np.zeros(3))


def test_prox_polyhedral_dual_rejects_boundary_center(entropy_simplex: Regularizer):
    """
    arrange: given entropy on the simplex and a center on a face.
    act: solve the prox through the dual Newton method.
    assert: ProxDomainError is raised.
    """
    with pytest.raises(ProxDomainError):
        prox_polyhedral_dual(entropy_simplex, entropy_simplex.domain, [0.0, 0.5, 0.5], np.zeros(3))


@pytest.mark.parametrize(
    "dom,x,y,expected",
    [
        pytest.param(
            Domain.simplex(3),
            np.full(3, 1.0 / 3.0),
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            id="simplex vertex",
        ),
        pytest.param(
            Domain.simplex(3),
            np.full(3, 1.0 / 3.0),
            [0.1, -0.1, 0.0],
            [1.0 / 3.0 + 0.1, 1.0 / 3.0 - 0.1, 1.0 / 3.0],
            id="simplex interior",
        ),
        pytest.param(
            Domain.polyhedron([[1.0, -0.1]], [0.0]),
            [0.1, 1.0],
            [-1.0, -10.0],
            [0.0, 0.0],
            id="ray",
        ),
    ],
)
def test_prox_euclidean_polyhedral(dom: Domain, x, y: list, expected: list):
    """
    arrange: given a polyhedron, a center and a dual vector.
    act: project x + y with the active-set method.
    assert: the projection matches the closed form and bounds are exact.
    """
    z = prox_euclidean_polyhedral(dom, x, y)
    assert z == pytest.approx(expected, abs=1e-12)
    assert np.all(z >= dom.lower)


def test_prox_euclidean_polyhedral_is_a_projection(rng: np.random.Generator):
    """
    arrange: given the simplex and random targets.
    act: project them.
    assert: ⟨target − z, w − z⟩ ≤ 0 for sampled feasible w.
    """
    dom = Domain.simplex(4)
    for _ in range(20):
        x = dom.random_point(rng)
        y = rng.normal(size=4)
        z = prox_euclidean_polyhedral(dom, x, y)
        for _ in range(10):
            w = dom.random_point(rng)
            assert float((x + y - z) @ (w - z)) <= 1e-10


@pytest.mark.parametrize(
    "name,domain,engine",
    [
        pytest.param("entropy", Domain.interval(), "prox_closed_form", id="box"),
        pytest.param("entropy", Domain.simplex(3), "prox_simplex_entropy", id="entropy simplex"),
        pytest.param(
            "euclidean", Domain.simplex(3), "prox_euclidean_polyhedral", id="euclidean simplex"
        ),
        pytest.param(
            "tsallis:q=0.5", Domain.simplex(3), "prox_polyhedral_dual", id="tsallis simplex"
        ),
    ],
)
def test_prox_dispatch(monkeypatch: pytest.MonkeyPatch, name: str, domain: Domain, engine: str):
    """
    arrange: given a regularizer and a spy on the expected engine.
    act: apply the generic prox.
    assert: the expected engine handles the call.
    """
    calls = []
    original = getattr(prox_module, engine)

    def spy(*args):
        calls.append(args)
        return original(*args)

    monkeypatch.setattr(prox_module, engine, spy)
    h = Regularizer(make_kernel(name), domain)
    prox_module.prox(h, domain.slater_point, np.zeros(domain.dim))
    assert len(calls) == 1


def test_prox_unsupported_combination():
    """
    arrange: given the non-steep Tsallis kernel on the simplex.
    act: apply the generic prox.
    assert: UnsupportedCombinationError is raised.
    """
    h = Regularizer(make_kernel("tsallis:q=1.5"), Domain.simplex(3))
    with pytest.raises(UnsupportedCombinationError):
        prox(h, np.full(3, 1.0 / 3.0), np.zeros(3))
