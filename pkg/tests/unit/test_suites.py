# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

# pylint: disable=missing-function-docstring

"""Verification suite unit tests."""

import numpy as np
import pytest

import suites
from exceptions import UnknownTargetError
from kernels import Regularizer, make_kernel
from prox import prox_polyhedral_dual
from suites import (
    SUITES,
    CheckResult,
    _check,
    _dual_newton_oracle,
    _variational_check,
    box_regularizers,
    energy_suite,
    lemma_suite,
    oracle_polyhedra,
    projected_gradient_prox,
    prox_suite,
    run_suite,
    simplex_regularizers,
)


def _failures(results: list[CheckResult]) -> list[CheckResult]:
    return [result for result in results if not result.passed]


def test_prox_suite_passes():
    """
    arrange: given a small random battery.
    act: run the prox suite.
    assert: every identity, contraction and engine check passes.
    """
    results = prox_suite(seed=1, samples=50)
    assert not _failures(results)
    checks = {result.check for result in results}
    assert "three-point:tsallis:q=0.5" in checks
    assert "dual-newton:line" in checks
    assert {"variational:entropy-simplex", "dual-newton:oracle"} <= checks


def test_lemma_suite_passes():
    """
    arrange: given a small random battery.
    act: run the lemma suite.
    assert: the prox inequalities, the scalar lemmas and the certificates hold.
    """
    results = lemma_suite(seed=2, samples=50)
    assert not _failures(results)
    checks = {result.check for result in results}
    assert {"separation:simplex", "separation-constant:line"} <= checks


def test_energy_suite_passes():
    """
    arrange: given short runs of every preset on the boundary scenarios.
    act: run the energy suite.
    assert: decrement, template and generic bound checks pass.
    """
    results = energy_suite(horizon=300)
    assert not _failures(results)
    assert any(result.check == "generic-bound:entropy-boundary" for result in results)


@pytest.mark.parametrize(
    "label",
    [
        *(pytest.param(label, id=label) for label in box_regularizers()),
        *(pytest.param(label, id=label) for label in simplex_regularizers()),
    ],
)
def test_variational_check_passes(label: str, rng: np.random.Generator):
    """
    arrange: given a regularizer of the prox battery.
    act: run the variational characterization check.
    assert: ⟨∇h(P) − ∇h(x) − y, p − P⟩ stays above the tolerance.
    """
    h = (box_regularizers() | simplex_regularizers())[label]
    result = _variational_check(label, h, rng, 100)
    assert result.passed, result
    assert result.check == f"variational:{label}"


def test_variational_check_flags_wrong_prox(
    monkeypatch: pytest.MonkeyPatch, rng: np.random.Generator
):
    """
    arrange: given a prox replaced by one that ignores the dual vector.
    act: run the variational characterization check on the entropy box.
    assert: the check fails.
    """
    monkeypatch.setattr(suites, "prox", lambda h, x, y: np.asarray(x, dtype=float))
    result = _variational_check("entropy", box_regularizers()["entropy"], rng, 50)
    assert not result.passed


@pytest.mark.parametrize(
    "label", [pytest.param(label, id=label) for label in oracle_polyhedra()]
)
def test_projected_gradient_prox_agrees_with_dual_newton(
    label: str, rng: np.random.Generator
):
    """
    arrange: given entropy on a three-variable polyhedron and random inputs.
    act: solve the prox by projected gradient and by the dual Newton method.
    assert: both points are feasible and agree to 1e-8.
    """
    dom = oracle_polyhedra()[label]
    h = Regularizer(make_kernel("entropy"), dom)
    for _ in range(5):
        x = dom.random_point(rng)
        y = rng.uniform(-1.0, 1.0, dom.dim)
        reference = projected_gradient_prox(h, x, y)
        assert dom.A @ reference == pytest.approx(dom.b, abs=1e-10)
        assert np.all(reference > 0)
        assert prox_polyhedral_dual(h, dom, x, y) == pytest.approx(reference, abs=1e-8)


def test_dual_newton_oracle_passes(rng: np.random.Generator):
    """
    arrange: given a few random inputs per polyhedron.
    act: run the dual Newton versus projected gradient check.
    assert: it passes.
    """
    result = _dual_newton_oracle(rng, 5)
    assert result.passed, result
    assert result.check == "dual-newton:oracle"


def test_failed_checks_are_reported():
    """
    arrange: given a check with a negative slack.
    act: build the result.
    assert: it is marked as failed and keeps the slack.
    """
    result = _check("prox", "example", -0.5)
    assert result == CheckResult("prox", "example", False, -0.5)


def test_run_suite_dispatch(monkeypatch: pytest.MonkeyPatch):
    """
    arrange: given stubbed suites.
    act: run a single suite and all of them.
    assert: the seed and horizon reach the suites and all runs them in order.
    """
    calls = []

    def stub(name: str):
        def suite(seed: int, horizon: int | None) -> list[CheckResult]:
            calls.append((name, seed, horizon))
            return [CheckResult(name, "stub", True, 0.0)]

        return suite

    for name in list(SUITES):
        monkeypatch.setitem(SUITES, name, stub(name))
    assert run_suite("energy", seed=3, horizon=10)[0].suite == "energy"
    assert calls == [("energy", 3, 10)]
    assert [result.suite for result in run_suite("all")] == list(SUITES)


def test_run_suite_unknown():
    """
    arrange: given an unknown suite name.
    act: run it.
    assert: UnknownTargetError is raised.
    """
    with pytest.raises(UnknownTargetError):
        run_suite("figures")
