# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Fixtures for bregman-vi tests."""

import pathlib
import textwrap
import typing

import numpy as np
import pytest

from domains import Domain
from kernels import Regularizer, make_kernel
from solver import AffineField, Problem
from tests.utils import BOUNDARY_CONFIG


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    """Create a seeded random generator."""
    return np.random.default_rng(12345)


@pytest.fixture(name="entropy_half_line")
def entropy_half_line_fixture() -> Regularizer:
    """Create the entropy regularizer on [0, ∞)."""
    return Regularizer(make_kernel("entropy"), Domain.interval())


@pytest.fixture(name="entropy_simplex")
def entropy_simplex_fixture() -> Regularizer:
    """Create the entropy regularizer on the simplex of ℝ³."""
    return Regularizer(make_kernel("entropy"), Domain.simplex(3))


@pytest.fixture(name="line_domain")
def line_domain_fixture() -> Domain:
    """Create the ray {x ≥ 0 : x_1 = 0.1 x_2}."""
    return Domain.polyhedron([[1.0, -0.1]], [0.0], slater_point=[0.1, 1.0])


@pytest.fixture(name="boundary_problem")
def boundary_problem_fixture() -> Problem:
    """Create F(x) = x on [0, ∞) with its boundary solution x* = 0."""
    return Problem(
        Domain.interval(),
        AffineField.shifted_identity([0.0]),
        lipschitz=1.0,
        solution=[0.0],
        strong=1.0,
        name="boundary",
    )


@pytest.fixture(name="write_config")
def write_config_fixture(
    tmp_path: pathlib.Path,
) -> typing.Callable[..., pathlib.Path]:
    """Create a helper writing configuration files into a temporary directory."""

    def write_config(text: str = BOUNDARY_CONFIG, name: str = "config.toml") -> pathlib.Path:
        path = tmp_path / name
        path.write_text(textwrap.dedent(text), encoding="utf-8")
        return path

    return write_config
