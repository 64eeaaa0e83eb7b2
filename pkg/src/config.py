# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Experiment configuration files."""

# check docs/how-to/write-a-config.md for the meaning of every key.
# flake8: noqa: DCO060

import hashlib
import json
import logging
import math
import pathlib
import sys
import typing

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

import numpy as np
import pydantic

from domains import Domain
from exceptions import ConfigError
from kernels import Regularizer, make_kernel
from scenarios import SCENARIOS, get_scenario
from solver import PRESETS, AffineField, MethodConfig, Problem, default_step

logger = logging.getLogger(__name__)

Matrix = list[list[float]]


class _ProblemSection(pydantic.BaseModel):
    """The ``[problem]`` section: a named scenario or a domain with a field."""

    model_config = pydantic.ConfigDict(extra="forbid")

    scenario: str | None = None
    domain: typing.Literal["interval", "orthant_box", "simplex", "polyhedron"] | None = None
    dim: typing.Annotated[int, pydantic.Field(ge=1)] = 1
    lower: float = 0.0
    upper: float | list[float] | None = None
    matrix: Matrix | None = None
    matrix_file: str | None = None
    rhs: list[float] | None = None
    slater_point: list[float] | None = None
    field: typing.Literal["affine", "shifted_identity", "identity", "unit_drift"] | None = None
    field_matrix: Matrix | None = None
    field_matrix_file: str | None = None
    offset: list[float] | None = None
    shift: list[float] | None = None
    solution: list[float] | None = None
    lipschitz: typing.Annotated[float, pydantic.Field(gt=0)] | None = None
    strong: typing.Annotated[float, pydantic.Field(gt=0)] | None = None
    strong_radius: typing.Annotated[float, pydantic.Field(gt=0)] = math.inf

    @pydantic.model_validator(mode="after")
    def _check_source(self) -> "_ProblemSection":
        """Check that the problem comes either from a scenario or from explicit data.

        Returns:
            The validated section.

        Raises:
            ValueError: if the keys are inconsistent.
        """
        if self.scenario is not None:
            if self.scenario not in SCENARIOS:
                raise ValueError(
                    f"unknown scenario {self.scenario!r}, expected one of {sorted(SCENARIOS)}"
                )
            explicit = [
                name
                for name in ("domain", "field", "solution", "matrix", "matrix_file")
                if getattr(self, name) is not None
            ]
            if explicit:
                raise ValueError(f"scenario excludes the keys {', '.join(explicit)}")
            return self
        if self.domain is None or self.field is None:
            raise ValueError("either scenario or both domain and field are required")
        if self.lipschitz is None:
            raise ValueError("lipschitz is required without a scenario")
        if self.domain == "polyhedron" and self.rhs is None:
            raise ValueError("a polyhedron needs rhs")
        if self.domain == "polyhedron" and (self.matrix is None) == (self.matrix_file is None):
            raise ValueError("a polyhedron needs exactly one of matrix and matrix_file")
        if self.field == "affine" and (self.field_matrix is None) == (
            self.field_matrix_file is None
        ):
            raise ValueError("an affine field needs one of field_matrix and field_matrix_file")
        if self.field == "shifted_identity" and self.shift is None:
            raise ValueError("a shifted_identity field needs shift")
        return self

    def resolve_paths(self, base_dir: pathlib.Path) -> "_ProblemSection":
        """Make matrix file references absolute.

        Args:
            base_dir: directory the relative paths are relative to.

        Returns:
            A copy with absolute paths.
        """
        update = {
            name: str((base_dir / value).resolve())
            for name in ("matrix_file", "field_matrix_file")
            if (value := getattr(self, name)) is not None
        }
        return self.model_copy(update=update)

    def _domain(self, base_dir: pathlib.Path) -> Domain:
        """Build the feasible set.

        Args:
            base_dir: directory of the config file.

        Returns:
            The domain.
        """
        if self.domain == "interval":
            upper = math.inf if self.upper is None else float(typing.cast(float, self.upper))
            return Domain.interval(self.lower, upper, self.dim)
        if self.domain == "orthant_box":
            caps = None if self.upper is None else np.broadcast_to(self.upper, (self.dim,))
            return Domain.orthant_box(self.dim, None if caps is None else caps.tolist())
        if self.domain == "simplex":
            return Domain.simplex(self.dim)
        matrix = (
            self.matrix
            if self.matrix is not None
            else _load_matrix(base_dir / typing.cast(str, self.matrix_file))
        )
        return Domain.polyhedron(matrix, typing.cast(list[float], self.rhs), self.slater_point)

    def _field(self, dim: int, base_dir: pathlib.Path) -> AffineField:
        """Build the vector field from the registry.

        Args:
            dim: number of coordinates.
            base_dir: directory of the config file.

        Returns:
            The field.
        """
        if self.field == "identity":
            return AffineField(np.eye(dim), np.zeros(dim))
        if self.field == "unit_drift":
            return AffineField(np.eye(dim), np.ones(dim))
        if self.field == "shifted_identity":
            return AffineField.shifted_identity(typing.cast(list[float], self.shift))
        matrix = (
            self.field_matrix
            if self.field_matrix is not None
            else _load_matrix(base_dir / typing.cast(str, self.field_matrix_file))
        )
        offset = self.offset if self.offset is not None else [0.0] * dim
        return AffineField(np.asarray(matrix, dtype=float), np.asarray(offset, dtype=float))

    def build(self, base_dir: pathlib.Path) -> Problem:
        """Build the problem.

        Args:
            base_dir: directory of the config file.

        Returns:
            The problem.
        """
        if self.scenario is not None:
            problem = get_scenario(self.scenario).problem
            overrides = {
                "lipschitz": self.lipschitz,
                "strong": self.strong,
                "strong_radius": self.strong_radius,
            }
            for name, value in overrides.items():
                if value is not None and not (name == "strong_radius" and math.isinf(value)):
                    setattr(problem, name, value)
            return problem
        domain = self._domain(base_dir)
        return Problem(
            domain,
            self._field(domain.dim, base_dir),
            lipschitz=typing.cast(float, self.lipschitz),
            solution=self.solution,
            strong=self.strong,
            strong_radius=self.strong_radius,
            name=f"{self.field} on {domain}",
        )


def _load_matrix(path: pathlib.Path) -> Matrix:
    """Read a comma-separated matrix.

    Args:
        path: CSV file.

    Returns:
        The rows.

    Raises:
        ConfigError: if the file cannot be read.
    """
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2).tolist()
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc


class _RegularizerSection(pydantic.BaseModel):
    """The ``[regularizer]`` section."""

    model_config = pydantic.ConfigDict(extra="forbid")

    kernel: str

    @pydantic.field_validator("kernel")
    @classmethod
    def _check_kernel(cls, value: str) -> str:
        """Check the kernel name parses.

        Args:
            value: kernel name.

        Returns:
            The name.
        """
        make_kernel(value)
        return value


class _MethodSection(pydantic.BaseModel):
    """The ``[method]`` section."""

    model_config = pydantic.ConfigDict(extra="forbid")

    preset: typing.Literal["md", "mp", "omd"] | None = None
    alpha_a: typing.Annotated[float, pydantic.Field(ge=0.0, le=1.0)] | None = None
    alpha_b: typing.Annotated[float, pydantic.Field(ge=0.0, le=1.0)] | None = None
    gamma: typing.Annotated[float, pydantic.Field(ge=0.0)] | list[float] | typing.Literal["auto"]
    horizon: typing.Annotated[int, pydantic.Field(ge=1)] = 100_000
    init: list[float] | None = None
    seed: int = 0
    stop_tolerance: typing.Annotated[float, pydantic.Field(ge=0.0)] = 1e-28

    @pydantic.model_validator(mode="after")
    def _check_coefficients(self) -> "_MethodSection":
        """Check that the method is given either by preset or by coefficients.

        Returns:
            The validated section.

        Raises:
            ValueError: if both or neither are given.
        """
        explicit = self.alpha_a is not None or self.alpha_b is not None
        if (self.preset is None) == (not explicit):
            raise ValueError("give either preset or alpha_a/alpha_b")
        return self

    @property
    def coefficients(self) -> tuple[float, float]:
        """The signal coefficients (α_a, α_b)."""
        if self.preset is not None:
            return PRESETS[self.preset]
        return self.alpha_a or 0.0, self.alpha_b or 0.0


class _OutputSection(pydantic.BaseModel):
    """The ``[output]`` section."""

    model_config = pydantic.ConfigDict(extra="forbid")

    dir: str = "out"


class Experiment(typing.NamedTuple):
    """Everything a run needs.

    Attributes:
        problem: the problem.
        regularizer: the regularizer.
        method: the method config.
        seed: seed of randomized diagnostics.
        output: output directory.
    """

    problem: Problem
    regularizer: Regularizer
    method: MethodConfig
    seed: int
    output: pathlib.Path


def _toml_value(value: typing.Any) -> str:
    """Render a value as TOML.

    Args:
        value: a bool, number, string or list of them.

    Returns:
        The TOML text, floats use their round-trip repr.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    return "[" + ", ".join(_toml_value(item) for item in value) + "]"


class ExperimentConfig(pydantic.BaseModel):
    """A validated experiment configuration file."""

    model_config = pydantic.ConfigDict(extra="forbid")

    problem: _ProblemSection
    regularizer: _RegularizerSection
    method: _MethodSection
    output: _OutputSection = _OutputSection()

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        """Parse TOML text.

        Args:
            text: the configuration.

        Returns:
            The validated configuration.

        Raises:
            ConfigError: if the text is not TOML or does not validate.
        """
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
        try:
            return cls.model_validate(data)
        except pydantic.ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
                for error in exc.errors()
            )
            raise ConfigError(f"invalid configuration: {problems}") from exc

    @classmethod
    def load(cls, path: pathlib.Path) -> "ExperimentConfig":
        """Read and parse a configuration file, resolving its matrix files.

        Args:
            path: the file.

        Returns:
            The validated configuration.

        Raises:
            ConfigError: if the file cannot be read or does not validate.
        """
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        config = cls.parse(text)
        return config.model_copy(
            update={"problem": config.problem.resolve_paths(path.parent.absolute())}
        )

    def render(self) -> str:
        """Render the configuration as TOML.

        Returns:
            Text that parses back into an equal configuration.
        """
        parts = []
        for name in ("problem", "regularizer", "method", "output"):
            section = getattr(self, name)
            lines = [f"[{name}]"]
            for key, value in section.model_dump().items():
                if value is None:
                    continue
                lines.append(f"{key} = {_toml_value(value)}")
            parts.append("\n".join(lines))
        return "\n\n".join(parts) + "\n"

    def digest(self) -> str:
        """Hash the rendered configuration.

        Returns:
            The sha256 hex digest.
        """
        return hashlib.sha256(self.render().encode("utf-8")).hexdigest()

    def with_override(self, path: str, raw: str) -> "ExperimentConfig":
        """Replace one key, given as ``section.key``, by a TOML literal.

        Args:
            path: dotted key path.
            raw: the new value; text that is not a TOML literal is taken as a string.

        Returns:
            The new validated configuration.

        Raises:
            ConfigError: if the path is unknown or the result does not validate.
        """
        section, _, key = path.partition(".")
        data = self.model_dump(exclude_none=True)
        if section not in data or not key:
            raise ConfigError(f"unknown configuration key {path}")
        try:
            value = tomllib.loads(f"value = {raw}")["value"]
        except tomllib.TOMLDecodeError:
            value = raw
        data[section][key] = value
        try:
            return type(self).model_validate(data)
        except pydantic.ValidationError as exc:
            message = exc.errors()[0]["msg"]
            raise ConfigError(f"invalid value {raw!r} for {path}: {message}") from exc

    def build(self, base_dir: pathlib.Path | None = None) -> Experiment:
        """Instantiate the problem, the regularizer and the method.

        Args:
            base_dir: directory relative matrix files are read from.

        Returns:
            The experiment.

        Raises:
            ConfigError: if the pieces do not fit together.
        """
        base_dir = base_dir or pathlib.Path(".")
        try:
            problem = self.problem.build(base_dir)
            regularizer = Regularizer(make_kernel(self.regularizer.kernel), problem.domain)
            alpha_a, alpha_b = self.method.coefficients
            gamma: float | tuple[float, ...]
            if self.method.gamma == "auto":
                gamma = default_step(problem, alpha_a, alpha_b)
                logger.info("using the default step %r", gamma)
            elif isinstance(self.method.gamma, list):
                gamma = tuple(self.method.gamma)
            else:
                gamma = self.method.gamma
            init = (
                tuple(self.method.init)
                if self.method.init is not None
                else tuple(problem.domain.slater_point.tolist())
            )
            method = MethodConfig(
                alpha_a=alpha_a,
                alpha_b=alpha_b,
                gamma=gamma,
                horizon=self.method.horizon,
                init=init,
                stop_tolerance=self.method.stop_tolerance,
            )
        except (ValueError, pydantic.ValidationError) as exc:
            raise ConfigError(f"inconsistent configuration: {exc}") from exc
        return Experiment(
            problem, regularizer, method, self.method.seed, pathlib.Path(self.output.dir)
        )
