"""Run configurations (sweep, verify, apply, kernel) and report writers."""

from __future__ import annotations

import contextlib
import csv
import io
import json
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.config import settings
from src.core.exceptions import ConfigError, DomainError
from src.core.harness.identities import VerifyProfile
from src.core.kernels.families import (
    KernelFamily,
    KernelSpec,
    NuMeasure,
    PsiFunction,
    default_families,
    nu_exponential,
    nu_gamma,
    psi_constant,
    psi_exp_decay,
    psi_imaginary_power,
    psi_indicator,
)
from src.core.models import AlphaIndex, SweepGrid
from src.core.operators import (
    InputFunction,
    SpectralVector,
    bump_input,
    gaussian_input,
    laguerre_input,
)

logger = logging.getLogger(__name__)

PSI_BUILDERS = {
    "constant": psi_constant,
    "indicator": psi_indicator,
    "imaginary_power": psi_imaginary_power,
    "exp_decay": psi_exp_decay,
}
NU_BUILDERS = {
    "atom": NuMeasure.atom,
    "exponential": nu_exponential,
    "gamma": nu_gamma,
}

DEFAULT_VERIFY_ALPHAS = {
    1: [(-0.9,), (-0.5,), (0.0,), (2.5,)],
    2: [(-0.9, 1.5), (-0.5, 0.0), (0.0, 2.5)],
}
DEFAULT_SWEEP_ALPHAS = [(-0.9,), (-0.5,), (0.0,), (2.5,), (-0.9, 1.5)]


class OperatorName(StrEnum):
    HEAT = "heat"
    MAXIMAL = "maximal"
    RIESZ = "riesz"
    GFUN = "gfun"
    LAPLACE_MULT = "laplace_mult"
    STIELTJES_MULT = "stieltjes_mult"


class Representation(StrEnum):
    ALL = "all"
    CLOSED = "closed"
    SPECTRAL = "spectral"
    SCHLAFLI = "schlafli"


class OutputFormat(StrEnum):
    JSON = "json"
    CSV = "csv"


def _alpha_components(value: Sequence[float]) -> tuple[float, ...]:
    try:
        return AlphaIndex(components=tuple(value)).components
    except ValidationError as exc:
        raise ValueError(exc.errors()[0]["msg"]) from None


def _build(registry: dict[str, Any], kind: str, name: str, params: dict[str, Any]) -> Any:
    if name not in registry:
        raise ConfigError(f"unknown {kind} {name!r}; choose one of {sorted(registry)}")
    try:
        return registry[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} {name!r}: {exc}") from None


class _Strict(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class PsiConfig(_Strict):
    name: str
    params: dict[str, float] = Field(default_factory=dict)

    def build(self) -> PsiFunction:
        return _build(PSI_BUILDERS, "psi", self.name, self.params)


class NuConfig(_Strict):
    name: str
    params: dict[str, float] = Field(default_factory=dict)

    def build(self) -> NuMeasure:
        return _build(NU_BUILDERS, "measure", self.name, self.params)


class CoefficientEntry(_Strict):
    k: tuple[int, ...]
    c: float


class InputConfig(_Strict):
    """A named test function, or explicit Laguerre coefficients."""

    name: str
    k: tuple[int, ...] | None = None
    center: tuple[float, ...] | None = None
    width: float | None = None
    radius: float | None = None
    coefficients: list[CoefficientEntry] | None = None

    @model_validator(mode="after")
    def validate_fields(self) -> InputConfig:
        required = {
            "laguerre": ("k",),
            "gaussian": ("center", "width"),
            "bump": ("center", "radius"),
            "coefficients": ("coefficients",),
        }
        if self.name not in required:
            raise ValueError(f"unknown input {self.name!r}; choose one of {sorted(required)}")
        missing = [field for field in required[self.name] if getattr(self, field) is None]
        if missing:
            raise ValueError(f"input {self.name!r} needs {', '.join(missing)}")
        return self

    @property
    def is_coefficients(self) -> bool:
        return self.name == "coefficients"

    def build(self, alpha: Sequence[float]) -> InputFunction:
        match self.name:
            case "laguerre":
                return laguerre_input(alpha, self.k)
            case "gaussian":
                return gaussian_input(self.center, self.width)
            case "bump":
                return bump_input(self.center, self.radius)
        raise ConfigError("coefficient inputs are already spectral; use vector()")

    def vector(self, alpha: Sequence[float], k_max: int) -> SpectralVector:
        mapping = {entry.k: entry.c for entry in self.coefficients or []}
        try:
            return SpectralVector.from_mapping(alpha, k_max, mapping)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None


class FamilyConfig(_Strict):
    family: KernelFamily
    n: tuple[int, ...] | None = None
    m: int = Field(default=0, ge=0)
    psi: PsiConfig | None = None
    nu: NuConfig | None = None

    def build(self, dim: int) -> KernelSpec:
        n = self.n if self.n is not None else (1,) + (0,) * (dim - 1)
        try:
            match self.family:
                case KernelFamily.HEAT_MAX:
                    return KernelSpec.heat_max()
                case KernelFamily.POISSON_MAX:
                    return KernelSpec.poisson_max()
                case KernelFamily.RIESZ:
                    return KernelSpec.riesz(n)
                case KernelFamily.SQUARE_FN:
                    return KernelSpec.square_fn(self.n or (0,) * dim, self.m)
                case KernelFamily.POISSON_SQUARE_FN:
                    return KernelSpec.poisson_square_fn(self.n or (0,) * dim, self.m)
                case KernelFamily.LAPLACE_MULT:
                    return KernelSpec.laplace_mult((self.psi or PsiConfig(name="constant")).build())
                case KernelFamily.STIELTJES_MULT:
                    if self.nu is None:
                        raise ConfigError("stieltjes_mult needs a measure nu")
                    return KernelSpec.stieltjes_mult(self.nu.build())
        except DomainError as exc:
            raise ConfigError(f"family {self.family}: {exc}") from None
        raise ConfigError(f"unsupported family {self.family}")


class QuadratureOverrides(_Strict):
    """Settings read at call time that a run config may override."""

    t_panels: int | None = Field(default=None, ge=1)
    t_panel_points: int | None = Field(default=None, ge=2)
    spectral_k_max: int | None = Field(default=None, ge=0)
    heat_max_grid_points: int | None = Field(default=None, ge=8)
    envelope_cutoff: float | None = Field(default=None, gt=0.0, lt=1.0)

    @contextlib.contextmanager
    def applied(self) -> Iterator[None]:
        previous = {}
        for field, value in self.model_dump(exclude_none=True).items():
            name = field.upper()
            previous[name] = getattr(settings, name)
            setattr(settings, name, value)
            logger.debug("setting %s overridden to %s", name, value)
        try:
            yield
        finally:
            for name, value in previous.items():
                setattr(settings, name, value)


class _RunConfig(_Strict):
    schema_version: int = settings.CONFIG_SCHEMA_VERSION
    seed: int = 0
    quadrature: QuadratureOverrides = Field(default_factory=QuadratureOverrides)

    @field_validator("schema_version")
    @classmethod
    def validate_schema_version(cls, value: int) -> int:
        if value != settings.CONFIG_SCHEMA_VERSION:
            raise ValueError(
                f"schema_version {value} is not supported (expected "
                f"{settings.CONFIG_SCHEMA_VERSION})"
            )
        return value


class SweepConfig(_RunConfig):
    alphas: list[tuple[float, ...]] = Field(default_factory=lambda: list(DEFAULT_SWEEP_ALPHAS))
    families: list[FamilyConfig] | None = None
    grid: SweepGrid = Field(default_factory=SweepGrid)
    threads: int | None = Field(default=None, ge=1)
    record_runtime: bool = False

    @field_validator("alphas")
    @classmethod
    def validate_alphas(cls, value: list[tuple[float, ...]]) -> list[tuple[float, ...]]:
        if not value:
            raise ValueError("alphas must not be empty")
        return [_alpha_components(alpha) for alpha in value]

    @field_validator("families")
    @classmethod
    def validate_families(cls, value: list[FamilyConfig] | None) -> list[FamilyConfig] | None:
        if value is not None and not value:
            raise ValueError("families must name at least one kernel family")
        return value

    def build_families(self, dim: int) -> list[KernelSpec]:
        """The configured families, or all default families of dimension dim."""
        if self.families is None:
            return default_families(dim)
        return [family.build(dim) for family in self.families]


class VerifyConfig(_RunConfig):
    alphas: list[tuple[float, ...]] | None = None
    dim: int = Field(default=1, ge=1, le=2)
    profile: VerifyProfile = VerifyProfile.QUICK

    @field_validator("alphas")
    @classmethod
    def validate_alphas(
        cls, value: list[tuple[float, ...]] | None
    ) -> list[tuple[float, ...]] | None:
        if value is None:
            return None
        if not value:
            raise ValueError("alphas must not be empty")
        return [_alpha_components(alpha) for alpha in value]

    @property
    def resolved_alphas(self) -> list[tuple[float, ...]]:
        return self.alphas if self.alphas is not None else DEFAULT_VERIFY_ALPHAS[self.dim]


class ApplyConfig(_RunConfig):
    op: OperatorName
    alpha: tuple[float, ...]
    input: InputConfig
    points: list[tuple[float, ...]] = Field(min_length=1)
    k_max: int = Field(default_factory=lambda: settings.OPERATOR_K_MAX, ge=0)
    t: float | None = Field(default=None, ge=0.0)
    n: tuple[int, ...] | None = None
    m: int = Field(default=0, ge=0)
    psi: PsiConfig | None = None
    nu: NuConfig | None = None

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        return _alpha_components(value)

    @model_validator(mode="after")
    def validate_operator(self) -> ApplyConfig:
        dim = len(self.alpha)
        if any(len(p) != dim or not all(c > 0.0 for c in p) for p in self.points):
            raise ValueError(f"points must lie in R_+^{dim}")
        if self.n is not None and len(self.n) != dim:
            raise ValueError(f"n must have {dim} components")
        needs = {
            OperatorName.HEAT: ("t", self.t),
            OperatorName.RIESZ: ("n", self.n),
            OperatorName.STIELTJES_MULT: ("nu", self.nu),
        }
        if self.op in needs and needs[self.op][1] is None:
            raise ValueError(f"operator {self.op} needs {needs[self.op][0]}")
        return self


class KernelRequest(_Strict):
    alpha: tuple[float, ...]
    t: float = Field(gt=0.0)
    x: tuple[float, ...]
    y: tuple[float, ...]
    rep: Representation = Representation.ALL
    shells: int = Field(default=5, ge=0)

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        return _alpha_components(value)

    @model_validator(mode="after")
    def validate_points(self) -> KernelRequest:
        for name, p in (("x", self.x), ("y", self.y)):
            if len(p) != len(self.alpha) or not all(c > 0.0 for c in p):
                raise ValueError(f"{name} must lie in R_+^{len(self.alpha)}")
        return self


# -- parsing ------------------------------------------------------------------------------


def _readable(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        where = ".".join(str(p) for p in error["loc"]) or "config"
        parts.append(f"{where}: {error['msg']}")
    return "; ".join(parts)


def parse_config[T: BaseModel](model: type[T], payload: dict[str, Any]) -> T:
    """Validate a config dict; every problem becomes one ConfigError."""
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"invalid {model.__name__}: {_readable(exc)}") from None


def read_payload(path: str | Path | None) -> dict[str, Any]:
    """The JSON object in path; no path means an empty config."""
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return payload


def load_config[T: BaseModel](model: type[T], path: str | Path) -> T:
    return parse_config(model, read_payload(path))


# -- writers ------------------------------------------------------------------------------


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def report_payload(report: BaseModel) -> dict[str, Any]:
    """model_dump plus the pass flag, which is a derived property."""
    payload = report.model_dump()
    payload["passed"] = bool(getattr(report, "passed", True))
    return payload


def to_json(payload: Any) -> str:
    """Floats keep their shortest round-trip repr."""
    return json.dumps(payload, indent=2, default=_json_default) + "\n"


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return "%.16e" % value if math.isfinite(value) else str(float(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(_csv_cell(v) for v in value)
    return str(value)


def to_csv(rows: Iterable[dict[str, Any]], fieldnames: Sequence[str]) -> str:
    """One header row, then one quoted row per record."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _csv_cell(row.get(key, "")) for key in fieldnames})
    return buffer.getvalue()


def write_output(text: str, out: str | Path | None) -> None:
    if out is None:
        print(text, end="")
        return
    Path(out).write_text(text)
    logger.info("wrote %s", out)
