"""Parametric input distributions and their weak-derivative decompositions.

Every family carries what the gradient estimators need:

- ``density`` / ``logpdf``      the nominal density f(x; θ)
- ``sample``                    inverse-transform draws with a fixed uniform budget
- ``score``                     ∂ ln f(x; θ) / ∂θ for the designated parameter θ
- ``decomposition``             the triple (c(θ), f⁺, f⁻) with ∂f/∂θ = c (f⁺ − f⁻)

The designated parameter is the mean for Exponential and Gaussian and the
scale for Gamma and Erlang.
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any, ClassVar, Dict, Mapping, Optional, Tuple, Type, Union

import numpy as np
from scipy import stats

from weakgrad.core.rng_streams import Shape, UniformStream
from weakgrad.errors import (
    DecompositionUnavailableError,
    DomainError,
    ParameterError,
    SupportViolationError,
)

ArrayLike = Union[float, np.ndarray]


class Family(str, Enum):
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    GAUSSIAN = "gaussian"
    ERLANG = "erlang"
    WEIBULL = "weibull"


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be strictly positive and finite, got {value}")


def _unwrap(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


@dataclass(frozen=True)
class DecompositionTriple:
    """Weak-derivative triple: ∂f/∂θ = c · (f⁺ − f⁻)."""

    c: float
    plus_part: "ParametricDistribution"
    minus_part: "ParametricDistribution"


@dataclass(frozen=True)
class ParametricDistribution(ABC):
    """Immutable distribution instance; sampling mutates only the caller's stream."""

    family: ClassVar[Family]
    designated_parameter: ClassVar[Optional[str]] = None

    # ---- parameters --------------------------------------------------------

    @property
    def theta(self) -> float:
        if self.designated_parameter is None:
            raise DecompositionUnavailableError(
                f"{self.family.value} has no designated sensitivity parameter"
            )
        return float(getattr(self, self.designated_parameter))

    def with_theta(self, value: float) -> "ParametricDistribution":
        """Copy with the designated parameter replaced."""
        self.theta  # raises for families without one
        return replace(self, **{self.designated_parameter: value})

    @property
    def uniforms_per_draw(self) -> int:
        return 1

    @property
    def support(self) -> Tuple[float, float]:
        return (0.0, math.inf)

    def describe(self) -> Dict[str, Any]:
        return {"family": self.family.value, **asdict(self)}

    # ---- density -----------------------------------------------------------

    @cached_property
    def _frozen(self) -> Any:
        return self._build_frozen()

    @abstractmethod
    def _build_frozen(self) -> Any:
        """Return the matching scipy frozen distribution."""

    def logpdf(self, x: ArrayLike) -> np.ndarray:
        return np.asarray(self._frozen.logpdf(x), dtype=float)

    def pdf(self, x: ArrayLike) -> np.ndarray:
        return np.asarray(self._frozen.pdf(x), dtype=float)

    # ---- sampling ----------------------------------------------------------

    @abstractmethod
    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms with trailing axis ``uniforms_per_draw`` to draws."""

    # ---- derivative machinery ---------------------------------------------

    def _score(self, x: np.ndarray) -> np.ndarray:
        raise DecompositionUnavailableError(f"score is not available for {self.family.value}")

    def decomposition(self) -> DecompositionTriple:
        raise DecompositionUnavailableError(
            f"no weak-derivative decomposition for family {self.family.value}"
        )

    def check_support(self, x: np.ndarray) -> None:
        lo, hi = self.support
        if np.any((x < lo) | (x > hi) | np.isnan(x)):
            raise DomainError(f"point outside the support [{lo}, {hi}] of {self.family.value}")


# ===================================================================
# Families
# ===================================================================

@dataclass(frozen=True)
class Exponential(ParametricDistribution):
    mean: float

    family: ClassVar[Family] = Family.EXPONENTIAL
    designated_parameter: ClassVar[Optional[str]] = "mean"

    def __post_init__(self) -> None:
        _positive("mean", self.mean)

    def _build_frozen(self) -> Any:
        return stats.expon(scale=self.mean)

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return -self.mean * np.log(u[..., 0])

    def _score(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.mean**2

    def decomposition(self) -> DecompositionTriple:
        return DecompositionTriple(
            c=1.0 / self.mean,
            plus_part=Erlang(stages=2, scale=self.mean),
            minus_part=Exponential(mean=self.mean),
        )


@dataclass(frozen=True)
class Gamma(ParametricDistribution):
    shape: float
    scale: float

    family: ClassVar[Family] = Family.GAMMA
    designated_parameter: ClassVar[Optional[str]] = "scale"

    def __post_init__(self) -> None:
        _positive("shape", self.shape)
        _positive("scale", self.scale)

    def _build_frozen(self) -> Any:
        return stats.gamma(a=self.shape, scale=self.scale)

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        # Inverse regularized incomplete gamma: one uniform per draw.
        return np.asarray(self._frozen.ppf(u[..., 0]), dtype=float)

    def _score(self, x: np.ndarray) -> np.ndarray:
        return x / self.scale**2 - self.shape / self.scale

    def decomposition(self) -> DecompositionTriple:
        return DecompositionTriple(
            c=self.shape / self.scale,
            plus_part=Gamma(shape=self.shape + 1, scale=self.scale),
            minus_part=Gamma(shape=self.shape, scale=self.scale),
        )


@dataclass(frozen=True)
class Erlang(ParametricDistribution):
    stages: int
    scale: float

    family: ClassVar[Family] = Family.ERLANG
    designated_parameter: ClassVar[Optional[str]] = "scale"

    def __post_init__(self) -> None:
        if isinstance(self.stages, bool) or int(self.stages) != self.stages or self.stages < 1:
            raise ParameterError(f"stages must be an integer >= 1, got {self.stages}")
        object.__setattr__(self, "stages", int(self.stages))
        _positive("scale", self.scale)

    @property
    def uniforms_per_draw(self) -> int:
        return self.stages

    def _build_frozen(self) -> Any:
        return stats.erlang(self.stages, scale=self.scale)

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return -self.scale * np.log(u).sum(axis=-1)

    def _score(self, x: np.ndarray) -> np.ndarray:
        return x / self.scale**2 - self.stages / self.scale

    def decomposition(self) -> DecompositionTriple:
        return DecompositionTriple(
            c=self.stages / self.scale,
            plus_part=Erlang(stages=self.stages + 1, scale=self.scale),
            minus_part=Erlang(stages=self.stages, scale=self.scale),
        )


@dataclass(frozen=True)
class Gaussian(ParametricDistribution):
    mean: float
    stddev: float

    family: ClassVar[Family] = Family.GAUSSIAN
    designated_parameter: ClassVar[Optional[str]] = "mean"

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise ParameterError(f"mean must be finite, got {self.mean}")
        _positive("stddev", self.stddev)

    @property
    def support(self) -> Tuple[float, float]:
        return (-math.inf, math.inf)

    def _build_frozen(self) -> Any:
        return stats.norm(loc=self.mean, scale=self.stddev)

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self._frozen.ppf(u[..., 0]), dtype=float)

    def _score(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.stddev**2

    def decomposition(self) -> DecompositionTriple:
        rate = 1.0 / (2.0 * self.stddev**2)
        return DecompositionTriple(
            c=1.0 / (self.stddev * math.sqrt(2.0 * math.pi)),
            plus_part=Weibull(rate=rate, loc=self.mean),
            minus_part=Weibull(rate=rate, loc=self.mean, reflected=True),
        )


@dataclass(frozen=True)
class Weibull(ParametricDistribution):
    """Shape-2 Weibull with density 2λy·exp(−λy²), y = x − loc (or loc − x if reflected)."""

    rate: float
    loc: float = 0.0
    reflected: bool = False

    family: ClassVar[Family] = Family.WEIBULL

    def __post_init__(self) -> None:
        _positive("rate", self.rate)
        if not math.isfinite(self.loc):
            raise ParameterError(f"loc must be finite, got {self.loc}")

    @property
    def support(self) -> Tuple[float, float]:
        return (-math.inf, self.loc) if self.reflected else (self.loc, math.inf)

    def _build_frozen(self) -> Any:
        scale = 1.0 / math.sqrt(self.rate)
        if self.reflected:
            return stats.weibull_max(2.0, loc=self.loc, scale=scale)
        return stats.weibull_min(2.0, loc=self.loc, scale=scale)

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        radius = np.sqrt(-np.log(u[..., 0]) / self.rate)
        return self.loc - radius if self.reflected else self.loc + radius


FAMILIES: Dict[Family, Type[ParametricDistribution]] = {
    Family.EXPONENTIAL: Exponential,
    Family.GAMMA: Gamma,
    Family.GAUSSIAN: Gaussian,
    Family.ERLANG: Erlang,
    Family.WEIBULL: Weibull,
}


# ===================================================================
# Operations
# ===================================================================

def density(d: ParametricDistribution, x: ArrayLike) -> ArrayLike:
    """f(x; params); zero outside the support."""
    scalar = np.ndim(x) == 0
    return _unwrap(d.pdf(np.asarray(x, dtype=float)), scalar)


def sample(d: ParametricDistribution, u: UniformStream, size: Optional[Shape] = None) -> ArrayLike:
    """Draw from ``d`` consuming exactly ``d.uniforms_per_draw`` uniforms per draw."""
    if size is None:
        return float(d.from_uniforms(u.uniforms((1, d.uniforms_per_draw)))[0])
    shape = (size,) if isinstance(size, int) else tuple(size)
    return d.from_uniforms(u.uniforms(shape + (d.uniforms_per_draw,)))


def score(d: ParametricDistribution, x: ArrayLike) -> ArrayLike:
    """∂ ln f(x; θ) / ∂θ for the designated parameter."""
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    d.check_support(arr)
    return _unwrap(d._score(arr), scalar)


def decomposition(d: ParametricDistribution) -> DecompositionTriple:
    return d.decomposition()


def likelihood_ratio_weight(d: ParametricDistribution, x: ArrayLike) -> ArrayLike:
    """c(θ) · (f⁺(x) − f⁻(x)) / f(x), the single-run weak-derivative weight."""
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    triple = d.decomposition()
    log_nominal = d.logpdf(arr)
    if np.any(np.isneginf(log_nominal) | np.isnan(log_nominal)):
        raise SupportViolationError(
            f"{d.family.value} density is zero at a point where a likelihood ratio is required"
        )
    plus_ratio = np.exp(triple.plus_part.logpdf(arr) - log_nominal)
    minus_ratio = np.exp(triple.minus_part.logpdf(arr) - log_nominal)
    return _unwrap(triple.c * (plus_ratio - minus_ratio), scalar)


# ===================================================================
# Config notation
# ===================================================================

_NOTATION = re.compile(r"^\s*(\w+)\s*\{(.*)\}\s*$")


def _coerce(raw: str) -> Any:
    text = raw.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_distribution(value: Union[str, Mapping[str, Any], ParametricDistribution]) -> ParametricDistribution:
    """Build a distribution from ``gamma{shape=2,scale=1}`` or ``{"family": "gamma", ...}``."""
    if isinstance(value, ParametricDistribution):
        return value
    if isinstance(value, str):
        match = _NOTATION.match(value)
        if not match:
            raise ParameterError(f"cannot parse distribution {value!r}; expected family{{name=value,...}}")
        family_name, body = match.groups()
        params: Dict[str, Any] = {}
        for item in filter(None, (part.strip() for part in body.split(","))):
            if "=" not in item:
                raise ParameterError(f"distribution parameter {item!r} must be name=value")
            key, raw = item.split("=", 1)
            params[key.strip()] = _coerce(raw)
    else:
        params = dict(value)
        family_name = str(params.pop("family", ""))

    try:
        family = Family(family_name.lower())
    except ValueError:
        raise ParameterError(f"unknown distribution family {family_name!r}") from None
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {family.value}: {exc}") from exc
