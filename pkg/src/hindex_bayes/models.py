"""The four structural h-index models and their parameter ranges."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

INF = math.inf


class DomainError(ValueError):
    pass


class ModelKind(str, Enum):
    EGGHE_ROUSSEAU = "egghe-rousseau"
    HIRSCH = "hirsch"
    GLANZEL_SCHUBERT = "glanzel-schubert"
    TWO_PARAM_HIRSCH = "two-param-hirsch"

    @property
    def param_names(self) -> tuple[str, ...]:
        return _PARAM_NAMES[self]

    @property
    def uses_citations(self) -> bool:
        return self is not ModelKind.EGGHE_ROUSSEAU


_PARAM_NAMES = {
    ModelKind.EGGHE_ROUSSEAU: ("a",),
    ModelKind.HIRSCH: ("a",),
    ModelKind.GLANZEL_SCHUBERT: ("a", "c"),
    ModelKind.TWO_PARAM_HIRSCH: ("a", "b"),
}

_BOUNDS = {
    ModelKind.EGGHE_ROUSSEAU: ((1.0, INF),),
    ModelKind.HIRSCH: ((3.0, 5.0),),
    ModelKind.GLANZEL_SCHUBERT: ((1.0, INF), (0.0, INF)),
    ModelKind.TWO_PARAM_HIRSCH: ((1.0, INF), (0.0, INF)),
}


def param_bounds(kind: ModelKind | str) -> list[tuple[float, float]]:
    """Open ``(lower, upper)`` interval for each parameter of ``kind``."""
    return list(_BOUNDS[ModelKind(kind)])


def in_bounds(values, bounds) -> bool:
    return all(lo < v < hi for v, (lo, hi) in zip(values, bounds))


@dataclass(frozen=True)
class ParameterVector:
    values: tuple[float, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "bounds", tuple(tuple(b) for b in self.bounds))
        if len(self.values) != len(self.bounds):
            raise DomainError("values and bounds differ in length")
        for i, (v, (lo, hi)) in enumerate(zip(self.values, self.bounds)):
            if not lo < v < hi:
                raise DomainError(f"parameter {i} = {v} outside ({lo}, {hi})")


@dataclass(frozen=True)
class MeanModelSpec:
    kind: ModelKind
    params: ParameterVector

    @classmethod
    def of(cls, kind: ModelKind | str, *values: float) -> "MeanModelSpec":
        kind = ModelKind(kind)
        if len(values) != len(kind.param_names):
            raise DomainError(
                f"{kind.value} takes {len(kind.param_names)} parameter(s), got {len(values)}"
            )
        return cls(kind, ParameterVector(values, param_bounds(kind)))

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.params.bounds != tuple(param_bounds(self.kind)):
            raise DomainError(f"bounds do not match {self.kind.value}")

    @property
    def values(self) -> tuple[float, ...]:
        return self.params.values


def mean_h_array(kind: ModelKind, theta, P, C):
    """Vectorised model mean; no validation.

    Callers decide what to do with non-finite or zero results caused by
    over/underflow. The Glanzel-Schubert blend is taken in base-2 log space so
    power-of-two inputs come out exact.
    """
    P = np.asarray(P, dtype=float)
    C = np.asarray(C, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if kind is ModelKind.EGGHE_ROUSSEAU:
            (a,) = theta
            return np.power(P, 1.0 / a)
        if kind is ModelKind.HIRSCH:
            (a,) = theta
            return np.sqrt(C / a)
        if kind is ModelKind.GLANZEL_SCHUBERT:
            a, c = theta
            log_p = np.log2(P)
            return c * np.exp2((log_p + a * (np.log2(C) - log_p)) / (a + 1.0))
        if kind is ModelKind.TWO_PARAM_HIRSCH:
            a, b = theta
            return np.power(C / a, 1.0 / (a * b))
    raise DomainError(f"unknown model kind {kind!r}")


def check_admissible(kind: ModelKind, P, C) -> None:
    if P < 1:
        raise DomainError(f"P must be >= 1, got {P}")
    if C < 0:
        raise DomainError(f"C must be >= 0, got {C}")
    if kind.uses_citations and C < 1:
        raise DomainError(f"{kind.value} is undefined at C = 0")


def mean_h(spec: MeanModelSpec, P, C) -> float:
    """Model mean h-index for a journal with ``P`` papers and ``C`` citations.

    >>> mean_h(MeanModelSpec.of("glanzel-schubert", 2, 1), 8, 64)
    8.0
    """
    check_admissible(spec.kind, P, C)
    value = float(mean_h_array(spec.kind, spec.values, P, C))
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{spec.kind.value} mean not representable: {value}")
    return value
