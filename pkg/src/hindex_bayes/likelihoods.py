"""Observation families for the h-index and the deviance they induce.

Every family is parameterised by its mean, which is the structural model
mean ``mean_h(P, C)``. The negative binomial uses dispersion ``r`` and
success probability ``q = r / (r + mu)``, so ``r (1 - q) / q == mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .data import Dataset
from .models import DomainError, MeanModelSpec, check_admissible, mean_h

LOG_2PI = math.log(2.0 * math.pi)


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    NEGBIN = "negbin"

    @property
    def nuisance_name(self) -> str | None:
        return {Family.GAUSSIAN: "sigma", Family.NEGBIN: "r"}.get(self)

    @property
    def is_count(self) -> bool:
        return self is not Family.GAUSSIAN


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    nuisance: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam.nuisance_name is None:
            if self.nuisance is not None:
                raise DomainError(f"{fam.value} takes no nuisance parameter")
        else:
            if self.nuisance is None or not (0 < self.nuisance < math.inf):
                raise DomainError(
                    f"{fam.value} needs a positive finite {fam.nuisance_name}, got {self.nuisance}"
                )
            object.__setattr__(self, "nuisance", float(self.nuisance))


def log_density_array(family: Family, nuisance, mu, y, log_y_factorial=None):
    """Elementwise log-density without argument checks.

    ``log_y_factorial`` (``gammaln(y + 1)``) may be precomputed by callers
    that evaluate the same observations many times.
    """
    mu = np.asarray(mu, dtype=float)
    y = np.asarray(y, dtype=float)
    if family is Family.GAUSSIAN:
        z = (y - mu) / nuisance
        return -0.5 * LOG_2PI - np.log(nuisance) - 0.5 * z * z
    if log_y_factorial is None:
        log_y_factorial = gammaln(y + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if family is Family.POISSON:
            # xlogy semantics: 0 * log(mu) is 0
            term = np.where(y == 0, 0.0, y * np.log(mu))
            return term - mu - log_y_factorial
        if family is Family.NEGBIN:
            r = nuisance
            log_r_mu = np.log(r + mu)
            term = np.where(y == 0, 0.0, y * (np.log(mu) - log_r_mu))
            return (
                gammaln(y + r)
                - gammaln(r)
                - log_y_factorial
                - r * np.log1p(mu / r)
                + term
            )
    raise DomainError(f"unknown family {family!r}")


def _check_count(y) -> None:
    if not (float(y) >= 0 and float(y) == math.floor(float(y))):
        raise DomainError(f"count families need a non-negative integer observation, got {y}")


def log_density(fam: FamilySpec, mu: float, y) -> float:
    """Log-density (Gaussian) or log-pmf (count families) of ``y`` at mean ``mu``."""
    if not (mu > 0 and math.isfinite(mu)):
        raise DomainError(f"mean must be positive and finite, got {mu}")
    if fam.family.is_count:
        _check_count(y)
    return float(log_density_array(fam.family, fam.nuisance, mu, float(y)))


def total_deviance(fam: FamilySpec, model: MeanModelSpec, d: Dataset) -> float:
    """``-2`` times the summed log-density over the records of ``d``.

    Terms are accumulated in record order so the result does not depend on
    how the caller batches evaluation.
    """
    total = 0.0
    for rec in d.records:
        try:
            check_admissible(model.kind, rec.P, rec.C)
            mu = mean_h(model, rec.P, rec.C)
            total += log_density(fam, mu, rec.h)
        except DomainError as exc:
            raise DomainError(f"record {rec.id}: {exc}") from None
    return -2.0 * total
