"""Synthetic journal datasets drawn from a known model and family."""

from __future__ import annotations

import math

import numpy as np

from .data import Dataset, JournalRecord, Provenance
from .likelihoods import Family, FamilySpec
from .models import MeanModelSpec, mean_h_array


def _log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))


def generate_synthetic(
    kind,
    params,
    family,
    nuisance: float | None = None,
    n: int = 134,
    P_range: tuple[float, float] = (20, 5000),
    citation_rate_range: tuple[float, float] = (1, 50),
    seed: int = 0,
    name: str = "synthetic",
) -> Dataset:
    """Simulate ``n`` journals.

    P is log-uniform over ``P_range`` and rounded; citations per paper are
    log-uniform over ``citation_rate_range`` and ``C = max(1, round(P * rate))``.
    h is drawn from ``family`` with mean ``mean_h``; Gaussian draws are
    rounded to the nearest non-negative integer.
    """
    spec = MeanModelSpec.of(kind, *params)
    fam = FamilySpec(Family(family), nuisance)
    if n < 1:
        raise ValueError("n must be >= 1")
    for label, (lo, hi) in (("P_range", P_range), ("citation_rate_range", citation_rate_range)):
        if not (0 < lo <= hi < math.inf):
            raise ValueError(f"{label} must satisfy 0 < low <= high < inf, got ({lo}, {hi})")
    if P_range[1] < 1:
        raise ValueError("P_range must reach P >= 1")

    rng = np.random.default_rng(seed)
    P = np.maximum(1, np.rint(_log_uniform(rng, *P_range, n))).astype(np.int64)
    rate = _log_uniform(rng, *citation_rate_range, n)
    C = np.maximum(1, np.rint(P * rate)).astype(np.int64)
    mu = mean_h_array(spec.kind, spec.values, P, C)
    if not np.all(np.isfinite(mu) & (mu > 0)):
        raise ValueError("model mean is not finite and positive over the covariate ranges")

    if fam.family is Family.GAUSSIAN:
        h = np.maximum(0, np.rint(rng.normal(mu, fam.nuisance)))
    elif fam.family is Family.POISSON:
        h = rng.poisson(mu)
    else:
        r = fam.nuisance
        h = rng.negative_binomial(r, r / (r + mu))

    width = len(str(n))
    records = [
        JournalRecord(f"S{i + 1:0{width}d}", int(hi), int(p), int(c))
        for i, (hi, p, c) in enumerate(zip(h, P, C))
    ]
    return Dataset(name, tuple(records), Provenance.SYNTHETIC)
