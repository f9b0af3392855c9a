"""Posterior summaries, mean deviance, model ranking and fitted-mean tables."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, serialize_dataset
from .likelihoods import Family, log_density_array
from .models import DomainError, ModelKind, check_admissible, mean_h_array
from .sampler import ChainSet, LogPosterior, parameter_names, rhat

MIN_DRAWS = 40
QUANTILES = (0.025, 0.5, 0.975)
_CHUNK = 4096


class ReportError(ValueError):
    pass


def quantiles(x, probs=QUANTILES) -> np.ndarray:
    """Quantiles by linear interpolation between order statistics.

    The 1-based position of quantile ``p`` among ``n`` sorted values is
    ``p * (n - 1) + 1`` (numpy's default "linear" method).
    """
    return np.quantile(np.asarray(x, dtype=float), probs, axis=0, method="linear")


def posterior_summary(cs: ChainSet | np.ndarray, names=None) -> dict[str, tuple[float, float, float]]:
    """Median and central 95% interval per parameter, over pooled chains.

    Returns ``{name: (median, q2.5, q97.5)}``.
    """
    if isinstance(cs, ChainSet):
        draws, names = cs.pooled(), cs.names
    else:
        draws = np.asarray(cs, dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        names = names or tuple(f"x{i}" for i in range(draws.shape[1]))
    if draws.shape[0] < MIN_DRAWS:
        raise ReportError(f"need at least {MIN_DRAWS} pooled draws, got {draws.shape[0]}")
    q = quantiles(draws)
    return {n: (float(q[1, j]), float(q[0, j]), float(q[2, j])) for j, n in enumerate(names)}


def _check_layout(cs: ChainSet, kind, family) -> None:
    expected = parameter_names(kind, family)
    if tuple(cs.names) != expected:
        raise ReportError(f"chain columns {tuple(cs.names)} do not match {expected}")


def deviances(draws: np.ndarray, dataset: Dataset, kind, family) -> np.ndarray:
    """Total deviance at each row of ``draws`` (vectorised over draws)."""
    target = LogPosterior(dataset, kind, family)
    kind, family = target.kind, target.family
    n_model = len(kind.param_names)
    out = np.empty(draws.shape[0])
    for start in range(0, draws.shape[0], _CHUNK):
        block = draws[start : start + _CHUNK]
        theta = [block[:, j : j + 1] for j in range(n_model)]
        mu = mean_h_array(kind, theta, target.P, target.C)
        nuisance = block[:, n_model : n_model + 1] if family.nuisance_name else None
        with np.errstate(invalid="ignore", divide="ignore"):
            ll = log_density_array(family, nuisance, mu, target.h, target._log_fact)
        ll[~(np.isfinite(mu) & (mu > 0))] = -math.inf
        out[start : start + _CHUNK] = -2.0 * ll.sum(axis=1)
    return out


def mean_deviance(cs: ChainSet, dataset: Dataset, kind, family) -> float:
    """Posterior mean deviance: the average total deviance over pooled draws."""
    _check_layout(cs, kind, family)
    return float(np.mean(deviances(cs.pooled(), dataset, kind, family)))


def dataset_fingerprint(dataset: Dataset) -> str:
    return hashlib.sha256(serialize_dataset(dataset).encode("utf-8")).hexdigest()[:16]


@dataclass
class PredictionRow:
    id: str
    observed: int
    median: float
    lo: float
    hi: float
    admissible: bool = True


def predict_observed_table(
    cs: ChainSet,
    dataset: Dataset,
    kind,
    predictive: bool = False,
    seed: int = 0,
) -> list[PredictionRow]:
    """Observed h beside posterior quantiles of the fitted mean, per record.

    With ``predictive=True`` and a count family the quantiles are taken over
    posterior-predictive draws of h instead of the mean. Records the model
    cannot evaluate (C = 0 for citation models) are kept with NaN quantiles
    and ``admissible=False``.
    """
    kind = ModelKind(kind)
    draws = cs.pooled()
    n_model = len(kind.param_names)
    theta = [draws[:, j] for j in range(n_model)]
    family = Family(cs.family) if cs.family else None
    if predictive and (family is None or not family.is_count):
        raise ReportError("predictive draws need a count family on the chain set")
    rng = np.random.default_rng(seed)
    rows = []
    for rec in dataset.records:
        try:
            check_admissible(kind, rec.P, rec.C)
        except DomainError:
            rows.append(PredictionRow(rec.id, rec.h, math.nan, math.nan, math.nan, False))
            continue
        mu = mean_h_array(kind, theta, float(rec.P), float(rec.C))
        if predictive:
            if family is Family.POISSON:
                mu = rng.poisson(mu)
            else:
                r = draws[:, n_model]
                mu = rng.negative_binomial(r, r / (r + mu))
        med, lo, hi = quantiles(mu, (0.5, 0.025, 0.975))
        rows.append(PredictionRow(rec.id, rec.h, float(med), float(lo), float(hi)))
    return rows


@dataclass
class FitReport:
    model: str
    family: str
    dataset: str
    fingerprint: str
    params: dict[str, tuple[float, float, float]]
    d_bar: float
    r_hat: dict[str, float]
    predictions: list[PredictionRow] = field(default_factory=list)
    d_at_mean: float = math.nan
    n_draws: int = 0

    @property
    def p_d(self) -> float:
        """Effective number of parameters (not a paper quantity)."""
        return self.d_bar - self.d_at_mean

    @property
    def dic(self) -> float:
        return self.d_bar + self.p_d


def fit_report(cs: ChainSet, dataset: Dataset, predictive: bool = False) -> FitReport:
    if cs.model is None or cs.family is None:
        raise ReportError("chain set does not record its model and family")
    kind, family = ModelKind(cs.model), Family(cs.family)
    _check_layout(cs, kind, family)
    draws = cs.pooled()
    dev = deviances(draws, dataset, kind, family)
    d_at_mean = float(deviances(draws.mean(axis=0)[None, :], dataset, kind, family)[0])
    r_hat = rhat(cs) if cs.n_chains >= 2 else np.full(len(cs.names), math.nan)
    report = FitReport(
        model=kind.value,
        family=family.value,
        dataset=dataset.name,
        fingerprint=dataset_fingerprint(dataset),
        params=posterior_summary(cs),
        d_bar=float(np.mean(dev)),
        r_hat={n: float(v) for n, v in zip(cs.names, r_hat)},
        predictions=predict_observed_table(cs, dataset, kind, predictive=predictive, seed=cs.seed),
        d_at_mean=d_at_mean,
        n_draws=draws.shape[0],
    )
    for name, (med, lo, hi) in report.params.items():
        assert lo <= med <= hi, name
    assert report.d_bar >= dev.min()
    return report


@dataclass
class ComparisonRow:
    rank: int
    model: str
    family: str
    d_bar: float
    p_d: float
    dic: float
    best: bool


def compare_models(reports: list[FitReport], top_k: int = 3) -> list[ComparisonRow]:
    """Rank fits by ascending mean deviance and flag the ``top_k`` best.

    Ties fall back to (model, family) name order.
    """
    if len({r.fingerprint for r in reports}) > 1:
        raise ReportError("reports were fitted to different datasets")
    ordered = sorted(reports, key=lambda r: (r.d_bar, r.model, r.family))
    return [
        ComparisonRow(i + 1, r.model, r.family, r.d_bar, r.p_d, r.dic, i < top_k)
        for i, r in enumerate(ordered)
    ]
