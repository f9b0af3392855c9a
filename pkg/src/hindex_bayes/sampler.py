"""Priors, log-posterior and a component-wise adaptive Metropolis sampler."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, log_ndtr, ndtr

from .data import Dataset
from .likelihoods import Family, log_density_array
from .models import INF, DomainError, ModelKind, check_admissible, mean_h_array, param_bounds

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class SamplerError(RuntimeError):
    pass


def parameter_names(kind: ModelKind | str, family: Family | str) -> tuple[str, ...]:
    """Free-parameter layout of a fit: model parameters, then the nuisance."""
    kind, family = ModelKind(kind), Family(family)
    extra = (family.nuisance_name,) if family.nuisance_name else ()
    return kind.param_names + extra


def parameter_bounds(kind: ModelKind | str, family: Family | str) -> list[tuple[float, float]]:
    bounds = param_bounds(kind)
    if Family(family).nuisance_name:
        bounds.append((0.0, INF))
    return bounds


def _log_truncation_mass(lower: float, upper: float, scale: float) -> float:
    """log P(lower < Z*scale < upper) for a centred normal."""
    if upper == INF:
        return float(log_ndtr(-lower / scale))
    if lower == -INF:
        return float(log_ndtr(upper / scale))
    return math.log(ndtr(upper / scale) - ndtr(lower / scale))


@dataclass(frozen=True)
class PriorSpec:
    """Independent zero-mean normals truncated to each parameter's interval."""

    names: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]
    scales: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.names) == len(self.bounds) == len(self.scales)):
            raise ValueError("names, bounds and scales must align")
        for (lo, hi), s in zip(self.bounds, self.scales):
            if not s > 0:
                raise ValueError(f"prior scale must be positive, got {s}")
            if not hi > lo:
                raise ValueError(f"empty truncation interval ({lo}, {hi})")
        norm = sum(
            _log_truncation_mass(lo, hi, s) + math.log(s) + LOG_SQRT_2PI
            for (lo, hi), s in zip(self.bounds, self.scales)
        )
        object.__setattr__(self, "_log_norm", norm)

    @classmethod
    def for_fit(
        cls,
        kind: ModelKind | str,
        family: Family | str,
        scale: float = 1e3,
        nuisance_scale: float = 1e3,
    ) -> "PriorSpec":
        names = parameter_names(kind, family)
        n_model = len(ModelKind(kind).param_names)
        scales = [scale] * n_model + [nuisance_scale] * (len(names) - n_model)
        return cls(names, tuple(parameter_bounds(kind, family)), tuple(scales))


def log_prior(values: Sequence[float], prior: PriorSpec) -> float:
    """Sum of truncated-normal log-densities; ``-inf`` on or outside a bound."""
    total = 0.0
    for v, (lo, hi), s in zip(values, prior.bounds, prior.scales):
        if not lo < v < hi:
            return -INF
        z = v / s
        total -= 0.5 * z * z
    return total - prior._log_norm


class LogPosterior:
    """Unnormalised log-posterior of one model x family fit on one dataset.

    Admissibility of the records is checked once, here; numerical
    over/underflow of the mean at extreme parameter values maps to ``-inf``.
    """

    def __init__(self, dataset: Dataset, kind, family, prior: PriorSpec | None = None):
        self.kind = ModelKind(kind)
        self.family = Family(family)
        self.prior = prior or PriorSpec.for_fit(self.kind, self.family)
        if self.prior.names != parameter_names(self.kind, self.family):
            raise DomainError(f"prior layout {self.prior.names} does not fit {self.kind.value}/{self.family.value}")
        if len(dataset) == 0:
            raise DomainError("cannot fit an empty dataset")
        for rec in dataset.records:
            try:
                check_admissible(self.kind, rec.P, rec.C)
            except DomainError as exc:
                raise DomainError(f"record {rec.id}: {exc}") from None
        self.h, self.P, self.C = dataset.columns()
        self._log_fact = gammaln(self.h + 1.0)
        self._n_model = len(self.kind.param_names)

    def log_likelihood(self, values) -> float:
        theta = values[: self._n_model]
        mu = mean_h_array(self.kind, theta, self.P, self.C)
        if not np.all(np.isfinite(mu) & (mu > 0)):
            return -INF
        nuisance = values[self._n_model] if self.family.nuisance_name else None
        ll = log_density_array(self.family, nuisance, mu, self.h, self._log_fact)
        total = float(np.sum(ll))
        return total if not math.isnan(total) else -INF

    def deviance(self, values) -> float:
        return -2.0 * self.log_likelihood(values)

    def __call__(self, values) -> float:
        lp = log_prior(values, self.prior)
        if lp == -INF:
            return lp
        return lp + self.log_likelihood(values)


def log_posterior(values, kind, family, dataset: Dataset, prior: PriorSpec | None = None) -> float:
    return LogPosterior(dataset, kind, family, prior)(np.asarray(values, dtype=float))


@dataclass
class SamplerConfig:
    burn_in: int = 5000
    samples: int = 50000
    chains: int = 4
    seed: int = 0
    initial_scales: tuple[float, ...] | None = None
    adapt_window: int = 100
    target_band: tuple[float, float] = (0.2, 0.5)
    debug: bool = False

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.adapt_window < 1:
            raise ValueError("adapt_window must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        if self.initial_scales is not None:
            self.initial_scales = tuple(float(s) for s in self.initial_scales)
            if any(s < 0 or not math.isfinite(s) for s in self.initial_scales):
                raise ValueError("initial proposal scales must be finite and non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target_band"] = list(self.target_band)
        if self.initial_scales is not None:
            d["initial_scales"] = list(self.initial_scales)
        return d


@dataclass
class ChainSet:
    names: tuple[str, ...]
    draws: list[np.ndarray]
    acceptance: np.ndarray
    scales: np.ndarray
    seed: int
    model: str | None = None
    family: str | None = None
    config: dict = field(default_factory=dict)

    @property
    def n_chains(self) -> int:
        return len(self.draws)

    def pooled(self) -> np.ndarray:
        return np.concatenate(self.draws, axis=0)


def _shrink_or_grow(rate: float, band: tuple[float, float]) -> float:
    lo, hi = band
    if rate < lo:
        return 0.3 if rate < 0.05 else 0.6
    if rate > hi:
        return 3.0 if rate > 0.9 else 1.6
    return 1.0


def _run_chain(log_target, x0, scales, config: SamplerConfig, rng):
    x = np.array(x0, dtype=float)
    k = x.size
    scales = np.array(scales, dtype=float)
    lp = log_target(x)
    if not math.isfinite(lp):
        raise SamplerError(f"log-target not finite at initial point {x.tolist()}")
    n_iter = config.burn_in + config.samples
    steps = rng.standard_normal((n_iter, k))
    log_u = np.log(rng.random((n_iter, k)))
    out = np.empty((config.samples, k))
    window_acc = np.zeros(k)
    accepted = np.zeros(k)
    frozen = None
    for it in range(n_iter):
        sampling = it >= config.burn_in
        if sampling and frozen is None:
            frozen = scales.copy()
        for j in range(k):
            old = x[j]
            x[j] = old + scales[j] * steps[it, j]
            lp_new = log_target(x)
            if log_u[it, j] < lp_new - lp:
                lp = lp_new
                if sampling:
                    accepted[j] += 1
                else:
                    window_acc[j] += 1
            else:
                x[j] = old
        if sampling:
            if config.debug:
                assert np.array_equal(scales, frozen), "proposal scales changed after burn-in"
            out[it - config.burn_in] = x
        elif (it + 1) % config.adapt_window == 0:
            rates = window_acc / config.adapt_window
            scales *= [_shrink_or_grow(r, config.target_band) for r in rates]
            window_acc[:] = 0
    return out, accepted / config.samples, scales


def sample_chains(
    log_target: Callable[[np.ndarray], float],
    initial_points: Sequence[Sequence[float]],
    names: Sequence[str],
    config: SamplerConfig,
    scales: Sequence[float] | None = None,
    rngs=None,
) -> ChainSet:
    """Run one chain per initial point against an arbitrary log-target.

    This is the sampler proper; :func:`run_mcmc` wraps it with the h-index
    posterior. Each parameter is updated in turn with a Gaussian random-walk
    proposal whose scale adapts in windows during burn-in only.
    """
    if rngs is None:
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(len(initial_points))]
    if scales is None:
        scales = config.initial_scales
    draws, acc, final = [], [], []
    for x0, rng in zip(initial_points, rngs):
        s0 = scales if scales is not None else [0.1 * max(abs(v), 1.0) for v in x0]
        if len(s0) != len(x0):
            raise ValueError("one proposal scale per parameter is required")
        d, a, s = _run_chain(log_target, x0, s0, config, rng)
        draws.append(d)
        acc.append(a)
        final.append(s)
    return ChainSet(
        names=tuple(names),
        draws=draws,
        acceptance=np.array(acc),
        scales=np.array(final),
        seed=config.seed,
        config=config.to_dict(),
    )


def default_start(bounds) -> list[float]:
    start = []
    for lo, hi in bounds:
        if math.isfinite(lo) and math.isfinite(hi):
            start.append(0.5 * (lo + hi))
        elif math.isfinite(lo):
            start.append(lo + 1.0)
        elif math.isfinite(hi):
            start.append(hi - 1.0)
        else:
            start.append(0.0)
    return start


def run_mcmc(
    dataset: Dataset,
    kind,
    family,
    prior: PriorSpec | None = None,
    config: SamplerConfig | None = None,
    max_init_tries: int = 100,
) -> ChainSet:
    """Sample the posterior of one model x family fit.

    Chains start at a per-chain ±10% jitter of :func:`default_start` and use
    independent sub-seeds spawned from ``config.seed``.
    """
    config = config or SamplerConfig()
    target = LogPosterior(dataset, kind, family, prior)
    names = target.prior.names
    base = np.array(default_start(target.prior.bounds))
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(config.chains)]
    starts = []
    for c, rng in enumerate(rngs):
        for _ in range(max_init_tries):
            x0 = base * rng.uniform(0.9, 1.1, size=base.size)
            if math.isfinite(target(x0)):
                break
        else:
            raise SamplerError(
                f"chain {c}: no finite-posterior starting point in {max_init_tries} tries"
            )
        starts.append(x0)
    cs = sample_chains(target, starts, names, config, rngs=rngs)
    cs.model = target.kind.value
    cs.family = target.family.value
    return cs


def rhat(cs: ChainSet) -> np.ndarray:
    """Potential scale reduction per parameter, ``sqrt(1 + B / (n W))``.

    ``B / n`` is the variance of the chain means and ``W`` the mean
    within-chain variance. Chains must share a length.
    """
    if cs.n_chains < 2:
        raise ValueError("R-hat needs at least two chains")
    x = np.stack(cs.draws)  # chains x draws x params
    n = x.shape[1]
    if n < 2:
        raise ValueError("R-hat needs at least two draws per chain")
    w = x.var(axis=1, ddof=1).mean(axis=0)
    b_over_n = x.mean(axis=1).var(axis=0, ddof=1)
    out = np.empty(x.shape[2])
    for j in range(x.shape[2]):
        if w[j] > 0:
            out[j] = math.sqrt(1.0 + b_over_n[j] / w[j])
        else:
            out[j] = 1.0 if b_over_n[j] == 0 else INF
    return out
