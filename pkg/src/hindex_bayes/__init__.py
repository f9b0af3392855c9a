"""Bayesian fitting of structural h-index models to journal bibliometric data."""

__version__ = "0.1.0"

from .data import (  # noqa: E402, F401
    DataError,
    Dataset,
    JournalRecord,
    ParseError,
    Provenance,
    ValidationError,
    dataset_summary,
    parse_dataset,
    read_dataset,
    serialize_dataset,
)
from .likelihoods import Family, FamilySpec, log_density, total_deviance  # noqa: E402, F401
from .models import DomainError, MeanModelSpec, ModelKind, mean_h, param_bounds  # noqa: E402, F401
from .report import (  # noqa: E402, F401
    FitReport,
    compare_models,
    fit_report,
    mean_deviance,
    posterior_summary,
    predict_observed_table,
)
from .sampler import (  # noqa: E402, F401
    ChainSet,
    PriorSpec,
    SamplerConfig,
    log_posterior,
    log_prior,
    rhat,
    run_mcmc,
    sample_chains,
)
from .synth import generate_synthetic  # noqa: E402, F401
