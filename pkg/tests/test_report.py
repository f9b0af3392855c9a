import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from oracles import order_statistic_quantile

from hindex_bayes.data import Dataset, JournalRecord
from hindex_bayes.likelihoods import FamilySpec, total_deviance
from hindex_bayes.models import MeanModelSpec, mean_h
from hindex_bayes.report import (
    FitReport,
    ReportError,
    compare_models,
    fit_report,
    mean_deviance,
    posterior_summary,
    predict_observed_table,
)
from hindex_bayes.sampler import ChainSet, SamplerConfig, run_mcmc
from hindex_bayes.storage import (
    load_chainset,
    read_comparison,
    read_params,
    read_predictions,
    save_chainset,
    write_comparison,
    write_params,
    write_predictions,
)
from hindex_bayes.synth import generate_synthetic


def chains(names, *arrays, model=None, family=None):
    draws = [np.atleast_2d(np.asarray(a, dtype=float)) for a in arrays]
    draws = [d.T if d.shape[0] == 1 and len(names) == 1 else d for d in draws]
    k = len(draws)
    return ChainSet(tuple(names), draws, np.ones((k, len(names))), np.ones((k, len(names))), 0, model, family)


def test_summary_of_integers():
    (med, lo, hi), = posterior_summary(np.arange(1, 101)).values()
    assert med == 50.5
    assert lo == pytest.approx(3.475, abs=1e-12)
    assert hi == pytest.approx(97.525, abs=1e-12)
    assert (lo, hi) == pytest.approx(
        (order_statistic_quantile(range(1, 101), 0.025), order_statistic_quantile(range(1, 101), 0.975)),
        abs=1e-12,
    )


def test_summary_constant():
    cs = chains(["a"], np.full(100, 2.5), np.full(100, 2.5))
    assert posterior_summary(cs) == {"a": (2.5, 2.5, 2.5)}


def test_summary_symmetric():
    x = np.random.default_rng(0).normal(size=20000)
    med, lo, hi = posterior_summary(np.concatenate([x, -x]))["x0"]
    assert med == pytest.approx(0.0, abs=1e-12)
    assert lo == pytest.approx(-hi, abs=1e-12)


def test_summary_needs_forty_draws():
    with pytest.raises(ReportError):
        posterior_summary(np.arange(39.0))


@settings(max_examples=50)
@given(st.lists(st.floats(-1e6, 1e6), min_size=40, max_size=400))
def test_quantiles_match_sort_and_interpolate(values):
    med, lo, hi = posterior_summary(np.array(values))["x0"]
    for got, p in ((med, 0.5), (lo, 0.025), (hi, 0.975)):
        assert got == pytest.approx(order_statistic_quantile(values, p), rel=1e-12, abs=1e-12)
    assert lo <= med <= hi


def test_mean_deviance_of_constant_chain(small_dataset):
    cs = chains(["a", "c", "sigma"], np.tile([1.8, 0.7, 4.0], (50, 1)))
    expected = total_deviance(FamilySpec("gaussian", 4.0), MeanModelSpec.of("glanzel-schubert", 1.8, 0.7), small_dataset)
    assert mean_deviance(cs, small_dataset, "glanzel-schubert", "gaussian") == pytest.approx(expected, rel=1e-12)


def test_mean_deviance_two_draws():
    # one record at mean 5 observed at 10: D(sigma) = log(2 pi sigma^2) + 25 / sigma^2
    d = Dataset("one", [JournalRecord("x", 10, 100, 100)])

    def dev(sigma):
        return total_deviance(FamilySpec("gaussian", sigma), MeanModelSpec.of("hirsch", 4.0), d)

    s10 = brentq(lambda s: dev(s) - 10.0, 1.5, 5.0)
    s20 = brentq(lambda s: dev(s) - 20.0, 1.0, 2.0)
    cs = chains(["a", "sigma"], [[4.0, s10], [4.0, s20]])
    assert mean_deviance(cs, d, "hirsch", "gaussian") == pytest.approx(15.0, rel=1e-12)


def test_mean_deviance_layout_mismatch(small_dataset):
    cs = chains(["a"], np.full(50, 4.0))
    with pytest.raises(ReportError):
        mean_deviance(cs, small_dataset, "hirsch", "gaussian")


def test_mean_deviance_ignores_chain_order(small_dataset):
    cs = run_mcmc(small_dataset, "hirsch", "negbin", config=SamplerConfig(burn_in=200, samples=400, chains=3, seed=1))
    flipped = ChainSet(cs.names, cs.draws[::-1], cs.acceptance, cs.scales, cs.seed)
    a = mean_deviance(cs, small_dataset, "hirsch", "negbin")
    assert mean_deviance(flipped, small_dataset, "hirsch", "negbin") == pytest.approx(a, rel=1e-12)


def test_persisted_chains_reproduce_mean_deviance(tmp_path, small_dataset):
    cs = run_mcmc(small_dataset, "two-param-hirsch", "gaussian", config=SamplerConfig(burn_in=200, samples=300, chains=2, seed=8))
    save_chainset(cs, tmp_path, "fit")
    again = load_chainset(tmp_path / "fit_meta.json")
    for x, y in zip(cs.draws, again.draws):
        assert np.array_equal(x, y)
    assert again.model == "two-param-hirsch" and again.config == cs.config
    a = mean_deviance(cs, small_dataset, cs.model, cs.family)
    b = mean_deviance(again, small_dataset, again.model, again.family)
    assert b == pytest.approx(a, rel=1e-10)


def _report(model, family, d_bar, fingerprint="f"):
    return FitReport(model, family, "d", fingerprint, {}, d_bar, {})


def test_compare_single():
    rows = compare_models([_report("hirsch", "poisson", 10.0)])
    assert len(rows) == 1 and rows[0].rank == 1 and rows[0].best


# mean deviances reported for the ecology journals
ECOLOGY = [
    ("egghe-rousseau", "gaussian", 1272),
    ("hirsch", "gaussian", 1186),
    ("glanzel-schubert", "gaussian", 894.4),
    ("two-param-hirsch", "gaussian", 1021),
    ("egghe-rousseau", "poisson", 2768),
    ("hirsch", "poisson", 403300),
    ("glanzel-schubert", "poisson", 16460),
    ("two-param-hirsch", "poisson", 16730),
    ("egghe-rousseau", "negbin", 1210),
    ("hirsch", "negbin", 2344),
    ("glanzel-schubert", "negbin", 1566),
    ("two-param-hirsch", "negbin", 959.8),
]


def test_compare_orders_and_flags():
    reports = [_report(*row) for row in ECOLOGY]
    rows = compare_models(reports)
    assert [(r.model, r.family) for r in rows[:3]] == [
        ("glanzel-schubert", "gaussian"),
        ("two-param-hirsch", "negbin"),
        ("two-param-hirsch", "gaussian"),
    ]
    assert [r.best for r in rows] == [True] * 3 + [False] * 9
    assert sorted((r.model, r.family) for r in rows) == sorted(row[:2] for row in ECOLOGY)
    assert all(a.d_bar <= b.d_bar for a, b in zip(rows, rows[1:]))
    assert rows[-1].model == "hirsch" and rows[-1].family == "poisson"


def test_compare_tie_break():
    rows = compare_models([_report("hirsch", "poisson", 5.0), _report("hirsch", "negbin", 5.0), _report("egghe-rousseau", "poisson", 5.0)], top_k=1)
    assert [(r.model, r.family) for r in rows] == [("egghe-rousseau", "poisson"), ("hirsch", "negbin"), ("hirsch", "poisson")]


def test_compare_mixed_datasets():
    with pytest.raises(ReportError):
        compare_models([_report("hirsch", "poisson", 1.0, "x"), _report("hirsch", "negbin", 2.0, "y")])


def test_predictions_constant_chain(small_dataset):
    cs = chains(["a", "c"], np.tile([1.8, 0.7], (60, 1)))
    rows = predict_observed_table(cs, small_dataset, "glanzel-schubert")
    spec = MeanModelSpec.of("glanzel-schubert", 1.8, 0.7)
    for row, rec in zip(rows, small_dataset):
        assert row.observed == rec.h
        assert row.median == row.lo == row.hi == pytest.approx(mean_h(spec, rec.P, rec.C), rel=1e-12)


def test_predictions_flag_inadmissible_rows():
    d = Dataset("z", [JournalRecord("ok", 2, 10, 40), JournalRecord("zero", 0, 10, 0)])
    rows = predict_observed_table(chains(["a"], np.full(50, 4.0)), d, "hirsch")
    assert [r.admissible for r in rows] == [True, False]
    assert math.isnan(rows[1].median)


def test_hirsch_predictions_monotone_in_citations():
    rng = np.random.default_rng(3)
    recs = [JournalRecord(f"J{i}", 1, 1000, int(c)) for i, c in enumerate(sorted(rng.integers(10, 10**6, 40)))]
    cs = chains(["a"], rng.uniform(3.2, 4.8, 500))
    medians = [r.median for r in predict_observed_table(cs, Dataset("m", recs), "hirsch")]
    assert all(x <= y for x, y in zip(medians, medians[1:]))


def test_noiseless_recovery_predictions():
    d = generate_synthetic("glanzel-schubert", (1.77, 0.7), "gaussian", 0.1, n=134, P_range=(200, 5000), citation_rate_range=(5, 50), seed=1)
    cs = run_mcmc(d, "glanzel-schubert", "gaussian", config=SamplerConfig(burn_in=1500, samples=2000, chains=2, seed=1))
    rows = predict_observed_table(cs, d, "glanzel-schubert")
    close = sum(abs(r.median - r.observed) <= 0.05 * r.observed for r in rows)
    assert close >= 0.95 * len(rows)


def test_predictive_draws_for_count_family(small_dataset):
    cs = run_mcmc(small_dataset, "hirsch", "poisson", config=SamplerConfig(burn_in=100, samples=200, chains=2, seed=1))
    rows = predict_observed_table(cs, small_dataset, "hirsch", predictive=True)
    assert all(float(2 * r.median).is_integer() for r in rows)
    assert all(r.lo <= r.median <= r.hi for r in rows)
    cs_g = run_mcmc(small_dataset, "hirsch", "gaussian", config=SamplerConfig(burn_in=100, samples=200, chains=2, seed=1))
    with pytest.raises(ReportError):
        predict_observed_table(cs_g, small_dataset, "hirsch", predictive=True)


def test_overdispersed_data_prefer_negbin():
    d = generate_synthetic("egghe-rousseau", (2.0,), "negbin", 2.0, n=100, seed=6)
    cfg = SamplerConfig(burn_in=500, samples=1000, chains=2, seed=6)
    d_pois = mean_deviance(run_mcmc(d, "egghe-rousseau", "poisson", config=cfg), d, "egghe-rousseau", "poisson")
    d_nb = mean_deviance(run_mcmc(d, "egghe-rousseau", "negbin", config=cfg), d, "egghe-rousseau", "negbin")
    assert d_nb < d_pois


def test_fit_report_and_files_round_trip(tmp_path, small_dataset):
    cs = run_mcmc(small_dataset, "glanzel-schubert", "negbin", config=SamplerConfig(burn_in=200, samples=300, chains=2, seed=2))
    rep = fit_report(cs, small_dataset)
    for med, lo, hi in rep.params.values():
        assert lo <= med <= hi
    assert rep.dic == pytest.approx(2 * rep.d_bar - rep.d_at_mean)

    write_params(rep, tmp_path / "p.csv")
    params = read_params(tmp_path / "p.csv")
    assert [p["parameter"] for p in params] == ["a", "c", "r"]
    assert params[0]["median"] == rep.params["a"][0]

    write_predictions(rep.predictions, tmp_path / "pred.csv")
    assert read_predictions(tmp_path / "pred.csv") == rep.predictions

    rows = compare_models([rep])
    write_comparison(rows, tmp_path / "cmp.csv")
    assert read_comparison(tmp_path / "cmp.csv") == rows
