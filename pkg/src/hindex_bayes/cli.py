"""Command-line runner: fit model x family grids, simulate data, rescore runs."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .data import DataError, Dataset, Provenance, dataset_summary, read_dataset, write_dataset
from .likelihoods import Family
from .models import ModelKind
from .report import FitReport, compare_models, fit_report, mean_deviance
from .sampler import PriorSpec, SamplerConfig, run_mcmc
from .storage import load_chainset, save_chainset, write_comparison, write_params, write_predictions
from .synth import generate_synthetic

logger = logging.getLogger("hindex_bayes")

ALL_MODELS = tuple(ModelKind)
ALL_FAMILIES = tuple(Family)


@dataclass
class RunConfig:
    data: Path
    out: Path
    name: str | None = None
    models: tuple[ModelKind, ...] = ALL_MODELS
    families: tuple[Family, ...] = ALL_FAMILIES
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    provenance: Provenance = Provenance.OBSERVED
    prior_scale: float = 1e3
    top_k: int = 3
    jobs: int = 1
    predictive: bool = False

    def __post_init__(self):
        self.data, self.out = Path(self.data), Path(self.out)
        self.models = tuple(ModelKind(m) for m in self.models)
        self.families = tuple(Family(f) for f in self.families)
        self.provenance = Provenance(self.provenance)
        if not self.models or not self.families:
            raise ValueError("select at least one model and one family")

    def to_dict(self) -> dict:
        return {
            "data": str(self.data),
            "name": self.name,
            "models": [m.value for m in self.models],
            "families": [f.value for f in self.families],
            "sampler": self.sampler.to_dict(),
            "provenance": self.provenance.value,
            "prior_scale": self.prior_scale,
            "top_k": self.top_k,
            "predictive": self.predictive,
        }


def fit_stem(kind: ModelKind, family: Family) -> str:
    return f"{kind.value}__{family.value}"


def _fit_one(dataset: Dataset, kind: ModelKind, family: Family, cfg: RunConfig):
    prior = PriorSpec.for_fit(kind, family, cfg.prior_scale, cfg.prior_scale)
    cs = run_mcmc(dataset, kind, family, prior, cfg.sampler)
    return cs, fit_report(cs, dataset, predictive=cfg.predictive and family.is_count)


def _write_manifest(cfg: RunConfig, status: str, files: list[Path], extra: dict) -> None:
    manifest = {
        "status": status,
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.sampler.seed,
        "files": sorted(str(p.relative_to(cfg.out)) for p in files),
        **extra,
    }
    (cfg.out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def run_command(cfg: RunConfig) -> int:
    """Fit every selected model x family pair and write all reports.

    Returns the process exit status. Nothing is written when the data file
    cannot be read or validated; a failure after fitting starts leaves an
    ``INCOMPLETE`` marker and a manifest with ``status: incomplete``.
    """
    try:
        dataset = read_dataset(cfg.data, cfg.name, cfg.provenance)
    except (OSError, DataError) as exc:
        logger.error("cannot load %s: %s", cfg.data, exc)
        return 2
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "INCOMPLETE").write_text("run in progress\n", encoding="utf-8")
    except OSError as exc:
        logger.error("output directory %s is not writable: %s", cfg.out, exc)
        return 2

    pairs = [(k, f) for k in cfg.models for f in cfg.families]
    files: list[Path] = []
    reports: list[FitReport] = []
    try:
        if cfg.jobs > 1:
            with ProcessPoolExecutor(cfg.jobs) as pool:
                futures = [pool.submit(_fit_one, dataset, k, f, cfg) for k, f in pairs]
                results = [fut.result() for fut in futures]
        else:
            results = [_fit_one(dataset, k, f, cfg) for k, f in pairs]
        for (kind, family), (cs, report) in zip(pairs, results):
            stem = fit_stem(kind, family)
            files += save_chainset(cs, cfg.out / "chains", stem)
            fits = cfg.out / "fits"
            fits.mkdir(exist_ok=True)
            write_params(report, fits / f"{stem}_params.csv")
            write_predictions(report.predictions, fits / f"{stem}_predictions.csv")
            files += [fits / f"{stem}_params.csv", fits / f"{stem}_predictions.csv"]
            reports.append(report)
            logger.info("%s/%s: D-bar = %.4f", kind.value, family.value, report.d_bar)
        table = compare_models(reports, cfg.top_k)
        write_comparison(table, cfg.out / "comparison.csv")
        files.append(cfg.out / "comparison.csv")
    except Exception as exc:  # noqa: BLE001 - any fit failure marks the run incomplete
        logger.error("run failed: %s", exc)
        _write_manifest(cfg, "incomplete", files, {"error": str(exc)})
        return 1

    _write_manifest(cfg, "complete", files, {"dataset": dataset.name, "n_records": len(dataset)})
    (cfg.out / "INCOMPLETE").unlink()
    return 0


def rescore(out: Path, data: Path, name: str | None = None, provenance=Provenance.OBSERVED) -> dict:
    """Recompute mean deviance for every chain set persisted under ``out``."""
    dataset = read_dataset(data, name, provenance)
    scores = {}
    for meta in sorted((Path(out) / "chains").glob("*_meta.json")):
        cs = load_chainset(meta)
        scores[(cs.model, cs.family)] = mean_deviance(cs, dataset, cs.model, cs.family)
    return scores


def _csv_list(text: str, choices) -> tuple:
    if text == "all":
        return tuple(choices)
    values = tuple(v.strip() for v in text.split(",") if v.strip())
    names = {c.value for c in choices}
    bad = [v for v in values if v not in names]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown choice(s) {bad}; expected {sorted(names)} or 'all'")
    return values


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[float, float]:
    values = _floats(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hindex-bayes",
        description="Bayesian fits of structural h-index models to journal (h, P, C) data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common], help="fit model x family pairs and write reports")
    fit.add_argument("--data", required=True, type=Path)
    fit.add_argument("--name", default=None, help="dataset label (default: file stem)")
    fit.add_argument("--models", default="all", type=lambda s: _csv_list(s, ALL_MODELS))
    fit.add_argument("--families", default="all", type=lambda s: _csv_list(s, ALL_FAMILIES))
    fit.add_argument("--burnin", type=int, default=5000)
    fit.add_argument("--samples", type=int, default=50000)
    fit.add_argument("--chains", type=int, default=4)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--adapt-window", type=int, default=100)
    fit.add_argument("--prior-scale", type=float, default=1e3)
    fit.add_argument("--top-k", type=int, default=3)
    fit.add_argument("--jobs", type=int, default=1, help="fit pairs in parallel processes")
    fit.add_argument("--synthetic", action="store_true", help="relax consistency checks to warnings")
    fit.add_argument(
        "--predictive",
        action="store_true",
        help="count families: prediction intervals from posterior-predictive draws of h",
    )
    fit.add_argument("--out", required=True, type=Path)

    syn = sub.add_parser("synth", parents=[common], help="simulate a dataset from a known model")
    syn.add_argument("--model", required=True, choices=[m.value for m in ModelKind])
    syn.add_argument("--params", required=True, type=_floats, help="e.g. 1.77,0.70")
    syn.add_argument("--family", required=True, choices=[f.value for f in Family])
    syn.add_argument("--nuisance", type=float, default=None, help="sigma (gaussian) or r (negbin)")
    syn.add_argument("--n", type=int, default=134)
    syn.add_argument("--p-range", type=_pair, default=(20.0, 5000.0))
    syn.add_argument("--rate-range", type=_pair, default=(1.0, 50.0), help="citations per paper")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--name", default="synthetic")
    syn.add_argument("--out", required=True, type=Path)

    summ = sub.add_parser("summary", parents=[common], help="print column summaries of a dataset")
    summ.add_argument("--data", required=True, type=Path)
    summ.add_argument("--synthetic", action="store_true")

    res = sub.add_parser("rescore", parents=[common], help="recompute mean deviance from persisted chains")
    res.add_argument("--out", required=True, type=Path, help="directory of a previous fit run")
    res.add_argument("--data", required=True, type=Path)
    res.add_argument("--synthetic", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    prov = Provenance.SYNTHETIC if getattr(args, "synthetic", False) else Provenance.OBSERVED

    if args.command == "fit":
        try:
            cfg = RunConfig(
                data=args.data,
                out=args.out,
                name=args.name,
                models=args.models,
                families=args.families,
                sampler=SamplerConfig(
                    burn_in=args.burnin,
                    samples=args.samples,
                    chains=args.chains,
                    seed=args.seed,
                    adapt_window=args.adapt_window,
                ),
                provenance=prov,
                prior_scale=args.prior_scale,
                top_k=args.top_k,
                jobs=args.jobs,
                predictive=args.predictive,
            )
        except ValueError as exc:
            logger.error("%s", exc)
            return 2
        return run_command(cfg)

    if args.command == "synth":
        try:
            d = generate_synthetic(
                args.model, args.params, args.family, args.nuisance, args.n,
                args.p_range, args.rate_range, args.seed, args.name,
            )
        except ValueError as exc:
            logger.error("%s", exc)
            return 2
        write_dataset(d, args.out)
        return 0

    if args.command == "summary":
        try:
            d = read_dataset(args.data, provenance=prov)
            print(json.dumps(dataset_summary(d), indent=2))
        except (OSError, DataError) as exc:
            logger.error("%s", exc)
            return 2
        return 0

    if args.command == "rescore":
        try:
            scores = rescore(args.out, args.data, provenance=prov)
        except (OSError, DataError) as exc:
            logger.error("%s", exc)
            return 2
        print("model,family,d_bar")
        for (model, family), value in scores.items():
            print(f"{model},{family},{value!r}")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
