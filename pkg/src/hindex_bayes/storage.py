"""Delimited-text persistence for chain sets and reports.

Floats are written with ``repr`` so every value reads back bit-for-bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .report import ComparisonRow, FitReport, PredictionRow
from .sampler import ChainSet


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _bool(s: str) -> bool:
    if s not in ("true", "false"):
        raise ValueError(f"not a boolean: {s!r}")
    return s == "true"


def save_chainset(cs: ChainSet, directory, stem: str) -> list[Path]:
    """Write one CSV per chain plus ``<stem>_meta.json``; return the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for c, draws in enumerate(cs.draws):
        path = directory / f"{stem}_chain{c + 1}.csv"
        _write_rows(path, cs.names, draws.tolist())
        paths.append(path)
    meta = {
        "model": cs.model,
        "family": cs.family,
        "names": list(cs.names),
        "seed": cs.seed,
        "config": cs.config,
        "acceptance": cs.acceptance.tolist(),
        "final_scales": cs.scales.tolist(),
        "chain_files": [p.name for p in paths],
    }
    meta_path = directory / f"{stem}_meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths + [meta_path]


def load_chainset(meta_path) -> ChainSet:
    meta_path = Path(meta_path)
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    names = tuple(meta["names"])
    draws = []
    for name in meta["chain_files"]:
        rows = _read_rows(meta_path.parent / name)
        draws.append(np.array([[float(r[n]) for n in names] for r in rows]).reshape(-1, len(names)))
    return ChainSet(
        names=names,
        draws=draws,
        acceptance=np.array(meta["acceptance"]),
        scales=np.array(meta["final_scales"]),
        seed=meta["seed"],
        model=meta["model"],
        family=meta["family"],
        config=meta["config"],
    )


PARAM_HEADER = ("model", "family", "parameter", "median", "lo", "hi", "r_hat")
PREDICTION_HEADER = ("id", "observed", "median", "lo", "hi", "admissible")
COMPARISON_HEADER = ("rank", "model", "family", "d_bar", "p_d", "dic", "best")


def write_params(report: FitReport, path) -> None:
    rows = [
        (report.model, report.family, name, med, lo, hi, report.r_hat.get(name, math.nan))
        for name, (med, lo, hi) in report.params.items()
    ]
    _write_rows(Path(path), PARAM_HEADER, rows)


def read_params(path) -> list[dict]:
    out = []
    for r in _read_rows(Path(path)):
        out.append({k: (float(v) if k in ("median", "lo", "hi", "r_hat") else v) for k, v in r.items()})
    return out


def write_predictions(rows: list[PredictionRow], path) -> None:
    _write_rows(
        Path(path),
        PREDICTION_HEADER,
        [(r.id, r.observed, r.median, r.lo, r.hi, r.admissible) for r in rows],
    )


def read_predictions(path) -> list[PredictionRow]:
    return [
        PredictionRow(
            r["id"], int(r["observed"]), float(r["median"]), float(r["lo"]), float(r["hi"]),
            _bool(r["admissible"]),
        )
        for r in _read_rows(Path(path))
    ]


def write_comparison(rows: list[ComparisonRow], path) -> None:
    _write_rows(
        Path(path),
        COMPARISON_HEADER,
        [(r.rank, r.model, r.family, r.d_bar, r.p_d, r.dic, r.best) for r in rows],
    )


def read_comparison(path) -> list[ComparisonRow]:
    return [
        ComparisonRow(
            int(r["rank"]), r["model"], r["family"], float(r["d_bar"]), float(r["p_d"]),
            float(r["dic"]), _bool(r["best"]),
        )
        for r in _read_rows(Path(path))
    ]
