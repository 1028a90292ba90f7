"""Experiment orchestration: configured runs that emit JSON + CSV reports.

Reports are bitwise reproducible for a fixed seed (no timing fields, sorted
keys) and validate against the schema files shipped in blindboost/schemas.
"""

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..boosting import (
    boost_ds,
    boost_lmc,
    boost_rlc,
    cv_accuracy,
    stratified_folds,
)
from ..encoding import Dataset, FixedPointParams, fold_labels, standardize, standardize_with
from ..errors import ConfigInvalid
from ..protocol import ProtocolConfig, Seeds, run_learning, transcript_report
from .datasets import gen_synthetic, load_csv
from .leakage import leakage_analysis

EXPERIMENT_KINDS = ("CV_ACCURACY", "CONVERGENCE", "PRECISION_SWEEP",
                    "COST_SCALING", "LEAKAGE", "BASELINE_COMPARE")

PRECISION_GRID = (5, 7, 9, 11, 15, 20)


@dataclass
class ExperimentSpec:
    kind: str
    dataset: dict            # {"synthetic": {n, k}} or {"csv": {path, ...}}
    output_dir: str
    seed: int = 42
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigInvalid(f"unknown experiment kind {self.kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls(**json.loads(text))


def resolve_dataset(ref: dict, seed: int) -> Dataset:
    if "synthetic" in ref:
        cfg = ref["synthetic"]
        return gen_synthetic(int(cfg.get("n", 10_000)), int(cfg.get("k", 10)),
                             int(cfg.get("seed", seed)))
    if "csv" in ref:
        cfg = ref["csv"]
        return load_csv(cfg["path"], label_column=int(cfg.get("label_column", -1)),
                        label_mapping=cfg.get("label_mapping"))
    raise ConfigInvalid(f"dataset ref needs 'synthetic' or 'csv', got {sorted(ref)}")


# ---------------------------------------------------------------------------
# fold-level trainers (standardization fitted on the training split only)


def _transform_for(train_std):
    def transform(Xte):
        dummy = Dataset(Xte, np.ones(len(Xte), dtype=np.int8))
        return standardize_with(dummy, train_std).X
    return transform


def make_trainer(base: str, tau: int, seed: int, precision_bits: int | None = None,
                 p_max: int | None = None, collect=None):
    p_max = p_max if p_max is not None else 2 * tau

    def trainer(Xtr, ytr, fold):
        train_std = standardize(Dataset(Xtr, ytr))
        if base == "rlc":
            fp = None
            if precision_bits is not None:
                folded_dim = train_std.k + 1
                fp = FixedPointParams.for_dimension(folded_dim, precision_bits)
            res = boost_rlc(fold_labels(train_std).Z, tau, p_max,
                            np.random.default_rng(seed + fold), fp=fp)
            if collect is not None:
                collect.append(res)
            model = res.model
        elif base == "ds":
            model = boost_ds(train_std.X, train_std.y, tau)
        elif base == "lmc":
            model = boost_lmc(train_std.X, train_std.y, tau)
        else:
            raise ConfigInvalid(f"unknown base learner {base!r}")
        return model, _transform_for(train_std)

    return trainer


def prefix_accuracies(model, X, y, tau_grid):
    """Accuracy of every prefix ensemble H_T without retraining."""
    scores = np.zeros(len(y))
    out = {}
    grid = sorted(t for t in tau_grid if t <= len(model.classifiers))
    next_idx = 0
    for t, (clf, a) in enumerate(zip(model.classifiers, model.alphas), start=1):
        scores += a * clf.predict(X)
        while next_idx < len(grid) and grid[next_idx] == t:
            pred = np.where(scores > 0, 1, -1)
            out[t] = float((pred == y).mean())
            next_idx += 1
    return out


# ---------------------------------------------------------------------------
# experiment bodies


def _exp_cv_accuracy(spec: ExperimentSpec, ds: Dataset) -> dict:
    p = spec.params
    base = p.get("base", "rlc")
    tau = int(p.get("tau", 200))
    folds = int(p.get("folds", 10))
    runs = []
    trainer = make_trainer(base, tau, spec.seed, collect=runs)
    mean, std, per_fold = cv_accuracy(ds.X, ds.y, folds, trainer, seed=spec.seed)
    report = {
        "kind": "CV_ACCURACY", "base": base, "tau": tau, "folds": folds,
        "seed": spec.seed, "n": ds.n, "k": ds.k,
        "accuracy_mean": mean, "accuracy_std": std, "per_fold": per_fold,
    }
    if runs:
        report["p_used"] = [r.p_used for r in runs]
        report["accepted"] = [r.accepted for r in runs]
        report["p_used_over_tau"] = float(np.mean([r.p_used / max(r.accepted, 1)
                                                   for r in runs]))
    rows = [{"fold": i, "accuracy": a} for i, a in enumerate(per_fold)]
    return report, rows, ["fold", "accuracy"]


def _exp_convergence(spec: ExperimentSpec, ds: Dataset) -> dict:
    p = spec.params
    base = p.get("base", "rlc")
    tau_max = int(p.get("tau_max", 200))
    grid = p.get("tau_grid") or [1, 2, 5, 10, 20, 50, 100, 150, 200]
    grid = sorted({int(t) for t in grid if int(t) <= tau_max})
    folds = int(p.get("folds", 10))
    fold_idx = stratified_folds(ds.y, folds, spec.seed)
    curves = {t: [] for t in grid}
    for f, test_idx in enumerate(fold_idx):
        train_mask = np.ones(ds.n, dtype=bool)
        train_mask[test_idx] = False
        trainer = make_trainer(base, tau_max, spec.seed)
        model, transform = trainer(ds.X[train_mask], ds.y[train_mask], f)
        acc = prefix_accuracies(model, transform(ds.X[test_idx]), ds.y[test_idx], grid)
        for t, a in acc.items():
            curves[t].append(a)
    points = [{"tau": t, "accuracy_mean": float(np.mean(v)),
               "accuracy_std": float(np.std(v, ddof=1)) if len(v) > 1 else 0.0}
              for t, v in sorted(curves.items()) if v]
    report = {"kind": "CONVERGENCE", "base": base, "folds": folds,
              "seed": spec.seed, "n": ds.n, "k": ds.k, "points": points}
    return report, points, ["tau", "accuracy_mean", "accuracy_std"]


def _exp_precision_sweep(spec: ExperimentSpec, ds: Dataset) -> dict:
    p = spec.params
    tau = int(p.get("tau", 200))
    folds = int(p.get("folds", 10))
    grid = [int(b) for b in p.get("bits_grid", PRECISION_GRID)]
    points = []
    for bits in grid:
        trainer = make_trainer("rlc", tau, spec.seed, precision_bits=bits)
        mean, std, _ = cv_accuracy(ds.X, ds.y, folds, trainer, seed=spec.seed)
        points.append({"bits": bits, "accuracy_mean": mean, "accuracy_std": std})
    trainer = make_trainer("rlc", tau, spec.seed)
    mean, std, _ = cv_accuracy(ds.X, ds.y, folds, trainer, seed=spec.seed)
    points.append({"bits": 0, "accuracy_mean": mean, "accuracy_std": std})  # 0 = real
    report = {"kind": "PRECISION_SWEEP", "tau": tau, "folds": folds,
              "seed": spec.seed, "n": ds.n, "k": ds.k, "points": points,
              "real_accuracy": mean}
    return report, points, ["bits", "accuracy_mean", "accuracy_std"]


def _protocol_counters(construction, folded, tau, seeds, ot_mode="dealer"):
    cfg = ProtocolConfig(construction=construction, tau=tau, p_max=tau,
                         ot_mode=ot_mode, seeds=seeds)
    _, transcript = run_learning(cfg, folded)
    return transcript_report(transcript)


def _exp_cost_scaling(spec: ExperimentSpec, ds: Dataset) -> dict:
    p = spec.params
    construction = p.get("construction", "he-gc")
    tau = int(p.get("tau", 2))
    n_grid = [int(x) for x in p.get("n_grid", (16, 32, 64, 128))]
    k_grid = [int(x) for x in p.get("k_grid", (2, 4, 8))]
    seeds = Seeds(cloud=spec.seed, csp=spec.seed + 1, data=spec.seed + 2)
    rows = []
    std = standardize(ds)
    for n in n_grid:
        sub = std.subset(np.arange(n))
        rep = _protocol_counters(construction, fold_labels(sub), tau, seeds)
        rows.append({"vary": "n", "n": n, "k": ds.k,
                     "cloud_he_ops": rep["counters"]["cloud"]["he_adds"]
                     + rep["counters"]["cloud"]["he_scalar_muls"],
                     "cloud_decryptions": rep["counters"]["cloud"]["decryptions"],
                     "csp_decryptions": rep["counters"]["csp"]["decryptions"],
                     "gc_bytes": rep["gc_bytes"],
                     "iterations": rep["iterations"]})
    for k in k_grid:
        sub = Dataset(std.X[:max(n_grid), :k], std.y[:max(n_grid)])
        rep = _protocol_counters(construction, fold_labels(sub), tau, seeds)
        rows.append({"vary": "k", "n": sub.n, "k": k,
                     "cloud_he_ops": rep["counters"]["cloud"]["he_adds"]
                     + rep["counters"]["cloud"]["he_scalar_muls"],
                     "cloud_decryptions": rep["counters"]["cloud"]["decryptions"],
                     "csp_decryptions": rep["counters"]["csp"]["decryptions"],
                     "gc_bytes": rep["gc_bytes"],
                     "iterations": rep["iterations"]})
    n_rows = [r for r in rows if r["vary"] == "n"]
    ratios = [n_rows[i + 1]["gc_bytes"] / n_rows[i]["gc_bytes"]
              for i in range(len(n_rows) - 1)]
    report = {"kind": "COST_SCALING", "construction": construction, "tau": tau,
              "seed": spec.seed, "rows": rows,
              "gc_bytes_doubling_ratios": ratios}
    cols = ["vary", "n", "k", "cloud_he_ops", "cloud_decryptions",
            "csp_decryptions", "gc_bytes", "iterations"]
    return report, rows, cols


def _exp_leakage(spec: ExperimentSpec, ds: Dataset) -> dict:
    p = spec.params
    p_classifiers = int(p.get("p", 16))
    pair_sample = int(p.get("pair_sample", 1_000_000))
    rep = leakage_analysis(ds, p_classifiers, spec.seed, pair_sample)
    report = {"kind": "LEAKAGE", "seed": spec.seed, "n": ds.n, "k": ds.k,
              **rep.to_dict()}
    rows = [vars(b) for b in rep.buckets]
    return report, rows, ["hamming", "count", "mean_distance", "std_distance",
                          "reliable"]


def _exp_baseline_compare(spec: ExperimentSpec, ds: Dataset) -> dict:
    p = spec.params
    folds = int(p.get("folds", 10))
    taus = {"rlc": int(p.get("tau_rlc", 200)), "ds": int(p.get("tau_ds", 75)),
            "lmc": int(p.get("tau_lmc", 75))}
    results = {}
    for base, tau in taus.items():
        trainer = make_trainer(base, tau, spec.seed)
        mean, std, _ = cv_accuracy(ds.X, ds.y, folds, trainer, seed=spec.seed)
        results[base] = {"tau": tau, "accuracy_mean": mean, "accuracy_std": std}
    report = {"kind": "BASELINE_COMPARE", "folds": folds, "seed": spec.seed,
              "n": ds.n, "k": ds.k, "results": results}
    rows = [{"base": b, **v} for b, v in sorted(results.items())]
    return report, rows, ["base", "tau", "accuracy_mean", "accuracy_std"]


_BODIES = {
    "CV_ACCURACY": _exp_cv_accuracy,
    "CONVERGENCE": _exp_convergence,
    "PRECISION_SWEEP": _exp_precision_sweep,
    "COST_SCALING": _exp_cost_scaling,
    "LEAKAGE": _exp_leakage,
    "BASELINE_COMPARE": _exp_baseline_compare,
}


def validate_report(kind: str, report: dict):
    import jsonschema

    schema_name = kind.lower() + ".schema.json"
    with resources.files("blindboost.schemas").joinpath(schema_name).open() as fh:
        schema = json.load(fh)
    jsonschema.validate(report, schema)


def run_experiment(spec: ExperimentSpec):
    """Execute one experiment; writes <kind>.json and <kind>.csv, returns the
    report dict."""
    ds = resolve_dataset(spec.dataset, spec.seed)
    report, rows, columns = _BODIES[spec.kind](spec, ds)
    validate_report(spec.kind, report)
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{spec.kind.lower()}.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n")
    with (out / f"{spec.kind.lower()}.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return report
