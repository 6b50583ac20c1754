"""Experiment orchestration: config validation, the full sweep, report files.

A run wires dataset -> models -> explainers -> metrics and emits
``report.json`` plus flat CSVs. Everything downstream of the resolved config
and master seed is deterministic, including across worker counts, so report
regeneration is byte-identical.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from tsxfidel import __version__
from tsxfidel._rng import keyed_rng
from tsxfidel.dataset.builder import FramedDataset, build_framed_dataset, sample_series
from tsxfidel.dataset.covariates import DAILY_COVARIATES, HOURLY_COVARIATES
from tsxfidel.dataset.loader import load_csv
from tsxfidel.dataset.schema import FeatureSpec
from tsxfidel.dataset.synthetic import SyntheticConfig, make_synthetic
from tsxfidel.dataset.windows import WindowInstance, windows_to_arrays
from tsxfidel.errors import ConfigValidationError
from tsxfidel.explainers.dispatch import ExplainerSpec, compute_importance
from tsxfidel.metrics import EvalConfig, FidelityScore, MCConfig, evaluate_dataset
from tsxfidel.models.base import ForecastModel
from tsxfidel.models.gbr import GradientBoostedForecaster
from tsxfidel.models.scores import nd, nrmse
from tsxfidel.models.tdnn import TimeDelayForecaster

logger = logging.getLogger(__name__)

MODEL_NAMES = ("gbr", "tdnn")
EXPLAINER_CONFIG_NAMES = ("random", "omission-local", "omission-global", "kernel-shap")
METRIC_NAMES = ("aopcr", "apt")

GBR_DEFAULTS = {"n_trees": 100, "learning_rate": 0.01, "max_depth": 3, "min_samples_leaf": 1}
TDNN_DEFAULTS = {
    "hidden_units": 64,
    "epochs": 300,
    "batch_size": 32,
    "learning_rate": 1e-3,
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "init_scale": 0.05,
    "seed": 0,
}


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description.

    ``defaults_applied`` lists every dotted key that was filled from a
    default, so the report's config echo shows the provenance of each value.
    """

    data_kind: str
    csv_path: str | None
    csv_granularity: str
    csv_schema: list[dict[str, Any]]
    synthetic: dict[str, Any]
    sample_n_series: int | None
    window_len: int
    horizons: int
    split_ratio: float
    time_covariates: bool
    models: dict[str, dict[str, Any]]
    explainers: list[str]
    shap_n_coalitions: int
    shap_n_background: int
    metrics: list[str]
    top_k: int
    alpha: float
    gamma: float
    mc_threshold: float
    mc_confidence: float
    mc_min_n: int
    mc_max_n: int
    eval_n_windows: int | None
    export_n_windows: int
    seed: int
    defaults_applied: list[str] = field(default_factory=list)

    def echo(self) -> dict[str, Any]:
        """Resolved config as emitted in reports (runtime-only knobs excluded)."""
        return asdict(self)


def validate_config(raw: dict[str, Any]) -> ExperimentConfig:
    """Resolve defaults and collect every violation before failing."""
    diagnostics: list[str] = []
    defaults: list[str] = []

    def pick(section: dict[str, Any], key: str, default: Any, dotted: str) -> Any:
        if key in section:
            return section[key]
        defaults.append(dotted)
        return default

    if not isinstance(raw, dict):
        raise ConfigValidationError(["config root must be a mapping"])

    known_top = {"data", "sampling", "framing", "models", "explainers", "shap", "metrics", "evaluation", "seed"}
    for key in raw:
        if key not in known_top:
            diagnostics.append(f"{key}: unknown section (expected one of {sorted(known_top)})")

    data = raw.get("data")
    data_kind = "synthetic"
    csv_path: str | None = None
    csv_granularity = "hourly"
    csv_schema: list[dict[str, Any]] = []
    synthetic_params: dict[str, Any] = {}
    if not isinstance(data, dict):
        diagnostics.append("data: required section with kind 'csv' or 'synthetic'")
        data = {}
    data_kind = data.get("kind", "synthetic")
    if "kind" not in data:
        defaults.append("data.kind")
    if data_kind not in ("csv", "synthetic"):
        diagnostics.append(f"data.kind: {data_kind!r} is not one of ['csv', 'synthetic']")
    if data_kind == "csv":
        csv_path = data.get("path")
        if not csv_path:
            diagnostics.append("data.path: required for csv data")
        elif not Path(csv_path).exists():
            diagnostics.append(f"data.path: {csv_path!r} does not exist")
        csv_granularity = pick(data, "granularity", "hourly", "data.granularity")
        if csv_granularity not in ("hourly", "daily"):
            diagnostics.append(f"data.granularity: {csv_granularity!r} is not 'hourly' or 'daily'")
        schema = data.get("schema")
        if not isinstance(schema, list) or not schema:
            diagnostics.append("data.schema: required non-empty feature list for csv data")
        else:
            csv_schema = []
            for i, entry in enumerate(schema):
                if not isinstance(entry, dict) or "name" not in entry:
                    diagnostics.append(f"data.schema[{i}]: needs at least a 'name'")
                    continue
                kind = entry.get("kind", "numeric")
                if kind not in ("numeric", "categorical-encoded"):
                    diagnostics.append(
                        f"data.schema[{i}].kind: {kind!r} is not 'numeric' or 'categorical-encoded'"
                    )
                csv_schema.append(
                    {"name": str(entry["name"]), "kind": kind, "is_target": bool(entry.get("is_target", False))}
                )
            if csv_schema and sum(e["is_target"] for e in csv_schema) != 1:
                diagnostics.append("data.schema: exactly one feature must set is_target")
    else:
        syn = data.get("synthetic", data)
        synthetic_params = {
            "n_series": pick(syn, "n_series", 1, "data.synthetic.n_series"),
            "length": pick(syn, "length", 400, "data.synthetic.length"),
            "n_features": pick(syn, "n_features", 4, "data.synthetic.n_features"),
            "driver_feature": pick(syn, "driver_feature", 1, "data.synthetic.driver_feature"),
            "driver_coefficient": pick(syn, "driver_coefficient", 1.0, "data.synthetic.driver_coefficient"),
            "driver_lag": pick(syn, "driver_lag", 4, "data.synthetic.driver_lag"),
            "noise_std": pick(syn, "noise_std", 0.0, "data.synthetic.noise_std"),
            "feature_noise_std": pick(syn, "feature_noise_std", 0.05, "data.synthetic.feature_noise_std"),
            "granularity": pick(syn, "granularity", "hourly", "data.synthetic.granularity"),
            "start": pick(syn, "start", "2021-01-01T00:00", "data.synthetic.start"),
        }
        try:
            SyntheticConfig(**synthetic_params)
        except (ValueError, TypeError) as exc:
            diagnostics.append(f"data.synthetic: {exc}")

    sampling = raw.get("sampling") or {}
    sample_n = sampling.get("n_series")
    if sample_n is not None and (not isinstance(sample_n, int) or sample_n < 1):
        diagnostics.append(f"sampling.n_series: must be a positive integer, got {sample_n!r}")

    framing = raw.get("framing")
    if not isinstance(framing, dict):
        diagnostics.append("framing: required section with window_len")
        framing = {}
    window_len = framing.get("window_len")
    if not isinstance(window_len, int) or window_len < 1:
        diagnostics.append(f"framing.window_len: required positive integer, got {window_len!r}")
        window_len = 1
    horizons = pick(framing, "horizons", 12, "framing.horizons")
    if not isinstance(horizons, int) or horizons < 1:
        diagnostics.append(f"framing.horizons: must be a positive integer, got {horizons!r}")
        horizons = 1
    split_ratio = pick(framing, "split_ratio", 0.8, "framing.split_ratio")
    if not isinstance(split_ratio, (int, float)) or not 0 < split_ratio < 1:
        diagnostics.append(f"framing.split_ratio: must be in (0, 1), got {split_ratio!r}")
    time_covariates = bool(pick(framing, "time_covariates", True, "framing.time_covariates"))

    models_raw = raw.get("models")
    models: dict[str, dict[str, Any]] = {}
    if not isinstance(models_raw, dict) or not models_raw:
        diagnostics.append(f"models: required non-empty mapping with keys from {list(MODEL_NAMES)}")
    else:
        for name, params in models_raw.items():
            if name not in MODEL_NAMES:
                diagnostics.append(f"models.{name}: unknown model (allowed: {list(MODEL_NAMES)})")
                continue
            params = dict(params or {})
            base = dict(GBR_DEFAULTS if name == "gbr" else TDNN_DEFAULTS)
            for key in params:
                if key not in base:
                    diagnostics.append(f"models.{name}.{key}: unknown hyperparameter")
            for key, default in base.items():
                if key not in params:
                    params[key] = default
                    defaults.append(f"models.{name}.{key}")
            models[name] = params

    explainers = raw.get("explainers")
    if explainers is None:
        explainers = ["random"]
        defaults.append("explainers")
    if not isinstance(explainers, list) or not explainers:
        diagnostics.append("explainers: required non-empty list")
        explainers = []
    for name in explainers:
        if name not in EXPLAINER_CONFIG_NAMES:
            diagnostics.append(f"explainers: {name!r} unknown (allowed: {list(EXPLAINER_CONFIG_NAMES)})")

    shap = raw.get("shap") or {}
    shap_n_coalitions = pick(shap, "n_coalitions", 2048, "shap.n_coalitions")
    shap_n_background = pick(shap, "n_background", 16, "shap.n_background")
    if not isinstance(shap_n_coalitions, int) or shap_n_coalitions < 4:
        diagnostics.append(f"shap.n_coalitions: must be an integer >= 4, got {shap_n_coalitions!r}")
    if not isinstance(shap_n_background, int) or shap_n_background < 1:
        diagnostics.append(f"shap.n_background: must be a positive integer, got {shap_n_background!r}")

    metrics_raw = raw.get("metrics") or {}
    metric_names = pick(metrics_raw, "names", list(METRIC_NAMES), "metrics.names")
    if not isinstance(metric_names, list) or not metric_names:
        diagnostics.append("metrics.names: must be a non-empty list")
        metric_names = []
    for name in metric_names:
        if name not in METRIC_NAMES:
            diagnostics.append(f"metrics.names: {name!r} unknown (allowed: {list(METRIC_NAMES)})")
    top_k = pick(metrics_raw, "top_k", 10, "metrics.top_k")
    alpha = pick(metrics_raw, "alpha", 0.10, "metrics.alpha")
    gamma = pick(metrics_raw, "gamma", 1.0, "metrics.gamma")
    if not isinstance(top_k, int) or top_k < 1:
        diagnostics.append(f"metrics.top_k: must be a positive integer, got {top_k!r}")
        top_k = 1
    if not isinstance(alpha, (int, float)) or alpha <= 0:
        diagnostics.append(f"metrics.alpha: must be a positive magnitude, got {alpha!r}")
        alpha = 0.10
    if not isinstance(gamma, (int, float)) or not 0 <= gamma <= 1:
        diagnostics.append(f"metrics.gamma: must lie in [0, 1], got {gamma!r}")
        gamma = 1.0
    mc = metrics_raw.get("mc") or {}
    mc_threshold = pick(mc, "threshold", 0.0005, "metrics.mc.threshold")
    mc_confidence = pick(mc, "confidence", 0.95, "metrics.mc.confidence")
    mc_min_n = pick(mc, "min_n", 30, "metrics.mc.min_n")
    mc_max_n = pick(mc, "max_n", 10000, "metrics.mc.max_n")
    if not isinstance(mc_min_n, int) or mc_min_n < 2:
        diagnostics.append(f"metrics.mc.min_n: must be an integer >= 2, got {mc_min_n!r}")
        mc_min_n = 2
    if not isinstance(mc_max_n, int) or mc_max_n < mc_min_n:
        diagnostics.append(f"metrics.mc.max_n: must be an integer >= min_n, got {mc_max_n!r}")
        mc_max_n = mc_min_n

    # K must fit the cell universe; J is known from the schema plus generated covariates.
    n_raw_features = len(csv_schema) if data_kind == "csv" else synthetic_params.get("n_features", 0)
    if time_covariates and isinstance(n_raw_features, int):
        granularity = csv_granularity if data_kind == "csv" else synthetic_params.get("granularity", "hourly")
        names = HOURLY_COVARIATES if granularity == "hourly" else DAILY_COVARIATES
        existing = {e["name"] for e in csv_schema} if data_kind == "csv" else set()
        n_raw_features += sum(1 for n in names if n not in existing)
    if isinstance(n_raw_features, int) and n_raw_features > 0 and isinstance(window_len, int):
        n_cells = n_raw_features * window_len
        if "aopcr" in metric_names and top_k > n_cells:
            diagnostics.append(
                f"metrics.top_k: {top_k} exceeds the J*L = {n_cells} ablatable cells"
            )

    evaluation = raw.get("evaluation") or {}
    eval_n_windows = pick(evaluation, "n_windows", 25, "evaluation.n_windows")
    if eval_n_windows is not None and (not isinstance(eval_n_windows, int) or eval_n_windows < 1):
        diagnostics.append(f"evaluation.n_windows: must be a positive integer or null, got {eval_n_windows!r}")
    export_n_windows = pick(evaluation, "n_export_windows", 2, "evaluation.n_export_windows")
    if not isinstance(export_n_windows, int) or export_n_windows < 0:
        diagnostics.append(f"evaluation.n_export_windows: must be >= 0, got {export_n_windows!r}")
        export_n_windows = 0

    seed = pick(raw, "seed", 0, "seed")
    if not isinstance(seed, int):
        diagnostics.append(f"seed: must be an integer, got {seed!r}")
        seed = 0

    if diagnostics:
        raise ConfigValidationError(diagnostics)

    return ExperimentConfig(
        data_kind=data_kind,
        csv_path=csv_path,
        csv_granularity=csv_granularity,
        csv_schema=csv_schema,
        synthetic=synthetic_params,
        sample_n_series=sample_n,
        window_len=window_len,
        horizons=horizons,
        split_ratio=float(split_ratio),
        time_covariates=time_covariates,
        models=models,
        explainers=list(explainers),
        shap_n_coalitions=shap_n_coalitions,
        shap_n_background=shap_n_background,
        metrics=list(metric_names),
        top_k=top_k,
        alpha=float(alpha),
        gamma=float(gamma),
        mc_threshold=float(mc_threshold),
        mc_confidence=float(mc_confidence),
        mc_min_n=mc_min_n,
        mc_max_n=mc_max_n,
        eval_n_windows=eval_n_windows,
        export_n_windows=export_n_windows,
        seed=seed,
        defaults_applied=sorted(defaults),
    )


@dataclass
class FidelityReport:
    """Everything one sweep produced, ready for emission."""

    config: dict[str, Any]
    dataset_summary: dict[str, Any]
    model_performance: dict[str, dict[str, float]]
    rows: list[dict[str, Any]]
    importance_records: list[dict[str, Any]]
    version: str = __version__

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "config": self.config,
            "dataset": self.dataset_summary,
            "model_performance": self.model_performance,
            "fidelity": self.rows,
        }


def _load_series(config: ExperimentConfig):
    if config.data_kind == "csv":
        schema = [
            FeatureSpec(name=e["name"], kind=e["kind"], is_target=e["is_target"]) for e in config.csv_schema
        ]
        series = load_csv(config.csv_path, schema, config.csv_granularity)
        series.sort(key=lambda s: s.series_id)
    else:
        series = make_synthetic(SyntheticConfig(**config.synthetic), config.seed)
    if config.sample_n_series is not None:
        series = sample_series(series, config.sample_n_series, config.seed)
    return series


def _fit_models(config: ExperimentConfig, dataset: FramedDataset) -> dict[str, ForecastModel]:
    X, Y = windows_to_arrays(dataset.train)
    fitted: dict[str, ForecastModel] = {}
    for name in sorted(config.models):
        params = config.models[name]
        logger.info("fitting %s on %d windows", name, X.shape[0])
        if name == "gbr":
            fitted[name] = GradientBoostedForecaster(**params).fit(X, Y)
        else:
            fitted[name] = TimeDelayForecaster(**params).fit(X, Y)
    return fitted


def _select_windows(windows: list[WindowInstance], n: int | None, seed: int, purpose: str) -> list[WindowInstance]:
    ordered = sorted(windows, key=lambda w: (w.series_id, w.t_anchor))
    if n is None or n >= len(ordered):
        return ordered
    rng = keyed_rng(seed, "select-windows", purpose)
    idx = sorted(rng.choice(len(ordered), size=n, replace=False).tolist())
    return [ordered[i] for i in idx]


def run(config: ExperimentConfig, jobs: int = 1) -> FidelityReport:
    """Execute the full deterministic sweep described by ``config``."""
    series = _load_series(config)
    dataset = build_framed_dataset(
        series,
        window_len=config.window_len,
        horizons=config.horizons,
        split_ratio=config.split_ratio,
        add_time_covariates=config.time_covariates,
    )
    logger.info(
        "framed %d train / %d test windows (J=%d, L=%d, t0=%d)",
        len(dataset.train), len(dataset.test), dataset.window_shape[0], config.window_len, config.horizons,
    )
    models = _fit_models(config, dataset)

    X_test, Y_test = windows_to_arrays(dataset.test)
    performance = {}
    for name, model in models.items():
        preds = model.predict(X_test)
        performance[name] = {"nrmse": nrmse(Y_test, preds), "nd": nd(Y_test, preds)}

    eval_windows = _select_windows(dataset.test, config.eval_n_windows, config.seed, "evaluate")
    eval_config = EvalConfig(
        metrics=tuple(config.metrics),
        top_k=config.top_k,
        alpha=config.alpha,
        gamma=config.gamma,
        mc=MCConfig(
            threshold=config.mc_threshold,
            confidence=config.mc_confidence,
            min_n=config.mc_min_n,
            max_n=config.mc_max_n,
        ),
    )

    rows: list[dict[str, Any]] = []
    for model_name in sorted(models):
        for explainer_name in config.explainers:
            spec = ExplainerSpec(
                name=explainer_name,
                n_coalitions=config.shap_n_coalitions,
                n_background=config.shap_n_background,
            )
            logger.info("evaluating %s x %s on %d windows", model_name, explainer_name, len(eval_windows))
            scores = evaluate_dataset(
                models[model_name],
                spec,
                eval_windows,
                dataset.pool,
                dataset.global_means,
                eval_config,
                master_seed=config.seed,
                jobs=jobs,
            )
            for score in scores:
                rows.append(_score_row(model_name, explainer_name, score))

    _flag_best(rows)
    importance_records = _export_importance(config, models, dataset)

    return FidelityReport(
        config=config.echo(),
        dataset_summary={
            "n_series": len(series),
            "n_train_windows": len(dataset.train),
            "n_test_windows": len(dataset.test),
            "n_eval_windows": len(eval_windows),
            "window_shape": list(dataset.window_shape),
            "horizons": config.horizons,
        },
        model_performance=performance,
        rows=rows,
        importance_records=importance_records,
    )


def _score_row(model_name: str, explainer_name: str, score: FidelityScore) -> dict[str, Any]:
    return {
        "model": model_name,
        "explainer": explainer_name,
        "metric": score.metric,
        "direction": score.direction,
        "param": score.param,
        "gamma": score.gamma,
        "total": score.total,
        "n_windows": score.n_windows,
        "n_skipped": len(score.skipped),
        "skipped": [asdict(s) for s in score.skipped],
        "per_horizon": [
            {
                "mean": e.mean,
                "margin_of_error": e.margin_of_error,
                "n_samples": e.n_samples,
                "converged": e.converged,
            }
            for e in score.per_horizon
        ],
        "is_best_in_group": False,
    }


def _flag_best(rows: list[dict[str, Any]]) -> None:
    """Mark the best explainer per (model, metric, direction) column.

    AOPCR: largest total for the most-positive direction, smallest (most
    negative) for the other. APT: smallest total, both directions.
    """
    groups: dict[tuple[str, str, str], list[dict[str, Any]]] = {}
    for row in rows:
        groups.setdefault((row["model"], row["metric"], row["direction"]), []).append(row)
    for (_, metric, direction), members in groups.items():
        valid = [r for r in members if not math.isnan(r["total"])]
        if not valid:
            continue
        if metric == "aopcr" and direction == "most_positive":
            best = max(valid, key=lambda r: r["total"])
        else:
            best = min(valid, key=lambda r: r["total"])
        best["is_best_in_group"] = True


def _export_importance(
    config: ExperimentConfig,
    models: dict[str, ForecastModel],
    dataset: FramedDataset,
) -> list[dict[str, Any]]:
    """Heatmap-ready per-cell attributions for a sample of test windows."""
    sample = _select_windows(dataset.test, config.export_n_windows, config.seed, "export")
    records: list[dict[str, Any]] = []
    for model_name in sorted(models):
        model = models[model_name]
        for explainer_name in config.explainers:
            spec = ExplainerSpec(
                name=explainer_name,
                n_coalitions=config.shap_n_coalitions,
                n_background=config.shap_n_background,
            )
            for window in sample:
                means = dataset.global_means.get(window.series_id)
                for horizon in range(config.horizons):
                    imp = compute_importance(
                        spec, model, window, horizon, dataset.pool, means, config.seed
                    )
                    j_count, l_count = imp.shape
                    for j in range(j_count):
                        for l in range(l_count):
                            records.append(
                                {
                                    "model": model_name,
                                    "explainer": explainer_name,
                                    "series_id": window.series_id,
                                    "t_anchor": window.t_anchor,
                                    "horizon": horizon,
                                    "feature": j,
                                    "feature_name": dataset.feature_specs[j].name,
                                    "step": l,
                                    "phi": float(imp.phi[j, l]),
                                }
                            )
    return records


def emit(report: FidelityReport, out_dir: str | Path, formats: tuple[str, ...] = ("json", "csv")) -> list[Path]:
    """Write report files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "json" in formats:
        path = out / "report.json"
        path.write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
        written.append(path)
    if "csv" in formats:
        written.append(_write_scores_csv(report, out / "scores.csv"))
        written.append(_write_importance_csv(report, out / "importance.csv"))
        written.append(_write_perf_csv(report, out / "model_perf.csv"))
    return written


def _write_scores_csv(report: FidelityReport, path: Path) -> Path:
    fields = [
        "model", "explainer", "metric", "direction", "param", "gamma", "total",
        "n_windows", "n_skipped", "n_samples_total", "all_converged", "is_best_in_group",
    ]
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in report.rows:
            writer.writerow(
                {
                    "model": row["model"],
                    "explainer": row["explainer"],
                    "metric": row["metric"],
                    "direction": row["direction"],
                    "param": repr(row["param"]),
                    "gamma": repr(row["gamma"]),
                    "total": repr(row["total"]),
                    "n_windows": row["n_windows"],
                    "n_skipped": row["n_skipped"],
                    "n_samples_total": sum(e["n_samples"] for e in row["per_horizon"]),
                    "all_converged": all(e["converged"] for e in row["per_horizon"]),
                    "is_best_in_group": row["is_best_in_group"],
                }
            )
    return path


def _write_importance_csv(report: FidelityReport, path: Path) -> Path:
    fields = ["model", "explainer", "series_id", "t_anchor", "horizon", "feature", "feature_name", "step", "phi"]
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for record in report.importance_records:
            row = dict(record)
            row["phi"] = repr(row["phi"])
            writer.writerow(row)
    return path


def _write_perf_csv(report: FidelityReport, path: Path) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["model", "nrmse", "nd"])
        writer.writeheader()
        for model in sorted(report.model_performance):
            perf = report.model_performance[model]
            writer.writerow({"model": model, "nrmse": repr(perf["nrmse"]), "nd": repr(perf["nd"])})
    return path
