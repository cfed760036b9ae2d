"""Evaluation orchestration: configuration, dispatch, reports.

A run encodes the reference traverse once, matches every query against it,
builds the PR curve and AUC, measures encoding and per-pair matching time
(single-threaded, references pre-computed), and records the descriptor
footprint. Everything except the timing fields is bit-reproducible for a
fixed seed on one platform.
"""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import DatasetBundle, correct_set, load_dataset
from .descriptor_io import footprint_bytes
from .exceptions import ConfigError, IoFailure
from .keyvalue import parse_keyvalue
from .metrics import (
    EvaluationResult,
    PRCurve,
    QueryOutcome,
    auc_trapezoid,
    measure_encoding_time,
    measure_pair_match_time,
    pr_curve,
    total_match_time,
)
from .techniques import TECHNIQUES, VprTechnique

HARNESS_VERSION = "0.1.0"

_TOP_LEVEL_KEYS = {
    "dataset_root", "technique", "seed", "output_dir", "timing_repetitions", "anchored_auc",
}


@dataclass
class RunConfig:
    """One benchmark invocation: a dataset, a technique, and output plumbing."""

    dataset_root: str = ""
    technique: str = ""
    technique_params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "results"
    timing_repetitions: int = 5
    anchored_auc: bool = False

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            top, sections = parse_keyvalue(path.read_text())
        except ValueError as exc:
            raise ConfigError(f"bad config file {path}: {exc}") from exc
        unknown = set(top) - _TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        unknown_sections = set(sections) - {"technique_params"}
        if unknown_sections:
            raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown_sections))}")
        cfg = cls()
        cfg.dataset_root = top.get("dataset_root", "")
        cfg.technique = top.get("technique", "")
        if "seed" in top:
            cfg.seed = _parse_int(top["seed"], "seed")
        if "timing_repetitions" in top:
            cfg.timing_repetitions = _parse_int(top["timing_repetitions"], "timing_repetitions")
        if "anchored_auc" in top:
            cfg.anchored_auc = _parse_bool(top["anchored_auc"], "anchored_auc")
        cfg.output_dir = top.get("output_dir", cfg.output_dir)
        cfg.technique_params = dict(sections.get("technique_params", {}))
        return cfg


def _parse_int(text, name: str) -> int:
    try:
        return int(str(text))
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {text!r}") from exc


def _parse_bool(text, name: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{name} must be a boolean, got {text!r}")


def _coerce_param(name: str, value, default):
    """Interpret a config string by the shape of the estimator's default."""
    if not isinstance(value, str):
        return value
    try:
        if isinstance(default, bool):
            return _parse_bool(value, name)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, tuple):
            parts = value.replace("(", "").replace(")", "").replace("x", ",").split(",")
            return tuple(int(p.strip()) for p in parts if p.strip())
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"technique parameter {name}={value!r}: {exc}") from exc
    if default is None and value.strip().lower() in ("", "none", "null"):
        return None
    return value


def build_technique(name: str, params: dict | None = None, seed: int | None = None) -> VprTechnique:
    """Instantiate a registered technique, validating parameter keys first."""
    if name not in TECHNIQUES:
        raise ConfigError(
            f"unknown technique {name!r}; choose from {', '.join(sorted(TECHNIQUES))}"
        )
    technique = TECHNIQUES[name]()
    valid = technique.get_params()
    params = dict(params or {})
    unknown = set(params) - set(valid)
    if unknown:
        raise ConfigError(
            f"unknown {name} parameters: {', '.join(sorted(unknown))}; "
            f"valid keys: {', '.join(sorted(valid))}"
        )
    coerced = {k: _coerce_param(k, v, valid[k]) for k, v in params.items()}
    if seed is not None and "seed" in valid and "seed" not in coerced:
        coerced["seed"] = seed
    technique.set_params(**coerced)
    return technique


def validate_config(cfg: RunConfig) -> None:
    if not cfg.dataset_root:
        raise ConfigError("dataset_root is required")
    if not cfg.technique:
        raise ConfigError("technique is required")
    if cfg.timing_repetitions < 3:
        raise ConfigError("timing_repetitions must be >= 3")
    if cfg.seed < 0:
        raise ConfigError("seed must be >= 0")
    # Instantiating validates technique name and parameter keys up front,
    # before any dataset or encoding work starts.
    build_technique(cfg.technique, cfg.technique_params, cfg.seed)


def evaluate_technique(technique: VprTechnique, bundle: DatasetBundle):
    """Fit on references, match queries, and score correctness.

    Returns (outcomes, excluded_count).
    """
    technique.fit(list(bundle.reference_images))
    q_idx, matched, confidences = technique.match(list(bundle.query_images))
    gt = bundle.ground_truth
    outcomes = [
        QueryOutcome(
            query_index=int(q),
            matched_reference=int(m),
            confidence=float(c),
            correct=int(m) in correct_set(gt, int(q)),
        )
        for q, m, c in zip(q_idx, matched, confidences)
    ]
    return outcomes, len(bundle.query_images) - len(outcomes)


def run_evaluation(cfg: RunConfig) -> EvaluationResult:
    """Execute one full benchmark run and write its artifacts to output_dir."""
    validate_config(cfg)
    bundle = load_dataset(cfg.dataset_root)
    technique = build_technique(cfg.technique, cfg.technique_params, cfg.seed)

    outcomes, excluded = evaluate_technique(technique, bundle)
    curve = pr_curve(outcomes)
    auc = auc_trapezoid(curve, anchored=cfg.anchored_auc)

    queries = list(bundle.query_images)
    encoding_time = measure_encoding_time(technique, queries, cfg.timing_repetitions)
    query_rows = technique.transform(queries)
    pair_time = measure_pair_match_time(
        technique, query_rows[0], technique.reference_descriptors_[0]
    )
    reference_count = len(bundle.reference_images)

    result = EvaluationResult(
        technique_id=technique.report_id(),
        dataset_name=bundle.name,
        auc=float(min(max(auc, 0.0), 1.0)),
        encoding_time_s=encoding_time,
        pair_match_time_s=pair_time,
        total_match_time_s=total_match_time(encoding_time, pair_time, reference_count),
        descriptor_bytes=footprint_bytes(technique.reference_descriptors_.shape[1]),
        excluded_queries=excluded,
    )
    emit_report(
        result, curve, outcomes, cfg.output_dir,
        config_echo=_config_echo(cfg),
        reference_count=reference_count,
    )
    return result


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "dataset_root": str(cfg.dataset_root),
        "technique": cfg.technique,
        "technique_params": {k: _jsonable(v) for k, v in cfg.technique_params.items()},
        "seed": cfg.seed,
        "output_dir": str(cfg.output_dir),
        "timing_repetitions": cfg.timing_repetitions,
        "anchored_auc": cfg.anchored_auc,
    }


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _platform_info() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "system": platform.system(),
        "machine": platform.machine(),
    }


def emit_report(result: EvaluationResult, curve: PRCurve, outcomes, output_dir,
                config_echo: dict | None = None, reference_count: int | None = None) -> list[Path]:
    """Write results.json, pr_curve.csv, and matches.csv.

    On a write failure every partial artifact from this call is removed.
    """
    out = Path(output_dir)
    results_path = out / "results.json"
    curve_path = out / "pr_curve.csv"
    matches_path = out / "matches.csv"
    try:
        out.mkdir(parents=True, exist_ok=True)
        payload = dict(result.to_dict())
        payload["harness_version"] = HARNESS_VERSION
        payload["reference_count"] = reference_count
        payload["evaluated_queries"] = len(outcomes)
        payload["config"] = config_echo or {}
        payload["platform"] = _platform_info()
        results_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

        with curve_path.open("w") as fh:
            fh.write("recall,precision\n")
            for r, p in curve.points:
                fh.write(f"{r:.9g},{p:.9g}\n")

        with matches_path.open("w") as fh:
            fh.write("query_index,matched_reference,confidence,correct\n")
            for o in outcomes:
                fh.write(f"{o.query_index},{o.matched_reference},{o.confidence!r},{int(o.correct)}\n")
    except OSError as exc:
        for path in (results_path, curve_path, matches_path):
            path.unlink(missing_ok=True)
        raise IoFailure(f"cannot write report to {out}: {exc}") from exc
    return [results_path, curve_path, matches_path]


def load_result(path) -> tuple[EvaluationResult, dict]:
    """Re-parse a results.json into its EvaluationResult plus the full payload."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read results file {path}: {exc}") from exc
    try:
        return EvaluationResult.from_dict(payload), payload
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path} is not a results.json: {exc}") from exc


def compare_results(paths) -> str:
    """Concatenate results.json files into one fixed-width summary table."""
    rows = [load_result(p)[0] for p in paths]
    header = ("technique", "dataset", "auc", "enc_s/query", "pair_s", "total_s/query",
              "bytes", "excluded")
    table = [header]
    for r in rows:
        table.append((
            r.technique_id, r.dataset_name, f"{r.auc:.6f}",
            f"{r.encoding_time_s:.3e}", f"{r.pair_match_time_s:.3e}",
            f"{r.total_match_time_s:.3e}", str(r.descriptor_bytes), str(r.excluded_queries),
        ))
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in table]
    return "\n".join(lines)
