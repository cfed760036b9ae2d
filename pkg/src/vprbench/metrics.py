"""Precision-recall construction, trapezoid AUC, and the timing harness.

The PR protocol ranks queries by match confidence and sweeps prefix lengths:
precision at prefix k is TP(k)/k and recall is TP(k)/N with N the number of
evaluated queries (every query has a true match by dataset contract). AUC is
the trapezoid sum over consecutive points with no synthetic anchor; an
optional anchored mode prepends (0, p1) for the conventional closure.

Metric computation is pure and thread-safe. The timing helpers demand
exclusive single-threaded execution while they run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, asdict

from .exceptions import EmptyOutcomesError


@dataclass(frozen=True)
class QueryOutcome:
    """One evaluated query: its best match, the confidence, and correctness."""

    query_index: int
    matched_reference: int
    confidence: float
    correct: bool


@dataclass(frozen=True)
class PRCurve:
    """Ordered (recall, precision) points, recall non-decreasing."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(r), float(p)) for r, p in self.points)
        if not pts:
            raise ValueError("PR curve needs at least one point")
        last_r = 0.0
        for r, p in pts:
            if not (0.0 <= r <= 1.0 and 0.0 <= p <= 1.0):
                raise ValueError(f"point ({r}, {p}) outside the unit square")
            if r < last_r:
                raise ValueError("recall must be non-decreasing")
            last_r = r
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class EvaluationResult:
    """Per-technique, per-dataset record of all three benchmark metrics."""

    technique_id: str
    dataset_name: str
    auc: float
    encoding_time_s: float
    pair_match_time_s: float
    total_match_time_s: float
    descriptor_bytes: int
    excluded_queries: int

    def __post_init__(self):
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError(f"auc {self.auc} outside [0, 1]")
        for name in ("encoding_time_s", "pair_match_time_s", "total_match_time_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.descriptor_bytes < 0 or self.excluded_queries < 0:
            raise ValueError("descriptor_bytes and excluded_queries must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationResult":
        fields = {k: data[k] for k in cls.__dataclass_fields__}
        return cls(**fields)


def pr_curve(outcomes) -> PRCurve:
    """Prefix precision/recall over outcomes ranked by descending confidence.

    Confidence ties break by ascending query index so the ranking, and hence
    the curve, is deterministic.
    """
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyOutcomesError("cannot build a PR curve from zero outcomes")
    ranked = sorted(outcomes, key=lambda o: (-o.confidence, o.query_index))
    n = len(ranked)
    points = []
    tp = 0
    for k, outcome in enumerate(ranked, start=1):
        if outcome.correct:
            tp += 1
        points.append((tp / n, tp / k))
    return PRCurve(tuple(points))


def auc_trapezoid(curve: PRCurve, anchored: bool = False) -> float:
    """Trapezoid area under the curve: sum of (p_i + p_{i+1})/2 * (r_{i+1} - r_i).

    The sum runs over the curve's own points only; ``anchored`` prepends a
    (0, p_1) point, which lets a perfect ranking reach 1.0 instead of (N-1)/N.
    A single-point curve integrates to 0 (empty sum).
    """
    points = curve.points
    if anchored:
        points = ((0.0, points[0][1]),) + points
    total = 0.0
    for (r0, p0), (r1, p1) in zip(points[:-1], points[1:]):
        total += (p0 + p1) / 2.0 * (r1 - r0)
    return total


def measure_encoding_time(technique, images, repetitions: int = 5) -> float:
    """Mean wall-clock seconds to encode one image.

    Times ``technique.transform`` over the whole image list, repeated; one
    untimed warm-up pass runs first. Call with nothing else on the machine's
    mind: the measurement assumes single-threaded exclusivity.
    """
    if repetitions < 3:
        raise ValueError("repetitions must be >= 3")
    images = list(images)
    if not images:
        raise ValueError("need at least one image to time")
    technique.transform(images)
    start = time.perf_counter()
    for _ in range(repetitions):
        technique.transform(images)
    elapsed = time.perf_counter() - start
    return elapsed / (repetitions * len(images))


def measure_pair_match_time(technique, query_descriptor, reference_descriptor,
                            repetitions: int = 64) -> float:
    """Mean wall-clock seconds for one descriptor-pair comparison.

    Repetitions auto-scale (doubling) until the timed span reaches 10 ms so
    the per-pair mean is resolvable above clock granularity.
    """
    reps = max(1, int(repetitions))
    technique.pair_score(query_descriptor, reference_descriptor)
    while True:
        start = time.perf_counter()
        for _ in range(reps):
            technique.pair_score(query_descriptor, reference_descriptor)
        elapsed = time.perf_counter() - start
        if elapsed >= 0.01 or reps >= 1 << 24:
            return elapsed / reps
        reps *= 2


def total_match_time(encoding_time_s: float, pair_match_time_s: float, reference_count: int) -> float:
    """Per-query matching budget: encoding plus one pair comparison per reference."""
    return encoding_time_s + pair_match_time_s * reference_count
