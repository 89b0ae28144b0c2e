"""Scoring predicted floor positions against annotated ground truth.

Only frames whose ground truth is visible count. Among those, a frame without
a prediction is missing: it raises ``missing_fraction`` and is left out of the
error statistics. Sums use ``math.fsum``, which rounds exactly once, so a
report does not depend on frame order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping

from .errors import EmptyGroundTruth, EmptyInput, InsufficientData, UnknownLabel
from .geometry import CameraConfig, camera_floor_distance

SCENARIO_TYPES = ("baseline", "table", "table_chair", "table_sideways", "table_standing")


def euclidean_error(gt, pred) -> float:
    return math.hypot(gt[0] - pred[0], gt[1] - pred[1])


@dataclass(frozen=True)
class EvalReport:
    n_frames: int
    n_predicted: int
    missing_fraction: float
    mean: float | None
    stdev: float | None
    min: float | None
    max: float | None
    cdf: tuple[tuple[float, float], ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cdf"] = [list(p) for p in self.cdf]
        return d

    def to_json(self, with_cdf: bool = True) -> str:
        d = self.to_dict()
        if not with_cdf:
            d.pop("cdf")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d) -> EvalReport:
        d = dict(d)
        d["cdf"] = tuple(tuple(p) for p in d.get("cdf", ()))
        return cls(**d)


def error_cdf(errors) -> list[tuple[float, float]]:
    """Empirical CDF: each sorted error paired with rank/n."""
    errs = sorted(errors)
    n = len(errs)
    if n == 0:
        raise EmptyInput("CDF of an empty error list")
    return [(e, (i + 1) / n) for i, e in enumerate(errs)]


def frame_errors(predictions: Mapping, ground_truth) -> tuple[list[tuple[int, float]], int]:
    """(frame_id, error) for predicted frames with visible truth, and the visible-frame count."""
    pairs = []
    n = 0
    for rec in ground_truth:
        if not rec.visible:
            continue
        n += 1
        p = predictions.get(rec.frame_id)
        if p is not None:
            pairs.append((rec.frame_id, euclidean_error(rec.position, p)))
    return pairs, n


def report_from_errors(errors, n_frames: int) -> EvalReport:
    errors = list(errors)
    k = len(errors)
    if n_frames == 0:
        raise EmptyGroundTruth("no frame with visible ground truth")
    missing = (n_frames - k) / n_frames
    if k == 0:
        return EvalReport(n_frames, 0, missing, None, None, None, None, ())
    mean = math.fsum(errors) / k
    stdev = math.sqrt(math.fsum((e - mean) ** 2 for e in errors) / k)
    # rounding in the mean can leave it a hair outside [min, max] for constant errors
    lo, hi = min(errors), max(errors)
    mean = min(max(mean, lo), hi)
    cdf = tuple(error_cdf(errors))
    return EvalReport(n_frames, k, missing, mean, stdev, lo, hi, cdf)


def evaluate_run(predictions: Mapping, ground_truth) -> EvalReport:
    """Score ``predictions`` (frame_id -> floor point or None) against annotations."""
    pairs, n = frame_errors(predictions, ground_truth)
    return report_from_errors((e for _, e in pairs), n)


@dataclass(frozen=True)
class DistanceErrorSeries:
    pairs: tuple[tuple[float, float], ...]
    correlation: float
    degenerate: bool = False


def pearson(xs, ys) -> tuple[float, bool]:
    """Pearson coefficient; (0.0, True) when either series has zero variance."""
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return 0.0, True
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r)), False


def error_vs_distance(predictions: Mapping, ground_truth, cam: CameraConfig) -> DistanceErrorSeries:
    """Error of each predicted frame against the camera's distance to the true position."""
    pairs = []
    for rec in ground_truth:
        if not rec.visible:
            continue
        p = predictions.get(rec.frame_id)
        if p is None:
            continue
        pairs.append((camera_floor_distance(cam, rec.position), euclidean_error(rec.position, p)))
    if len(pairs) < 2:
        raise InsufficientData(f"{len(pairs)} predicted frame(s); need at least 2")
    r, degenerate = pearson([d for d, _ in pairs], [e for _, e in pairs])
    return DistanceErrorSeries(tuple(pairs), r, degenerate)


def scenario_name(label) -> str:
    """Canonical scenario type from a 1-based index or a name."""
    text = str(label).strip().lower().replace(" ", "_").replace("-", "_")
    if text.isdigit() and 1 <= int(text) <= len(SCENARIO_TYPES):
        return SCENARIO_TYPES[int(text) - 1]
    if text in ("table_and_chair",):
        return "table_chair"
    if text in SCENARIO_TYPES:
        return text
    raise UnknownLabel(f"unknown scenario label {label!r}")


def group_by_scenario(predictions: Mapping, ground_truth, labels: Mapping) -> dict[str, EvalReport]:
    """One report per scenario type present among the visible frames."""
    groups: dict[str, list] = {}
    for rec in ground_truth:
        if not rec.visible:
            continue
        if rec.frame_id not in labels:
            raise UnknownLabel(f"frame {rec.frame_id} has no scenario label")
        groups.setdefault(scenario_name(labels[rec.frame_id]), []).append(rec)
    return {
        name: evaluate_run(predictions, groups[name]) for name in SCENARIO_TYPES if name in groups
    }


def dumps_cdf(cdf) -> str:
    lines = ["error_cm,fraction"]
    lines += [f"{e!r},{f!r}" for e, f in cdf]
    return "\n".join(lines) + "\n"
