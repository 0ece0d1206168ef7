"""Scoring: CorLoc against ground-truth boxes and the noisy-image ROC."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateLabels, IoFailure, MissingNoiseLabels, UnknownImageId
from .formats import BoundingBox, ImageSetManifest
from .localize import LocalizationResult


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union with inclusive +1 pixel areas."""
    ix = min(a.xmax, b.xmax) - max(a.xmin, b.xmin) + 1
    iy = min(a.ymax, b.ymax) - max(a.ymin, b.ymin) + 1
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class CorLocReport:
    set_name: str
    evaluated: int
    correct: int
    corloc: float  # percentage
    per_image: tuple = ()  # (id, best_iou or None, correct) in manifest order


def corloc(
    results: list[LocalizationResult],
    manifest: ImageSetManifest,
    threshold: float = 0.5,
) -> CorLocReport:
    """Percentage of annotated images whose predicted box overlaps some
    ground-truth box with IoU strictly above the threshold.

    Images without ground-truth boxes are excluded from the denominator; an
    annotated image with a noisy (box-less) prediction counts as incorrect.
    """
    ids = {rec.id for rec in manifest.images}
    by_id = {}
    for r in results:
        if r.image_id not in ids:
            raise UnknownImageId(f"result for unknown image {r.image_id!r}")
        by_id[r.image_id] = r

    per_image = []
    evaluated = correct = 0
    for rec in manifest.images:
        if not rec.gt_boxes:
            continue
        evaluated += 1
        r = by_id.get(rec.id)
        best = None
        if r is not None and r.box is not None:
            best = max(iou(r.box, gt) for gt in rec.gt_boxes)
        hit = best is not None and best > threshold
        correct += hit
        per_image.append((rec.id, best, hit))

    pct = 100.0 * correct / evaluated if evaluated else 0.0
    return CorLocReport(
        set_name=manifest.set_name,
        evaluated=evaluated,
        correct=correct,
        corloc=pct,
        per_image=tuple(per_image),
    )


def report_to_doc(report: CorLocReport) -> dict:
    return {
        "corloc": report.corloc,
        "evaluated": report.evaluated,
        "correct": report.correct,
        "per_image": [
            {"id": image_id, "iou": best, "correct": hit}
            for image_id, best, hit in report.per_image
        ],
    }


def write_report(report: CorLocReport, path) -> None:
    try:
        Path(path).write_text(json.dumps(report_to_doc(report), indent=2) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


@dataclass(frozen=True)
class RocCurve:
    """Noisy-image detection sweep: flag an image when its score <= theta."""

    thresholds: tuple  # -inf sentinel first, then distinct scores ascending
    points: tuple      # (fpr, tpr) per threshold, monotone, (0,0) .. (1,1)
    auc: float


def noise_roc(
    results: list[LocalizationResult],
    manifest: ImageSetManifest,
) -> RocCurve:
    """ROC of the noise-rate score against the manifest's noisy labels.

    Low noise rates mean likely-noisy, so the detector fires on
    noise_rate <= theta; the curve sweeps theta over every distinct score.
    AUC is the trapezoid-rule area.
    """
    labels, scores = [], []
    for r in results:
        rec = manifest.record(r.image_id)
        if rec.noisy is None:
            raise MissingNoiseLabels(f"image {rec.id!r} has no noisy label")
        labels.append(rec.noisy)
        scores.append(r.noise_rate)
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("need at least one noisy and one clean image")

    thresholds = [float("-inf")] + sorted(set(scores.tolist()))
    points = []
    for theta in thresholds:
        flagged = scores <= theta
        tpr = float(np.count_nonzero(flagged & labels)) / n_pos
        fpr = float(np.count_nonzero(flagged & ~labels)) / n_neg
        points.append((fpr, tpr))
    fprs = np.array([p[0] for p in points])
    tprs = np.array([p[1] for p in points])
    auc = float(np.trapezoid(tprs, fprs))
    return RocCurve(thresholds=tuple(thresholds), points=tuple(points), auc=auc)


def write_roc_csv(curve: RocCurve, path) -> None:
    lines = ["threshold,fpr,tpr"]
    for theta, (fpr, tpr) in zip(curve.thresholds, curve.points):
        lines.append(f"{theta!r},{fpr!r},{tpr!r}")
    lines.append(f"# auc = {curve.auc!r}")
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
