"""From indicator maps to bounding boxes.

The pipeline per image: resize the signed map to the image resolution with
nearest-neighbor (sign-preserving), binarize at the natural zero threshold,
keep the largest 8-connected positive component, and return its minimum
covering rectangle. Images whose map has no positive value carry no common
object and are flagged noisy.

Three methods share this machinery:

* ddt_localize       - set-wide first principal direction (the main method)
* ddt_plus_localize  - refine the largest component by intersecting it with
                       the binarized map of the previous layer
* scda_localize      - single-image baseline: channel-sum aggregation map
                       thresholded at its own mean
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from pathlib import Path

import numpy as np
from scipy import ndimage

from ._threads import parallel_map
from .errors import IoFailure, MissingLayer, SchemaError
from .formats import BoundingBox, ImageRecord, ImageSetManifest
from .stats import SetStatistics, accumulate, empty_accumulator, finalize, merge
from .transform import IndicatorMap, project

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


class Method(str, Enum):
    DDT = "ddt"
    DDT_PLUS = "ddt_plus"
    SCDA = "scda"


@dataclass(frozen=True)
class BinaryMap:
    height: int
    width: int
    bits: np.ndarray  # (height, width) bool


@dataclass(frozen=True)
class ConnectedComponent:
    mask: np.ndarray  # (height, width) bool, True on the component
    size: int
    anchor: tuple  # smallest (row, col) in row-major scan order


@dataclass(frozen=True)
class LocalizationResult:
    image_id: str
    box: BoundingBox | None
    noisy: bool
    noise_rate: float
    component_size: int
    method: Method


def resize_nearest(m: IndicatorMap, height: int, width: int) -> np.ndarray:
    """Zero-order resize to height x width pixels.

    Output pixel (u, v) copies source cell (floor(u*h/H), floor(v*w/W)), so
    every output value is bit-identical to some source value and signs are
    never changed.
    """
    if height < 1 or width < 1:
        raise ValueError(f"target dims must be >= 1, got {height}x{width}")
    rows = (np.arange(height) * m.h) // height
    cols = (np.arange(width) * m.w) // width
    return m.values[np.ix_(rows, cols)]


def binarize(vals: np.ndarray) -> BinaryMap:
    """True where the value is strictly positive; zero is background."""
    vals = np.asarray(vals)
    height, width = vals.shape
    return BinaryMap(height=height, width=width, bits=vals > 0)


def largest_connected_component(b: BinaryMap) -> ConnectedComponent | None:
    """Largest 8-connected True region, or None if the map is all False.

    Equal-size ties are broken by the component whose first pixel in
    row-major scan order comes earliest.
    """
    labels, n = ndimage.label(b.bits, structure=_EIGHT_CONNECTED)
    if n == 0:
        return None
    flat = labels.ravel()
    ids, first_index = np.unique(flat, return_index=True)
    sizes = np.bincount(flat, minlength=n + 1)
    keep = ids != 0
    ids, first_index = ids[keep], first_index[keep]
    order = sizes[ids] * len(flat) - first_index  # size major, earliest anchor minor
    winner = int(np.argmax(order))
    chosen = ids[winner]
    anchor_flat = int(first_index[winner])
    return ConnectedComponent(
        mask=labels == chosen,
        size=int(sizes[chosen]),
        anchor=(anchor_flat // b.width, anchor_flat % b.width),
    )


def mask_box(mask: np.ndarray) -> BoundingBox | None:
    """Minimum covering box of an arbitrary boolean mask (None if empty)."""
    if not mask.any():
        return None
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return BoundingBox(
        xmin=int(cols[0]), ymin=int(rows[0]),
        xmax=int(cols[-1]), ymax=int(rows[-1]),
    )


def min_covering_box(c: ConnectedComponent) -> BoundingBox:
    """Tightest axis-aligned box containing every component pixel."""
    return mask_box(c.mask)


def compute_set_statistics(
    manifest: ImageSetManifest,
    layer: str = "last",
    top_k: int = 1,
    threads: int | None = None,
) -> SetStatistics:
    """Accumulate every image's descriptors for one layer and finalize.

    Per-image accumulation runs in parallel; partial sums merge in manifest
    order, so the result is bitwise independent of the worker count.
    """
    first = manifest.images[0].load_tensor(layer)
    d = first.d
    parts = parallel_map(
        lambda rec: accumulate(empty_accumulator(d), rec.load_tensor(layer)),
        manifest.images,
        threads,
    )
    total = reduce(merge, parts, empty_accumulator(d))
    return finalize(total, top_k=top_k)


def _noisy(rec: ImageRecord, rate: float, method: Method) -> LocalizationResult:
    return LocalizationResult(
        image_id=rec.id, box=None, noisy=True, noise_rate=rate,
        component_size=0, method=method,
    )


def _box_from_map(rec, vals, rate, method) -> LocalizationResult:
    """Shared tail of every method: resize, binarize, largest CC, min box."""
    resized = resize_nearest(vals, rec.height, rec.width)
    cc = largest_connected_component(binarize(resized))
    if cc is None:
        return _noisy(rec, rate, method)
    return LocalizationResult(
        image_id=rec.id,
        box=min_covering_box(cc),
        noisy=False,
        noise_rate=rate,
        component_size=cc.size,
        method=method,
    )


def ddt_localize(
    manifest: ImageSetManifest,
    layer: str = "last",
    threads: int | None = None,
) -> list[LocalizationResult]:
    """Localize the common object in every image of the set.

    Statistics are computed once over the whole set; each image is then
    projected onto the first principal direction and the largest positive
    component at image resolution becomes the prediction.
    """
    stats = compute_set_statistics(manifest, layer=layer, top_k=1, threads=threads)

    def one(rec: ImageRecord) -> LocalizationResult:
        pmap = project(rec.load_tensor(layer), stats, k=1, image_id=rec.id)
        rate = pmap.positive_fraction()
        if rate == 0.0:
            return _noisy(rec, rate, Method.DDT)
        return _box_from_map(rec, pmap, rate, Method.DDT)

    return parallel_map(one, manifest.images, threads)


def _ddt_plus_one(
    rec: ImageRecord,
    stats_last: SetStatistics,
    stats_prev: SetStatistics,
) -> LocalizationResult:
    pmap = project(rec.load_tensor("last"), stats_last, k=1, image_id=rec.id)
    rate = pmap.positive_fraction()
    if rate == 0.0:
        return _noisy(rec, rate, Method.DDT_PLUS)
    cc = largest_connected_component(
        binarize(resize_nearest(pmap, rec.height, rec.width))
    )
    if cc is None:
        return _noisy(rec, rate, Method.DDT_PLUS)

    prev_map = project(rec.load_tensor("prev"), stats_prev, k=1, image_id=rec.id)
    if not (prev_map.values > 0).any():
        return _noisy(rec, rate, Method.DDT_PLUS)
    prev_bits = binarize(resize_nearest(prev_map, rec.height, rec.width)).bits

    combined = cc.mask & prev_bits
    box = mask_box(combined)
    if box is None:
        return _noisy(rec, rate, Method.DDT_PLUS)
    return LocalizationResult(
        image_id=rec.id, box=box, noisy=False, noise_rate=rate,
        component_size=int(combined.sum()), method=Method.DDT_PLUS,
    )


def ddt_plus_localize(
    manifest: ImageSetManifest,
    threads: int | None = None,
) -> list[LocalizationResult]:
    """Two-layer refinement: intersect the last layer's largest positive
    component with the binarized previous-layer map (no component selection
    on that side). The prediction covers the whole intersection; an empty
    intersection, or a previous-layer map with no positive value, flags the
    image noisy. Statistics are computed independently per layer.
    """
    for rec in manifest.images:
        if "prev" not in rec.layers:
            raise MissingLayer("prev", f"image {rec.id!r}")
    stats_last = compute_set_statistics(manifest, "last", top_k=1, threads=threads)
    stats_prev = compute_set_statistics(manifest, "prev", top_k=1, threads=threads)
    return parallel_map(
        lambda rec: _ddt_plus_one(rec, stats_last, stats_prev),
        manifest.images,
        threads,
    )


def scda_localize(
    manifest: ImageSetManifest,
    layer: str = "last",
    threads: int | None = None,
) -> list[LocalizationResult]:
    """Single-image baseline: sum the tensor over channels, keep cells
    strictly above the map's own mean. No set statistics are involved, so
    the noise_rate slot carries the above-mean fraction instead.
    """

    def one(rec: ImageRecord) -> LocalizationResult:
        t = rec.load_tensor(layer)
        agg = t.data.astype(np.float64).sum(axis=2)
        centered = agg - agg.mean()
        rate = float(np.count_nonzero(centered > 0)) / centered.size
        if rate == 0.0:
            return _noisy(rec, rate, Method.SCDA)
        vals = IndicatorMap(image_id=rec.id, component=1, h=t.h, w=t.w, values=centered)
        return _box_from_map(rec, vals, rate, Method.SCDA)

    return parallel_map(one, manifest.images, threads)


# --- results file (JSON) ---

def results_to_doc(method: Method, results: list[LocalizationResult]) -> dict:
    return {
        "method": method.value,
        "results": [
            {
                "id": r.image_id,
                "box": list(r.box.as_tuple()) if r.box is not None else None,
                "noisy": r.noisy,
                "noise_rate": r.noise_rate,
                "component_size": r.component_size,
            }
            for r in results
        ],
    }


def write_results(method: Method, results: list[LocalizationResult], path) -> None:
    try:
        Path(path).write_text(json.dumps(results_to_doc(method, results), indent=2) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def load_results(path) -> tuple[Method, list[LocalizationResult]]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON: {e}") from e
    try:
        method = Method(doc["method"])
        results = [
            LocalizationResult(
                image_id=entry["id"],
                box=BoundingBox(*entry["box"]) if entry["box"] is not None else None,
                noisy=bool(entry["noisy"]),
                noise_rate=float(entry["noise_rate"]),
                component_size=int(entry["component_size"]),
                method=method,
            )
            for entry in doc["results"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"{path}: malformed results file: {e}") from e
    return method, results
