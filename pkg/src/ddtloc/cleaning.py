"""Webly dataset cleaning: noise-rate filtering and VOC-style box export.

Auto-generated boxes become PASCAL-style annotation XML so downstream
detector tooling can consume the cleaned set unmodified.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .errors import IoFailure, NoBoxForImage, UnknownImageId
from .formats import ImageSetManifest
from .localize import LocalizationResult


@dataclass(frozen=True)
class FilterPolicy:
    """Remove an image iff its noise_rate <= threshold."""

    threshold: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")

    def keeps(self, noise_rate: float) -> bool:
        return noise_rate > self.threshold


def _results_by_id(results, manifest: ImageSetManifest) -> dict:
    # results for images outside the manifest are ignored so that a cleaned
    # manifest can be paired with the original full results file
    by_id = {r.image_id: r for r in results}
    for rec in manifest.images:
        if rec.id not in by_id:
            raise UnknownImageId(f"no result for image {rec.id!r}")
    return by_id


def filter_dataset(
    results: list[LocalizationResult],
    manifest: ImageSetManifest,
    policy: FilterPolicy,
) -> ImageSetManifest:
    """New manifest with exactly the images scoring above the threshold,
    original order preserved."""
    by_id = _results_by_id(results, manifest)
    kept = tuple(
        rec for rec in manifest.images if policy.keeps(by_id[rec.id].noise_rate)
    )
    return ImageSetManifest(set_name=manifest.set_name, images=kept)


def _box_xml(parent, box):
    bnd = ET.SubElement(parent, "bndbox")
    # VOC XML is 1-based inclusive.
    for tag, value in (
        ("xmin", box.xmin + 1),
        ("ymin", box.ymin + 1),
        ("xmax", box.xmax + 1),
        ("ymax", box.ymax + 1),
    ):
        ET.SubElement(bnd, tag).text = str(value)


def export_voc(
    results: list[LocalizationResult],
    manifest: ImageSetManifest,
    category: str,
    out_dir,
) -> int:
    """Write one <image_id>.xml per non-noisy image; returns the count.

    A non-noisy result is expected to carry a box (run after filter_dataset);
    a box-less non-noisy entry raises NoBoxForImage.
    """
    by_id = _results_by_id(results, manifest)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create {out_dir}: {e}") from e

    written = 0
    for rec in manifest.images:
        r = by_id[rec.id]
        if r.noisy:
            continue
        if r.box is None:
            raise NoBoxForImage(f"image {rec.id!r} has no predicted box")

        root = ET.Element("annotation")
        ET.SubElement(root, "folder").text = manifest.set_name
        ET.SubElement(root, "filename").text = rec.id
        size = ET.SubElement(root, "size")
        ET.SubElement(size, "width").text = str(rec.width)
        ET.SubElement(size, "height").text = str(rec.height)
        ET.SubElement(size, "depth").text = "3"
        obj = ET.SubElement(root, "object")
        ET.SubElement(obj, "name").text = category
        ET.SubElement(obj, "difficult").text = "0"
        _box_xml(obj, r.box)

        tree = ET.ElementTree(root)
        ET.indent(tree)
        try:
            tree.write(out_dir / f"{rec.id}.xml", encoding="unicode")
        except OSError as e:
            raise IoFailure(f"cannot write annotation for {rec.id!r}: {e}") from e
        written += 1
    return written
