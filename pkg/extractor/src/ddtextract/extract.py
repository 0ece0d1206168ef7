"""Batch descriptor extraction: images in, DDT1 tensors plus manifest out.

Every image gets exactly one forward pass at its native resolution (capped
at a configurable max side to bound memory); the "last" and "prev" taps of
that single pass are written as DDT1 files. Undecodable files are skipped
with a warning and listed in a skipped.json sidecar.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .ddt1 import write_ddt1
from .models import load_model

log = logging.getLogger("ddtextract")


class UndecodableImage(Exception):
    pass


@dataclass
class ExtractionConfig:
    image_dir: Path
    out_dir: Path
    model: str = "vgg19"
    weights: str | None = None  # None = pretrained, "random", or a state-dict path
    annotations: Path | None = None  # JSON map id -> {"gt_boxes", "noisy"}
    max_side: int = 1024
    set_name: str | None = None

    def __post_init__(self):
        self.image_dir = Path(self.image_dir)
        self.out_dir = Path(self.out_dir)
        if self.max_side < 1:
            raise ValueError("max_side must be >= 1")


def _load_rgb(path: Path, max_side: int) -> np.ndarray:
    try:
        with Image.open(path) as img:
            # non-RGB modes (grayscale, palette, alpha) are folded to 3-channel
            rgb = img.convert("RGB")
            if max(rgb.size) > max_side:
                scale = max_side / max(rgb.size)
                new_size = (max(1, round(rgb.size[0] * scale)),
                            max(1, round(rgb.size[1] * scale)))
                log.warning("%s: %sx%s exceeds max side %d, feeding %sx%s",
                            path.name, rgb.size[0], rgb.size[1], max_side,
                            new_size[0], new_size[1])
                rgb = rgb.resize(new_size, Image.BILINEAR)
            return np.asarray(rgb)
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise UndecodableImage(f"{path.name}: {e}") from e


def _image_ids(paths):
    """Stable ids: file stem, falling back to the full name on collisions."""
    stems = {}
    for p in paths:
        stems.setdefault(p.stem, []).append(p)
    ids = {}
    for stem, group in stems.items():
        if len(group) == 1:
            ids[group[0]] = stem
        else:
            for p in group:
                ids[p] = p.name
    return ids


def _merge_annotations(entry, ann):
    if "gt_boxes" in ann:
        entry["gt_boxes"] = ann["gt_boxes"]
    if "noisy" in ann:
        entry["noisy"] = bool(ann["noisy"])


def extract(config: ExtractionConfig) -> dict:
    """Run the extraction; returns the manifest document also written to
    out_dir/manifest.json. Deterministic for fixed weights."""
    model = load_model(config.model, config.weights)
    config.out_dir.mkdir(parents=True, exist_ok=True)

    annotations = {}
    if config.annotations is not None:
        annotations = json.loads(Path(config.annotations).read_text())

    candidates = sorted(p for p in config.image_dir.iterdir() if p.is_file())
    ids = _image_ids(candidates)

    images, skipped = [], []
    for path in candidates:
        try:
            rgb = _load_rgb(path, config.max_side)
        except UndecodableImage as e:
            log.warning("skipping %s", e)
            skipped.append({"file": path.name, "reason": str(e)})
            continue

        last, prev = model.taps(model.preprocess(rgb))
        image_id = ids[path]
        last_name = f"{image_id}_last.ddt"
        prev_name = f"{image_id}_prev.ddt"
        write_ddt1(last, config.out_dir / last_name)
        write_ddt1(prev, config.out_dir / prev_name)

        height, width = rgb.shape[:2]  # resolution actually fed to the net
        entry = {
            "id": image_id,
            "width": int(width),
            "height": int(height),
            "layers": {"last": last_name, "prev": prev_name},
        }
        if image_id in annotations:
            _merge_annotations(entry, annotations[image_id])
        images.append(entry)

    manifest = {
        "set_name": config.set_name or config.image_dir.name,
        "images": images,
    }
    (config.out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n")
    (config.out_dir / "skipped.json").write_text(
        json.dumps(skipped, indent=2) + "\n")
    return manifest
