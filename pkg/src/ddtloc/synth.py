"""Deterministic synthetic descriptor sets with a planted common object.

Each image's descriptors are iid Gaussian background noise; inside a known
rectangle of cells a fixed unit direction (one per set and layer) scaled by
signal_strength is added. Designated noisy images receive noise only. Ground
truth boxes are the planted rectangles scaled to a declared image resolution
(cell_pixels per cell), which gives an exact end-to-end oracle for the whole
pipeline without any network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import IoFailure, SchemaError
from .formats import (
    BoundingBox,
    DescriptorTensor,
    ImageRecord,
    ImageSetManifest,
    write_descriptor_file,
    write_manifest,
)

# spawn-key namespaces for the per-purpose random streams
_DIR_LAST, _DIR_PREV, _NOISE_LAST, _NOISE_PREV, _BOXES = range(5)


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    n_images: int
    h: int
    w: int
    d: int
    signal_strength: float
    noise_sigma: float
    planted_boxes: tuple = ()     # per image: (xmin, ymin, xmax, ymax) cell coords
    noisy_image_ids: frozenset = field(default_factory=frozenset)
    two_layer: bool = False
    cell_pixels: int = 16
    set_name: str = "synthetic"

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.n_images < 1 or self.h < 1 or self.w < 1 or self.d < 1:
            raise ValueError("n_images and dims must be >= 1")
        # signal_strength 0 is allowed: it is the negative control where no
        # common direction exists and recovery collapses toward chance.
        if self.signal_strength < 0 or self.noise_sigma <= 0:
            raise ValueError("need signal_strength >= 0 and noise_sigma > 0")
        if self.cell_pixels < 1:
            raise ValueError("cell_pixels must be >= 1")
        if len(self.planted_boxes) != self.n_images:
            raise ValueError(
                f"need one planted box per image "
                f"({len(self.planted_boxes)} boxes for {self.n_images} images)"
            )
        for box in self.planted_boxes:
            x0, y0, x1, y1 = box
            if not (0 <= x0 <= x1 < self.w and 0 <= y0 <= y1 < self.h):
                raise ValueError(f"planted box {box} outside the {self.h}x{self.w} grid")
        ids = set(self.image_ids())
        unknown = set(self.noisy_image_ids) - ids
        if unknown:
            raise ValueError(f"noisy_image_ids not in the set: {sorted(unknown)}")

    def image_ids(self) -> list:
        return [f"img_{i:03d}" for i in range(self.n_images)]

    @property
    def separation(self) -> float:
        return self.signal_strength / self.noise_sigma


def random_spec(
    seed: int,
    n_images: int = 20,
    h: int = 16,
    w: int = 16,
    d: int = 64,
    signal_strength: float = 8.0,
    noise_sigma: float = 1.0,
    n_noisy: int = 2,
    two_layer: bool = False,
    cell_pixels: int = 16,
    set_name: str = "synthetic",
) -> SynthSpec:
    """Spec with random planted rectangles covering roughly 1/4 to 2/5 of the
    grid. The planted fraction keeps the background projection mean several
    noise deviations below zero, so stray positive cells stay isolated and
    the planted blob always wins the largest-component vote. The last n_noisy
    images carry no signal."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, _BOXES]))
    boxes = []
    for _ in range(n_images):
        bw = int(rng.integers(max(2, w // 2), max(3, (5 * w) // 8) + 1))
        bh = int(rng.integers(max(2, h // 2), max(3, (5 * h) // 8) + 1))
        x0 = int(rng.integers(0, w - bw + 1))
        y0 = int(rng.integers(0, h - bh + 1))
        boxes.append((x0, y0, x0 + bw - 1, y0 + bh - 1))
    ids = [f"img_{i:03d}" for i in range(n_images)]
    return SynthSpec(
        seed=seed,
        n_images=n_images,
        h=h,
        w=w,
        d=d,
        signal_strength=signal_strength,
        noise_sigma=noise_sigma,
        planted_boxes=tuple(boxes),
        noisy_image_ids=frozenset(ids[n_images - n_noisy:] if n_noisy else []),
        two_layer=two_layer,
        cell_pixels=cell_pixels,
        set_name=set_name,
    )


def _unit_direction(seed: int, purpose: int, d: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, purpose]))
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def _layer_tensor(spec, purpose, index, h, w, box, planted, direction) -> DescriptorTensor:
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, purpose, index]))
    data = rng.normal(0.0, spec.noise_sigma, size=(h, w, spec.d))
    if planted:
        x0, y0, x1, y1 = box
        data[y0:y1 + 1, x0:x1 + 1, :] += spec.signal_strength * direction
    return DescriptorTensor.from_array(data.astype(np.float32))


def generate(spec: SynthSpec, out_dir) -> ImageSetManifest:
    """Write descriptor files plus manifest.json; identical specs produce
    byte-identical trees. Returns the constructed manifest."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create {out_dir}: {e}") from e

    u_last = _unit_direction(spec.seed, _DIR_LAST, spec.d)
    u_prev = _unit_direction(spec.seed, _DIR_PREV, spec.d)
    cp = spec.cell_pixels

    records = []
    for i, image_id in enumerate(spec.image_ids()):
        box = spec.planted_boxes[i]
        planted = image_id not in spec.noisy_image_ids

        t_last = _layer_tensor(spec, _NOISE_LAST, i, spec.h, spec.w, box, planted, u_last)
        last_path = out_dir / f"{image_id}_last.ddt"
        write_descriptor_file(t_last, last_path)
        layers = {"last": last_path.resolve()}

        if spec.two_layer:
            x0, y0, x1, y1 = box
            prev_box = (2 * x0, 2 * y0, 2 * x1 + 1, 2 * y1 + 1)
            t_prev = _layer_tensor(
                spec, _NOISE_PREV, i, 2 * spec.h, 2 * spec.w, prev_box, planted, u_prev
            )
            prev_path = out_dir / f"{image_id}_prev.ddt"
            write_descriptor_file(t_prev, prev_path)
            layers["prev"] = prev_path.resolve()

        gt = ()
        if planted:
            x0, y0, x1, y1 = box
            gt = (BoundingBox(x0 * cp, y0 * cp, (x1 + 1) * cp - 1, (y1 + 1) * cp - 1),)
        records.append(
            ImageRecord(
                id=image_id,
                width=spec.w * cp,
                height=spec.h * cp,
                layers=layers,
                gt_boxes=gt,
                noisy=not planted,
            )
        )

    manifest = ImageSetManifest(set_name=spec.set_name, images=tuple(records))
    write_manifest(manifest, out_dir / "manifest.json")
    save_spec(spec, out_dir / "synth_spec.json")
    return manifest


def save_spec(spec: SynthSpec, path) -> None:
    doc = {
        "seed": spec.seed,
        "n_images": spec.n_images,
        "h": spec.h,
        "w": spec.w,
        "d": spec.d,
        "signal_strength": spec.signal_strength,
        "noise_sigma": spec.noise_sigma,
        "separation": spec.separation,
        "planted_boxes": [list(b) for b in spec.planted_boxes],
        "noisy_image_ids": sorted(spec.noisy_image_ids),
        "two_layer": spec.two_layer,
        "cell_pixels": spec.cell_pixels,
        "set_name": spec.set_name,
    }
    try:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def load_spec(path) -> SynthSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON: {e}") from e
    try:
        return SynthSpec(
            seed=doc["seed"],
            n_images=doc["n_images"],
            h=doc["h"],
            w=doc["w"],
            d=doc["d"],
            signal_strength=doc["signal_strength"],
            noise_sigma=doc["noise_sigma"],
            planted_boxes=tuple(tuple(b) for b in doc["planted_boxes"]),
            noisy_image_ids=frozenset(doc.get("noisy_image_ids", ())),
            two_layer=doc.get("two_layer", False),
            cell_pixels=doc.get("cell_pixels", 16),
            set_name=doc.get("set_name", "synthetic"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"{path}: malformed synth spec: {e}") from e


def with_seed(spec: SynthSpec, seed: int) -> SynthSpec:
    return replace(spec, seed=seed)
