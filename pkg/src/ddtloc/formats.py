"""Descriptor tensor file format, bounding boxes and the dataset manifest.

Descriptor files are a small self-describing binary format:

    [magic "DDT1"] [u32le h] [u32le w] [u32le d] [f32le x h*w*d]

Payload floats are row-major with the channel innermost, i.e. the value of
cell (i, j) channel c sits at flat index (i*w + j)*d + c.

The manifest is JSON:

    {"set_name": str,
     "images": [{"id": str, "width": int, "height": int,
                 "layers": {"last": str, "prev"?: str},
                 "gt_boxes"?: [[xmin, ymin, xmax, ymax], ...],
                 "noisy"?: bool}, ...]}

Layer paths are resolved relative to the manifest file's directory. Boxes are
0-based with both ends inclusive; conversion to 1-based coordinates happens
only at VOC XML export.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    BoxOutOfBounds,
    DescriptorFileError,
    DimOverflow,
    DuplicateId,
    IoFailure,
    MissingLayer,
    NonFiniteValue,
    SchemaError,
    TruncatedFile,
)

MAGIC = b"DDT1"
_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True, eq=False)
class DescriptorTensor:
    """One image's h x w x d activation field from one layer."""

    h: int
    w: int
    d: int
    data: np.ndarray  # float32, shape (h, w, d), read-only

    def __post_init__(self):
        if self.h < 1 or self.w < 1 or self.d < 1:
            raise DimOverflow(f"dims must be >= 1, got {self.h}x{self.w}x{self.d}")
        if self.data.shape != (self.h, self.w, self.d):
            raise DimOverflow(
                f"data shape {self.data.shape} does not match dims "
                f"{self.h}x{self.w}x{self.d}"
            )
        if not np.isfinite(self.data).all():
            raise NonFiniteValue("tensor contains NaN or Inf")
        self.data.setflags(write=False)

    @classmethod
    def from_array(cls, arr) -> "DescriptorTensor":
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        if arr.ndim != 3:
            raise DimOverflow(f"expected a 3-d array, got shape {arr.shape}")
        h, w, d = arr.shape
        return cls(h=h, w=w, d=d, data=arr)

    def __eq__(self, other):
        if not isinstance(other, DescriptorTensor):
            return NotImplemented
        return (
            (self.h, self.w, self.d) == (other.h, other.w, other.d)
            and np.array_equal(self.data, other.data)
        )


def read_descriptor_file(path) -> DescriptorTensor:
    """Parse one DDT1 file. Every malformed input raises a named error."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, header needs {_HEADER.size}")
    magic, h, w, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r}")
    if h == 0 or w == 0 or d == 0:
        raise DimOverflow(f"{path}: zero dimension in header ({h}x{w}x{d})")
    count = h * w * d
    if count * 4 >= 1 << 63:
        raise DimOverflow(f"{path}: payload size overflows ({h}x{w}x{d})")
    payload = raw[_HEADER.size:]
    if len(payload) < 4 * count:
        raise TruncatedFile(
            f"{path}: payload has {len(payload)} bytes, expected {4 * count}"
        )
    if len(payload) > 4 * count:
        raise TruncatedFile(
            f"{path}: {len(payload) - 4 * count} trailing bytes after payload"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(h, w, d)
    if not np.isfinite(data).all():
        raise NonFiniteValue(f"{path}: payload contains NaN or Inf")
    return DescriptorTensor(h=h, w=w, d=d, data=data)


def write_descriptor_file(t: DescriptorTensor, path) -> None:
    """Write one DDT1 file; read_descriptor_file round-trips it bit-exactly."""
    header = _HEADER.pack(MAGIC, t.h, t.w, t.d)
    payload = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, 0-based, inclusive on both ends."""

    xmin: int
    ymin: int
    xmax: int
    ymax: int

    def __post_init__(self):
        if not (0 <= self.xmin <= self.xmax and 0 <= self.ymin <= self.ymax):
            raise BoxOutOfBounds(f"invalid box {self.as_tuple()}")

    def as_tuple(self):
        return (self.xmin, self.ymin, self.xmax, self.ymax)

    @property
    def area(self) -> int:
        return (self.xmax - self.xmin + 1) * (self.ymax - self.ymin + 1)

    def check_within(self, width: int, height: int) -> None:
        if self.xmax >= width or self.ymax >= height:
            raise BoxOutOfBounds(
                f"box {self.as_tuple()} exceeds image {width}x{height}"
            )


@dataclass(frozen=True)
class ImageRecord:
    """One image entry of a manifest; layer paths are resolved absolute."""

    id: str
    width: int
    height: int
    layers: dict  # layer name -> absolute Path of the descriptor file
    gt_boxes: tuple = ()
    noisy: bool | None = None

    def layer_path(self, layer: str) -> Path:
        if layer not in self.layers:
            raise MissingLayer(layer, f"image {self.id!r}")
        return self.layers[layer]

    def load_tensor(self, layer: str) -> DescriptorTensor:
        path = self.layer_path(layer)
        try:
            return read_descriptor_file(path)
        except (IoFailure, BadMagic, TruncatedFile, NonFiniteValue, DimOverflow) as e:
            raise DescriptorFileError(self.id, e) from e


@dataclass(frozen=True)
class ImageSetManifest:
    set_name: str
    images: tuple = field(default_factory=tuple)  # ordered ImageRecords

    def __len__(self):
        return len(self.images)

    def record(self, image_id: str) -> ImageRecord:
        for rec in self.images:
            if rec.id == image_id:
                return rec
        from .errors import UnknownImageId

        raise UnknownImageId(f"image {image_id!r} not in set {self.set_name!r}")


def _require(cond, msg):
    if not cond:
        raise SchemaError(msg)


def _parse_record(entry, base_dir: Path) -> ImageRecord:
    _require(isinstance(entry, dict), "image entry must be an object")
    for key in ("id", "width", "height", "layers"):
        _require(key in entry, f"image entry missing {key!r}")
    image_id = entry["id"]
    _require(isinstance(image_id, str) and image_id, "image id must be a non-empty string")
    width, height = entry["width"], entry["height"]
    _require(
        isinstance(width, int) and not isinstance(width, bool) and width >= 1,
        f"{image_id}: width must be a positive integer",
    )
    _require(
        isinstance(height, int) and not isinstance(height, bool) and height >= 1,
        f"{image_id}: height must be a positive integer",
    )
    layers_raw = entry["layers"]
    _require(isinstance(layers_raw, dict) and layers_raw, f"{image_id}: layers must be a non-empty object")
    if "last" not in layers_raw:
        raise MissingLayer("last", f"image {image_id!r}")
    layers = {}
    for name, rel in layers_raw.items():
        _require(isinstance(rel, str) and rel, f"{image_id}: layer {name!r} path must be a string")
        layers[name] = (base_dir / rel).resolve()

    gt_boxes = []
    if "gt_boxes" in entry and entry["gt_boxes"] is not None:
        _require(isinstance(entry["gt_boxes"], list), f"{image_id}: gt_boxes must be a list")
        for raw in entry["gt_boxes"]:
            _require(
                isinstance(raw, list) and len(raw) == 4
                and all(isinstance(v, int) and not isinstance(v, bool) for v in raw),
                f"{image_id}: each gt box must be [xmin, ymin, xmax, ymax] ints",
            )
            box = BoundingBox(*raw)
            box.check_within(width, height)
            gt_boxes.append(box)

    noisy = entry.get("noisy")
    if noisy is not None:
        _require(isinstance(noisy, bool), f"{image_id}: noisy must be a boolean")

    return ImageRecord(
        id=image_id,
        width=width,
        height=height,
        layers=layers,
        gt_boxes=tuple(gt_boxes),
        noisy=noisy,
    )


def load_manifest(path, validate_descriptors: bool = True) -> ImageSetManifest:
    """Load and fully validate a manifest JSON file.

    With validate_descriptors (the default, and what the manifest invariants
    require) every referenced descriptor file is parsed eagerly so that
    downstream stages never hit a malformed file mid-pipeline.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON: {e}") from e

    _require(isinstance(doc, dict), "manifest must be a JSON object")
    _require(isinstance(doc.get("set_name"), str), "manifest missing string set_name")
    _require(isinstance(doc.get("images"), list), "manifest missing images list")
    _require(len(doc["images"]) >= 1, "manifest must list at least one image")

    base_dir = path.resolve().parent
    records = []
    seen = set()
    for entry in doc["images"]:
        rec = _parse_record(entry, base_dir)
        if rec.id in seen:
            raise DuplicateId(f"duplicate image id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)

    if validate_descriptors:
        for rec in records:
            for layer in rec.layers:
                rec.load_tensor(layer)

    return ImageSetManifest(set_name=doc["set_name"], images=tuple(records))


def write_manifest(manifest: ImageSetManifest, path) -> None:
    """Serialize a manifest; layer paths are stored relative to the output dir."""
    path = Path(path)
    base = path.resolve().parent
    images = []
    for rec in manifest.images:
        entry = {
            "id": rec.id,
            "width": rec.width,
            "height": rec.height,
            "layers": {
                name: Path(os.path.relpath(p, base)).as_posix()
                for name, p in rec.layers.items()
            },
        }
        if rec.gt_boxes:
            entry["gt_boxes"] = [list(b.as_tuple()) for b in rec.gt_boxes]
        if rec.noisy is not None:
            entry["noisy"] = rec.noisy
        images.append(entry)
    doc = {"set_name": manifest.set_name, "images": images}
    try:
        path.write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
