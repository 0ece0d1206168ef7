"""Grayscale heatmaps of indicator maps as binary PGM (P5) images.

Values are first normalized into [-1, 1], resized to the image resolution,
then quantized with v -> round_half_up((v + 1) / 2 * 255), so -1 maps to 0,
0 to 128 and +1 to 255.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ComponentOutOfRange, IoFailure
from .formats import ImageSetManifest
from .localize import compute_set_statistics, resize_nearest
from .transform import normalize_signed, project


def quantize_signed(vals: np.ndarray) -> np.ndarray:
    """Map [-1, 1] onto uint8 0..255 with round-half-up at the midpoint."""
    q = np.floor((np.asarray(vals, dtype=np.float64) + 1.0) / 2.0 * 255.0 + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8)


def write_pgm(pixels: np.ndarray, path) -> None:
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise ValueError("expected a 2-d uint8 array")
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    try:
        Path(path).write_bytes(header + pixels.tobytes())
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM")
    fields, pos = [], 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos).reshape(
        height, width
    )


def render_heatmap(
    manifest: ImageSetManifest,
    image_id: str,
    component: int,
    out_path,
    layer: str = "last",
    threads: int | None = None,
) -> None:
    """Project one image onto the k-th set direction and write the PGM."""
    rec = manifest.record(image_id)
    t = rec.load_tensor(layer)
    if not 1 <= component <= t.d:
        raise ComponentOutOfRange(f"component {component} outside 1..{t.d}")
    stats = compute_set_statistics(manifest, layer=layer, top_k=component, threads=threads)
    pmap = normalize_signed(project(t, stats, k=component, image_id=rec.id))
    resized = resize_nearest(pmap, rec.height, rec.width)
    write_pgm(quantize_signed(resized), out_path)
