"""Writer (and self-check reader) for the DDT1 descriptor file format.

Wire format: magic "DDT1", then h, w, d as unsigned 32-bit little-endian,
then h*w*d IEEE-754 32-bit little-endian floats, row-major with the channel
innermost. This is the consumer pipeline's published interface; the
extractor deliberately speaks only this format rather than importing the
consumer package.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"DDT1"
_HEADER = struct.Struct("<4sIII")


def write_ddt1(array, path) -> None:
    """array: (h, w, d) float, finite."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"expected (h, w, d) array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("activations contain NaN or Inf")
    h, w, d = arr.shape
    Path(path).write_bytes(_HEADER.pack(MAGIC, h, w, d) + arr.tobytes())


def read_ddt1(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, h, w, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    payload = raw[_HEADER.size:]
    if len(payload) != 4 * h * w * d:
        raise ValueError(f"{path}: payload size mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w, d)
