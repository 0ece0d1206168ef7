"""Projection of per-image descriptors onto the set's principal directions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch
from .formats import DescriptorTensor
from .stats import SetStatistics


@dataclass(frozen=True)
class IndicatorMap:
    """h x w signed projections of one image onto direction k (1-based)."""

    image_id: str
    component: int
    h: int
    w: int
    values: np.ndarray  # (h, w) float64

    def positive_fraction(self) -> float:
        """Fraction of strictly positive cells; the noise-rate score."""
        return float(np.count_nonzero(self.values > 0)) / (self.h * self.w)


def project(
    t: DescriptorTensor,
    stats: SetStatistics,
    k: int = 1,
    image_id: str = "",
) -> IndicatorMap:
    """Signed correlation map: each cell's descriptor, centered on the set
    mean, dotted with the k-th principal direction."""
    if t.d != stats.d:
        raise DimMismatch(f"tensor has d={t.d}, statistics expect d={stats.d}")
    xi = stats.direction(k)
    x = t.data.reshape(-1, t.d).astype(np.float64)
    values = (x - stats.mean) @ xi
    return IndicatorMap(
        image_id=image_id, component=k, h=t.h, w=t.w,
        values=values.reshape(t.h, t.w),
    )


def normalize_signed(m: IndicatorMap) -> IndicatorMap:
    """Scale values into [-1, 1] by the peak magnitude, preserving signs.

    An all-zero map is returned unchanged. Used for visualization and export
    only; localization decisions always use the raw signed values with the
    zero threshold.
    """
    peak = float(np.abs(m.values).max())
    if peak == 0.0:
        return m
    return IndicatorMap(
        image_id=m.image_id, component=m.component, h=m.h, w=m.w,
        values=m.values / peak,
    )
