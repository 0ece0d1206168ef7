"""Set-wide descriptor statistics: streaming mean/covariance and eigenpairs.

The accumulator is a single-pass raw-moment summary in float64. It also
tracks two activation-energy moments (sum of ||x||^2 and sum of x*||x||^2)
so that eigenvectors can be orientation-fixed without a second pass over the
descriptor stream. Accumulators from disjoint shards merge componentwise,
which makes per-image accumulation embarrassingly parallel as long as the
final merge happens in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ComponentOutOfRange,
    DegenerateCovariance,
    DimMismatch,
    EmptyAccumulator,
)
from .formats import DescriptorTensor

# Variance below this fraction of the mean squared descriptor norm is treated
# as "all descriptors identical" (pure rounding residue).
_DEGENERATE_REL = 1e-12


@dataclass(frozen=True)
class CovarianceAccumulator:
    d: int
    count: int
    sum: np.ndarray                  # (d,) float64
    raw_second_moment: np.ndarray    # (d, d) float64, exactly symmetric
    energy: float                    # sum of ||x||^2
    energy_weighted_sum: np.ndarray  # (d,) float64, sum of x * ||x||^2


def empty_accumulator(d: int) -> CovarianceAccumulator:
    if d < 1:
        raise DimMismatch(f"descriptor dimension must be >= 1, got {d}")
    return CovarianceAccumulator(
        d=d,
        count=0,
        sum=np.zeros(d),
        raw_second_moment=np.zeros((d, d)),
        energy=0.0,
        energy_weighted_sum=np.zeros(d),
    )


def accumulate(acc: CovarianceAccumulator, t: DescriptorTensor) -> CovarianceAccumulator:
    """Fold every cell descriptor of one tensor into the accumulator."""
    if t.d != acc.d:
        raise DimMismatch(f"tensor has d={t.d}, accumulator expects d={acc.d}")
    x = t.data.reshape(-1, t.d).astype(np.float64)
    gram = x.T @ x
    sq = np.einsum("ij,ij->i", x, x)
    return CovarianceAccumulator(
        d=acc.d,
        count=acc.count + x.shape[0],
        sum=acc.sum + x.sum(axis=0),
        # (G + G.T)/2 keeps the stored moment exactly symmetric even when the
        # BLAS product is not bit-symmetric.
        raw_second_moment=acc.raw_second_moment + (gram + gram.T) * 0.5,
        energy=acc.energy + float(sq.sum()),
        energy_weighted_sum=acc.energy_weighted_sum + x.T @ sq,
    )


def merge(a: CovarianceAccumulator, b: CovarianceAccumulator) -> CovarianceAccumulator:
    if a.d != b.d:
        raise DimMismatch(f"cannot merge accumulators with d={a.d} and d={b.d}")
    return CovarianceAccumulator(
        d=a.d,
        count=a.count + b.count,
        sum=a.sum + b.sum,
        raw_second_moment=a.raw_second_moment + b.raw_second_moment,
        energy=a.energy + b.energy,
        energy_weighted_sum=a.energy_weighted_sum + b.energy_weighted_sum,
    )


@dataclass(frozen=True)
class SetStatistics:
    """Finalized mean, covariance and sorted, orientation-fixed eigenpairs."""

    mean: np.ndarray          # (d,)
    covariance: np.ndarray    # (d, d)
    eigenvalues: np.ndarray   # (d,) descending
    eigenvectors: np.ndarray  # (d, d), column k is the (k+1)-th direction
    total_count: int
    components: int           # how many leading directions may be projected

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def direction(self, k: int) -> np.ndarray:
        """The k-th principal direction, 1-based."""
        from .errors import ComponentOutOfRange

        if not 1 <= k <= self.components:
            raise ComponentOutOfRange(
                f"component {k} outside retained range 1..{self.components}"
            )
        return self.eigenvectors[:, k - 1]


def orient_eigenvector(xi: np.ndarray, acc: CovarianceAccumulator) -> np.ndarray:
    """Return xi or -xi under the activation-energy orientation rule.

    The kept sign makes the energy-weighted sum of centered projections
    non-negative; high-magnitude descriptors therefore project positive,
    which pins "positive = common object" for indicator maps. When that sum
    is exactly zero the largest-magnitude coordinate (lowest index on ties)
    is made positive instead.
    """
    norm = float(np.linalg.norm(xi))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"eigenvector must be unit length, got norm {norm}")
    criterion = 0.0
    if acc.count > 0:
        mean = acc.sum / acc.count
        criterion = float(xi @ (acc.energy_weighted_sum - mean * acc.energy))
    if criterion > 0:
        return xi
    if criterion < 0:
        return -xi
    lead = int(np.argmax(np.abs(xi)))
    return xi if xi[lead] > 0 else -xi


def finalize(acc: CovarianceAccumulator, top_k: int = 2) -> SetStatistics:
    """Population mean/covariance (divisor K) plus sorted eigenpairs.

    Eigenvalues come out in non-increasing order; every eigenvector is
    orientation-fixed by orient_eigenvector, so identical accumulators give
    bitwise-identical statistics.
    """
    if acc.count < 1:
        raise EmptyAccumulator("no descriptors accumulated")
    if not 1 <= top_k <= acc.d:
        raise ComponentOutOfRange(f"top_k must be in 1..{acc.d}, got {top_k}")

    k = acc.count
    mean = acc.sum / k
    cov = acc.raw_second_moment / k - np.outer(mean, mean)
    cov = (cov + cov.T) * 0.5

    trace = float(np.trace(cov))
    energy_scale = acc.energy / k
    if trace <= 0.0 or trace <= _DEGENERATE_REL * energy_scale:
        raise DegenerateCovariance(
            f"descriptor set has no variance (trace {trace:g}, "
            f"mean squared norm {energy_scale:g})"
        )

    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1].copy()
    evecs = evecs[:, ::-1].copy()
    if evals[0] <= _DEGENERATE_REL * trace:
        raise DegenerateCovariance(
            f"leading eigenvalue {evals[0]:g} negligible against trace {trace:g}"
        )

    for j in range(acc.d):
        evecs[:, j] = orient_eigenvector(evecs[:, j], acc)
    evecs.setflags(write=False)
    evals.setflags(write=False)
    mean.setflags(write=False)
    cov.setflags(write=False)
    return SetStatistics(
        mean=mean,
        covariance=cov,
        eigenvalues=evals,
        eigenvectors=evecs,
        total_count=k,
        components=top_k,
    )
