"""Sample-based approximate arrangement of origin-through hyperplanes.

Instead of constructing arrangement cells exactly (exponential in the
dimension), the region of interest is discretized by s function samples
kept in a single 1-D order array. Every region is a contiguous index range
of that array. Inserting a hyperplane evaluates one dot product per sample
and then stably partitions each range into its negative and non-negative
sides, so an insertion costs O(s) regardless of dimension and the number
of materialized regions can never exceed s. Regions too small to capture a
sample simply never materialize; a region holding a volume fraction v is
found with probability 1 - (1 - v)^s.

Samples falling exactly on a hyperplane (a measure-zero event) are assigned
to the non-negative side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DimensionMismatch, RegionNotMaterialized
from .geometry import Hyperplane
from .rng import RngStream
from .sampler import DEFAULT_GAMMA, RegionOfInterest, build_cdf_table, sample_cap_batch


@numba.njit(cache=True)
def _partition_ranges(order, spare, is_neg, starts, lengths, neg_totals):
    """Stable in-place partition of each contiguous range of ``order``.

    Negative-side sample indices move to the front of their range, relative
    order preserved on both sides; ``neg_totals`` receives the per-range
    negative counts. Each element is touched twice, independent of the
    ambient dimension.
    """
    for r in range(len(starts)):
        first = starts[r]
        stop = first + lengths[r]
        count = 0
        for i in range(first, stop):
            if is_neg[order[i]]:
                count += 1
        neg_totals[r] = count
        a = first
        b = first + count
        for i in range(first, stop):
            idx = order[i]
            if is_neg[idx]:
                spare[a] = idx
                a += 1
            else:
                spare[b] = idx
                b += 1


@numba.njit(cache=True)
def _rebuild_regions(starts, lengths, neg_totals, signs):
    """Region table after one insertion: crossed regions become two rows,
    every row gains a signature column. Returns the split count too."""
    count = len(starts)
    width = signs.shape[1]
    splits = 0
    for r in range(count):
        if 0 < neg_totals[r] < lengths[r]:
            splits += 1
    new_starts = np.empty(count + splits, np.int64)
    new_lengths = np.empty(count + splits, np.int64)
    new_signs = np.empty((count + splits, width + 1), np.int8)
    j = 0
    for r in range(count):
        total = neg_totals[r]
        if 0 < total < lengths[r]:
            new_starts[j] = starts[r]
            new_lengths[j] = total
            new_signs[j, :width] = signs[r]
            new_signs[j, width] = -1
            j += 1
            new_starts[j] = starts[r] + total
            new_lengths[j] = lengths[r] - total
            new_signs[j, :width] = signs[r]
            new_signs[j, width] = 1
            j += 1
        else:
            new_starts[j] = starts[r]
            new_lengths[j] = lengths[r]
            new_signs[j, :width] = signs[r]
            new_signs[j, width] = -1 if total > 0 else 1
            j += 1
    return new_starts, new_lengths, new_signs, splits

__all__ = ["ApproxArrangement", "Region", "insert_hyperplane", "new_arrangement", "regions", "region_of"]


@dataclass(frozen=True)
class Region:
    """Contiguous sample range [first, last] plus one halfspace sign per
    inserted hyperplane (-1 negative side, +1 non-negative side)."""

    first: int
    last: int
    signature: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.last - self.first + 1


class ApproxArrangement:
    """Mutable arrangement under construction; immutable once insertions stop.

    The sample rows themselves never move; the 1-D array being partitioned
    in place is the index permutation ``order``, so partitioning cost does
    not depend on the dimension.
    """

    def __init__(self, roi: RegionOfInterest, points: np.ndarray):
        if points.ndim != 2 or points.shape[1] != roi.dimension:
            raise DimensionMismatch(
                f"points must be (s, {roi.dimension}), got {points.shape}"
            )
        self.roi = roi
        self._points = points
        n = len(points)
        self._order = np.arange(n, dtype=np.int32)
        self._spare_order = np.zeros(n, dtype=np.int32)
        self._values = np.zeros(n)
        self._is_neg = np.zeros(n, dtype=bool)
        self._starts = np.array([0], dtype=np.int64)
        self._lengths = np.array([n], dtype=np.int64)
        self._signs = np.empty((1, 0), dtype=np.int8)
        self.hyperplanes: list[Hyperplane] = []
        self._sig_index: dict[tuple[int, ...], int] | None = {(): 0}

    @property
    def size(self) -> int:
        return len(self._points)

    @property
    def region_count(self) -> int:
        return len(self._starts)

    def sample(self, i: int) -> np.ndarray:
        """Sample at logical position ``i`` of the partitioned order."""
        return self._points[self._order[i]]

    @property
    def samples(self) -> np.ndarray:
        """Samples in logical (partitioned) order; rows of one region are adjacent."""
        return self._points[self._order]

    def insert(self, h: Hyperplane) -> int:
        """Insert a hyperplane, splitting every region it crosses.

        Returns the number of regions split. One pass computes all sample
        side signs, a second stable counting pass scatters each logical
        position to its new slot, and the region table is rebuilt from the
        per-region negative counts; no per-region Python loop is involved.
        """
        if h.coeffs.size != self._points.shape[1]:
            raise DimensionMismatch(
                f"hyperplane has dimension {h.coeffs.size}, samples have "
                f"{self._points.shape[1]}"
            )
        if h.offset != 0.0:
            raise ValueError("only origin-through hyperplanes are supported")
        np.dot(self._points, h.coeffs, out=self._values)
        np.less(self._values, 0.0, out=self._is_neg)

        starts, lengths = self._starts, self._lengths
        neg_totals = np.empty(len(starts), dtype=np.int64)
        _partition_ranges(
            self._order, self._spare_order, self._is_neg, starts, lengths, neg_totals
        )
        self._order, self._spare_order = self._spare_order, self._order

        self._starts, self._lengths, self._signs, splits = _rebuild_regions(
            starts, lengths, neg_totals, self._signs
        )
        self.hyperplanes.append(h)
        self._sig_index = None
        return splits

    def regions(self) -> list[tuple[Region, float]]:
        """All materialized regions with their sample-share volume estimates.

        The estimates are exact fractions of the sample array, so they sum
        to 1 by construction.
        """
        s = self.size
        out = []
        for i in range(self.region_count):
            first = int(self._starts[i])
            length = int(self._lengths[i])
            region = Region(
                first=first,
                last=first + length - 1,
                signature=tuple(int(v) for v in self._signs[i]),
            )
            out.append((region, length / s))
        return out

    def region_of(self, w) -> Region:
        """The region whose signature matches the halfspace signs of ``w``."""
        v = np.asarray(w, dtype=float)
        if v.shape != (self._points.shape[1],):
            raise DimensionMismatch(
                f"vector has shape {v.shape}, samples have dimension "
                f"{self._points.shape[1]}"
            )
        sig = tuple(
            1 if float(h.coeffs @ v) >= 0.0 else -1 for h in self.hyperplanes
        )
        if self._sig_index is None:
            self._sig_index = {
                tuple(int(x) for x in self._signs[i]): i
                for i in range(self.region_count)
            }
        idx = self._sig_index.get(sig)
        if idx is None:
            raise RegionNotMaterialized(
                f"no sampled region has signature {sig}; the cell holding the "
                "query captured zero samples"
            )
        first = int(self._starts[idx])
        length = int(self._lengths[idx])
        return Region(first=first, last=first + length - 1, signature=sig)


def new_arrangement(
    roi: RegionOfInterest,
    s: int,
    rng: RngStream,
    *,
    gamma: int = DEFAULT_GAMMA,
) -> ApproxArrangement:
    """Draw s samples from the region of interest and start an arrangement
    with the single region spanning them all."""
    if s < 1:
        raise ValueError(f"need at least one sample, got {s}")
    table = (
        build_cdf_table(roi.theta, gamma, roi.dimension)
        if roi.dimension >= 3
        else None
    )
    points = sample_cap_batch(roi, table, rng, s)
    return ApproxArrangement(roi, points)


def insert_hyperplane(arr: ApproxArrangement, h: Hyperplane) -> int:
    return arr.insert(h)


def regions(arr: ApproxArrangement) -> list[tuple[Region, float]]:
    return arr.regions()


def region_of(arr: ApproxArrangement, w) -> Region:
    return arr.region_of(w)
