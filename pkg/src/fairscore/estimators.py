"""Monte-Carlo estimators over sampled scoring functions.

Every estimator draws from a region of interest, ranks the dataset under
each sampled weight vector, and aggregates a Bernoulli statistic: the
unfair fraction (hardness), the frequency of the reference ranking
(cherry-pick audit), or the full occurrence histogram (stable rankings).
Confidence errors come from the normal approximation
``Z(1 - alpha/2) * sqrt(mean * (1 - mean) / s)``.

Work is split into fixed-size blocks; block ``i`` always consumes the
sub-stream ``rng.substream(i)``, so results are bitwise identical for a
given seed regardless of the thread count, and counts merge additively in
block order.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from .errors import DimensionMismatch, InvalidConfidence, ReferenceOutsideRegion
from .geometry import angular_distance, unit
from .rng import RngStream
from .sampler import DEFAULT_GAMMA, RegionOfInterest, build_cdf_table, sample_cap_batch
from .scoring import Dataset, rank

__all__ = [
    "AuditResult",
    "BLOCK_SIZE",
    "RankingScope",
    "StabilityReport",
    "StableRanking",
    "Suggestion",
    "UpEstimate",
    "audit_reference",
    "confidence_error",
    "estimate_up",
    "stable_rankings",
    "suggest_fair",
]

BLOCK_SIZE = 512


@lru_cache(maxsize=64)
def _z_quantile(alpha: float) -> float:
    return float(norm.ppf(1.0 - alpha / 2.0))


def confidence_error(mean: float, s: int, alpha: float) -> float:
    """Half-width of the (1 - alpha) confidence interval for a Bernoulli mean."""
    if not 0.0 < alpha < 1.0:
        raise InvalidConfidence(f"alpha must lie in (0, 1), got {alpha}")
    if s < 1:
        raise ValueError(f"sample count must be >= 1, got {s}")
    if not 0.0 <= mean <= 1.0:
        raise ValueError(f"mean must lie in [0, 1], got {mean}")
    return _z_quantile(alpha) * math.sqrt(mean * (1.0 - mean) / s)


@dataclass(frozen=True)
class UpEstimate:
    """Estimated unfair portion: the fraction of sampled functions whose
    ranking violates the constraints, with its confidence error."""

    up: float
    error: float
    alpha: float
    samples: int


@dataclass(frozen=True)
class Suggestion:
    """Outcome of the nearby-fair-function search."""

    found: bool
    function: np.ndarray | None
    samples_used: int
    angular_gap: float | None


@dataclass(frozen=True)
class AuditResult:
    """Stability of a reference function's ranking within its vicinity."""

    stability: float
    error: float
    alpha: float
    samples: int
    matches: int


@dataclass(frozen=True)
class RankingScope:
    """What counts as "the same output" when fingerprinting rankings.

    ``full`` compares entire rankings; ``top_k`` compares only the first k
    entries, as an unordered set by default (``ordered=True`` compares the
    k-prefix as a sequence).
    """

    kind: str = "full"
    k: int | None = None
    ordered: bool = False

    def __post_init__(self):
        if self.kind not in ("full", "top_k"):
            raise ValueError(f"scope kind must be 'full' or 'top_k', got {self.kind!r}")
        if self.kind == "top_k" and (self.k is None or self.k < 1):
            raise ValueError("top_k scope needs k >= 1")

    @classmethod
    def full(cls) -> "RankingScope":
        return cls(kind="full")

    @classmethod
    def top_k(cls, k: int, ordered: bool = False) -> "RankingScope":
        return cls(kind="top_k", k=k, ordered=ordered)


@dataclass(frozen=True)
class StableRanking:
    """One histogram entry: a distinct output with its observed frequency."""

    fingerprint: str
    count: int
    stability: float
    ids: tuple[str, ...]
    weights: np.ndarray


@dataclass(frozen=True)
class StabilityReport:
    """Occurrence histogram of distinct outputs over the sampled vicinity."""

    histogram: dict[str, int]
    total_samples: int
    top_rankings: tuple[StableRanking, ...]
    scope: RankingScope
    alpha: float
    reference_stability: tuple[float, float] | None = None


# ---------------------------------------------------------------------------
# shared block plumbing


def _make_sampler(roi: RegionOfInterest, gamma: int, table=None):
    if table is None and roi.dimension >= 3:
        table = build_cdf_table(roi.theta, gamma, roi.dimension)

    def draw(stream: RngStream, count: int) -> np.ndarray:
        return sample_cap_batch(roi, table, stream, count)

    return draw


def _run_blocks(work, s: int, rng: RngStream, threads: int, progress=None) -> list:
    """Evaluate ``work(block_rng, start, count)`` over all blocks of ``s``.

    Results are returned in block order whatever the thread count; the
    progress callback receives (done, total) after each block completes.
    """
    spans = [
        (i, start, min(BLOCK_SIZE, s - start))
        for i, start in enumerate(range(0, s, BLOCK_SIZE))
    ]
    results: list = [None] * len(spans)
    done = 0
    if threads <= 1:
        for i, start, count in spans:
            results[i] = work(rng.substream(i), start, count)
            done += count
            if progress is not None:
                progress(done, s)
        return results
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {
            pool.submit(work, rng.substream(i), start, count): (i, count)
            for i, start, count in spans
        }
        for fut, (i, count) in futures.items():
            results[i] = fut.result()
            done += count
            if progress is not None:
                progress(done, s)
    return results


def _compile_constraints(
    data: Dataset, constraints
) -> list[tuple[np.ndarray, int, int, int]]:
    compiled = []
    for c in constraints:
        if c.k > data.n:
            raise DimensionMismatch(
                f"constraint k={c.k} exceeds dataset size n={data.n}"
            )
        compiled.append((data.group_mask(c.group), c.k, c.min_count, c.max_count))
    return compiled


def _order_block(data: Dataset, weights: np.ndarray) -> np.ndarray:
    """Full descending-score orderings with id tie-break, one row per sample."""
    scores = weights @ data.matrix_by_id.T
    ordered = np.argsort(-scores, axis=1, kind="stable")
    return data.by_id[ordered]


def _topk_block(data: Dataset, weights: np.ndarray, k: int, ordered: bool) -> np.ndarray:
    """Top-k record indices per sample; id-ascending when ``ordered`` is False.

    Uses a partial selection instead of a full sort, which is what makes
    large-n stability runs cheap when only the head of the ranking matters.
    """
    scores = weights @ data.matrix.T
    if k >= data.n:
        part = np.tile(np.arange(data.n), (len(weights), 1))
    else:
        part = np.argpartition(-scores, k - 1, axis=1)[:, :k]
    id_keys = data.id_rank[part]
    by_id_order = np.argsort(id_keys, axis=1, kind="stable")
    part = np.take_along_axis(part, by_id_order, axis=1)
    if not ordered:
        return part
    part_scores = np.take_along_axis(scores, part, axis=1)
    by_score = np.argsort(-part_scores, axis=1, kind="stable")
    return np.take_along_axis(part, by_score, axis=1)


def _scope_indices(data: Dataset, weights: np.ndarray, scope: RankingScope) -> np.ndarray:
    if scope.kind == "full":
        return _order_block(data, weights)
    return _topk_block(data, weights, scope.k, scope.ordered)


def _row_fingerprints(data: Dataset, rows: np.ndarray) -> list[str]:
    """Deterministic fingerprint per index row, stable across record input order."""
    sel = data.ids_bytes[rows]
    return [hashlib.sha1(row.tobytes()).hexdigest() for row in sel]


def _fair_mask(order_rows: np.ndarray, compiled) -> np.ndarray:
    ok = np.ones(len(order_rows), dtype=bool)
    for mask, k, lo, hi in compiled:
        counts = mask[order_rows[:, :k]].sum(axis=1)
        ok &= (counts >= lo) & (counts <= hi)
    return ok


def _check_region(data: Dataset, roi: RegionOfInterest):
    if roi.dimension != data.d:
        raise DimensionMismatch(
            f"region of interest has dimension {roi.dimension}, dataset has {data.d}"
        )


# ---------------------------------------------------------------------------
# estimators


def estimate_up(
    data: Dataset,
    constraints,
    roi: RegionOfInterest,
    s: int,
    alpha: float,
    rng: RngStream,
    *,
    gamma: int = DEFAULT_GAMMA,
    table=None,
    threads: int = 1,
    progress=None,
) -> UpEstimate:
    """Estimate the unfair portion of the vicinity by uniform sampling.

    Each sampled function costs one ranking, so the whole estimate is
    O(s n log n). The returned error is the confidence half-width at level
    ``alpha`` for the Bernoulli mean.
    """
    if s < 30:
        raise ValueError(f"need s >= 30 samples for the normal approximation, got {s}")
    _check_region(data, roi)
    compiled = _compile_constraints(data, constraints)
    draw = _make_sampler(roi, gamma, table)

    def work(stream: RngStream, start: int, count: int) -> int:
        weights = draw(stream, count)
        order = _order_block(data, weights)
        return int((~_fair_mask(order, compiled)).sum())

    unfair = sum(_run_blocks(work, s, rng, threads, progress))
    up = unfair / s
    return UpEstimate(up=up, error=confidence_error(up, s, alpha), alpha=alpha, samples=s)


def suggest_fair(
    data: Dataset,
    constraints,
    roi: RegionOfInterest,
    budget: int,
    rng: RngStream,
    *,
    mode: str = "closest",
    gamma: int = DEFAULT_GAMMA,
    table=None,
    threads: int = 1,
    progress=None,
) -> Suggestion:
    """Search the vicinity for a fair function.

    ``closest`` (default) spends the whole budget and returns the accepted
    sample angularly nearest the reference ray; ``first`` returns the first
    accepted sample in stream order. Every returned function has been
    verified by the fairness check; if any fair function exists in the
    region, the result is within the cap angle of the nearest one.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if mode not in ("closest", "first"):
        raise ValueError(f"mode must be 'closest' or 'first', got {mode!r}")
    _check_region(data, roi)
    compiled = _compile_constraints(data, constraints)
    draw = _make_sampler(roi, gamma, table)
    center = roi.center

    def work(stream: RngStream, start: int, count: int):
        weights = draw(stream, count)
        fair = _fair_mask(_order_block(data, weights), compiled)
        if not np.any(fair):
            return None
        rows = np.nonzero(fair)[0]
        gaps = np.arccos(np.clip(weights[rows] @ center, -1.0, 1.0))
        best = int(np.argmin(gaps))
        return (
            float(gaps[best]),
            weights[rows[best]],
            int(rows[0]),
            float(gaps[0]),
            weights[rows[0]],
        )

    hits = _run_blocks(work, s=budget, rng=rng, threads=threads, progress=progress)
    if mode == "first":
        for i, hit in enumerate(hits):
            if hit is not None:
                _, _, first_row, first_gap, first_w = hit
                used = i * BLOCK_SIZE + first_row + 1
                return Suggestion(True, first_w, used, first_gap)
        return Suggestion(False, None, budget, None)
    best = None
    for hit in hits:
        if hit is not None and (best is None or hit[0] < best[0]):
            best = hit
    if best is None:
        return Suggestion(False, None, budget, None)
    return Suggestion(True, best[1], budget, best[0])


def audit_reference(
    data: Dataset,
    reference,
    roi: RegionOfInterest,
    s: int,
    alpha: float,
    rng: RngStream,
    *,
    scope: RankingScope | None = None,
    gamma: int = DEFAULT_GAMMA,
    table=None,
    threads: int = 1,
    progress=None,
) -> AuditResult:
    """Fraction of the vicinity that reproduces the reference function's output.

    Low stability of a published ranking means small weight perturbations
    change it, which is the signature of an engineered (cherry-picked)
    outcome.
    """
    if s < 30:
        raise ValueError(f"need s >= 30 samples for the normal approximation, got {s}")
    _check_region(data, roi)
    ref = unit(reference)
    gap = angular_distance(ref, roi.center)
    if gap > roi.theta + 1e-9:
        raise ReferenceOutsideRegion(
            f"reference lies {gap:.6f} rad from the ray, cap angle is {roi.theta:.6f}"
        )
    scope = scope or RankingScope.full()
    ref_fp = _row_fingerprints(data, _scope_indices(data, ref[None, :], scope))[0]
    draw = _make_sampler(roi, gamma, table)

    def work(stream: RngStream, start: int, count: int) -> int:
        weights = draw(stream, count)
        fps = _row_fingerprints(data, _scope_indices(data, weights, scope))
        return sum(1 for fp in fps if fp == ref_fp)

    matches = sum(_run_blocks(work, s, rng, threads, progress))
    stability = matches / s
    return AuditResult(
        stability=stability,
        error=confidence_error(stability, s, alpha),
        alpha=alpha,
        samples=s,
        matches=matches,
    )


def stable_rankings(
    data: Dataset,
    roi: RegionOfInterest,
    s: int,
    top_m: int,
    scope: RankingScope,
    rng: RngStream,
    *,
    alpha: float = 0.05,
    reference=None,
    gamma: int = DEFAULT_GAMMA,
    table=None,
    threads: int = 1,
    progress=None,
) -> StabilityReport:
    """Histogram of distinct outputs across the sampled vicinity.

    The most frequent entry estimates the most stable output. Only a
    representative weight vector is kept per distinct output; the id
    sequences of the reported top entries are regenerated from those
    representatives at the end, so memory stays O(distinct outputs * d).
    """
    if s < 30:
        raise ValueError(f"need s >= 30 samples for the normal approximation, got {s}")
    if top_m < 1:
        raise ValueError(f"top_m must be >= 1, got {top_m}")
    _check_region(data, roi)
    draw = _make_sampler(roi, gamma, table)

    def work(stream: RngStream, start: int, count: int):
        weights = draw(stream, count)
        fps = _row_fingerprints(data, _scope_indices(data, weights, scope))
        partial: dict[str, tuple[int, np.ndarray]] = {}
        for row, fp in enumerate(fps):
            entry = partial.get(fp)
            partial[fp] = (
                (1, weights[row]) if entry is None else (entry[0] + 1, entry[1])
            )
        return partial

    merged: dict[str, tuple[int, np.ndarray]] = {}
    for partial in _run_blocks(work, s, rng, threads, progress):
        for fp, (count, w) in partial.items():
            entry = merged.get(fp)
            merged[fp] = (count, w) if entry is None else (entry[0] + count, entry[1])

    ranked = sorted(merged.items(), key=lambda kv: (-kv[1][0], kv[0]))
    histogram = {fp: count for fp, (count, _) in ranked}
    top = []
    for fp, (count, w) in ranked[:top_m]:
        ids = _ids_for_scope(data, w, scope)
        top.append(
            StableRanking(
                fingerprint=fp,
                count=count,
                stability=count / s,
                ids=ids,
                weights=w,
            )
        )
    reference_stability = None
    if reference is not None:
        ref = unit(reference)
        ref_fp = _row_fingerprints(data, _scope_indices(data, ref[None, :], scope))[0]
        p = histogram.get(ref_fp, 0) / s
        reference_stability = (p, confidence_error(p, s, alpha))
    return StabilityReport(
        histogram=histogram,
        total_samples=s,
        top_rankings=tuple(top),
        scope=scope,
        alpha=alpha,
        reference_stability=reference_stability,
    )


def _ids_for_scope(data: Dataset, w: np.ndarray, scope: RankingScope) -> tuple[str, ...]:
    if scope.kind == "full":
        return rank(data, w).order
    rows = _topk_block(data, w[None, :], scope.k, scope.ordered)[0]
    return tuple(data.ids[i] for i in rows)
