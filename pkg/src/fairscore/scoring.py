"""Datasets, linear scoring, rankings, and fairness constraints.

A dataset is a fixed collection of records, each carrying d scoring
attributes (normalized to [0,1] on ingestion), free-form non-scoring
attributes, and optionally a sensitive-group value. Scores are plain dot
products; rankings sort by descending score with ties broken by ascending
record id, and that tie rule is applied identically everywhere (including
the brute-force oracles in the test suite).

Scores are compared exactly, with no epsilon: ranking regions are open
cells of function space, so a sampled weight vector lies on a boundary with
probability zero, and genuinely equal scores fall through to the id
tie-break.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateExchange, DimensionMismatch, UnknownGroup
from .geometry import Hyperplane, to_polar, unit

__all__ = [
    "Dataset",
    "FairnessConstraint",
    "Ranking",
    "Record",
    "ScoringFunction",
    "all_ordering_exchanges",
    "check_fairness",
    "group_counts",
    "ordering_exchange",
    "rank",
    "score",
]


@dataclass(frozen=True)
class Record:
    """One ranked entity: id, scoring attributes, and descriptive attributes."""

    id: str
    scoring: np.ndarray
    attributes: dict[str, str] = field(default_factory=dict)
    group: str | None = None

    def __post_init__(self):
        v = np.asarray(self.scoring, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise DimensionMismatch(f"record {self.id!r} needs a finite 1-D scoring vector")
        object.__setattr__(self, "scoring", v)


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of records sharing one scoring dimension."""

    records: tuple[Record, ...]
    attribute_names: tuple[str, ...] = ()
    sensitive_attribute: str | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        records = tuple(self.records)
        if not records:
            raise DimensionMismatch("a dataset needs at least one record")
        d = records[0].scoring.size
        if any(r.scoring.size != d for r in records):
            raise DimensionMismatch("all records must share the scoring dimension")
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            raise DimensionMismatch("record ids must be unique")
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    @classmethod
    def from_matrix(
        cls,
        matrix,
        ids=None,
        groups=None,
        attribute_names=None,
        sensitive_attribute: str | None = None,
    ) -> "Dataset":
        """Build a dataset from an (n, d) scoring matrix; ids default to t1..tn."""
        m = np.asarray(matrix, dtype=float)
        n = m.shape[0]
        ids = list(ids) if ids is not None else [f"t{i + 1}" for i in range(n)]
        groups = list(groups) if groups is not None else [None] * n
        names = tuple(attribute_names) if attribute_names else tuple(
            f"x{j + 1}" for j in range(m.shape[1])
        )
        records = tuple(
            Record(id=ids[i], scoring=m[i], group=groups[i]) for i in range(n)
        )
        return cls(
            records=records,
            attribute_names=names,
            sensitive_attribute=sensitive_attribute,
        )

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def d(self) -> int:
        return self.records[0].scoring.size

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.records)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.vstack([r.scoring for r in self.records])
        m.setflags(write=False)
        return m

    @cached_property
    def groups(self) -> tuple[str | None, ...]:
        return tuple(r.group for r in self.records)

    @cached_property
    def group_values(self) -> frozenset[str]:
        return frozenset(g for g in self.groups if g is not None)

    @cached_property
    def by_id(self) -> np.ndarray:
        """Record indices ordered by ascending id (the tie-break order)."""
        perm = np.argsort(np.asarray(self.ids, dtype=object), kind="stable")
        perm.setflags(write=False)
        return perm

    @cached_property
    def id_rank(self) -> np.ndarray:
        """Position of each record in the ascending-id order (inverse of by_id)."""
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.by_id] = np.arange(self.n)
        inv.setflags(write=False)
        return inv

    @cached_property
    def matrix_by_id(self) -> np.ndarray:
        """Scoring matrix with rows pre-sorted by id, for stable tie-breaking."""
        m = self.matrix[self.by_id]
        m.setflags(write=False)
        return m

    @cached_property
    def ids_bytes(self) -> np.ndarray:
        """Fixed-width byte view of the ids, for vectorized fingerprinting."""
        arr = np.asarray(self.ids, dtype="S")
        arr.setflags(write=False)
        return arr

    def group_mask(self, group: str) -> np.ndarray:
        """Boolean membership mask over record positions; absent groups give all-False."""
        return np.asarray([g == group for g in self.groups], dtype=bool)

    def digest(self) -> str:
        """Content hash used to tag reports with the dataset they came from."""
        h = hashlib.sha256()
        h.update(",".join(self.attribute_names).encode())
        h.update(f"|{self.sensitive_attribute}|".encode())
        for r in self.records:
            h.update(r.id.encode())
            h.update(np.ascontiguousarray(r.scoring).tobytes())
            h.update(str(r.group).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class ScoringFunction:
    """A weight vector with its canonical unit-norm and polar views."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @cached_property
    def direction(self) -> np.ndarray:
        return unit(self.weights)

    @cached_property
    def angles(self) -> np.ndarray:
        return to_polar(self.weights)[1]

    @property
    def nonnegative(self) -> bool:
        """True when every weight is >= 0, i.e. scores are attribute-monotone."""
        return bool(np.all(self.weights >= 0))


@dataclass(frozen=True)
class Ranking:
    """Record ids in descending-score order with the parallel scores."""

    order: tuple[str, ...]
    scores: tuple[float, ...]

    def top(self, k: int) -> tuple[str, ...]:
        return self.order[:k]


@dataclass(frozen=True)
class FairnessConstraint:
    """Bound on how many members of one group may appear in the top k."""

    group: str
    k: int
    min_count: int = 0
    max_count: int | None = None

    def __post_init__(self):
        hi = self.k if self.max_count is None else self.max_count
        object.__setattr__(self, "max_count", hi)
        if not 0 <= self.min_count <= hi <= self.k:
            raise ValueError(
                f"need 0 <= min_count <= max_count <= k, got "
                f"[{self.min_count}, {hi}] with k={self.k}"
            )

    @classmethod
    def parse(cls, text: str) -> "FairnessConstraint":
        """Parse the CLI form ``GROUP:K:MIN[:MAX]``."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"constraint must be GROUP:K:MIN[:MAX], got {text!r}")
        group, k, lo = parts[0], int(parts[1]), int(parts[2])
        hi = int(parts[3]) if len(parts) == 4 else None
        return cls(group=group, k=k, min_count=lo, max_count=hi)


def score(w, record: Record | np.ndarray) -> float:
    """Score of one record under weight vector w: the exact dot product."""
    v = np.asarray(w, dtype=float)
    t = record.scoring if isinstance(record, Record) else np.asarray(record, dtype=float)
    if v.shape != t.shape:
        raise DimensionMismatch(f"weights have shape {v.shape}, record has {t.shape}")
    return float(v @ t)


def _order_indices(data: Dataset, scores: np.ndarray) -> np.ndarray:
    """Record indices in descending-score order, id-ascending on ties."""
    perm = data.by_id
    return perm[np.argsort(-scores[perm], kind="stable")]


def rank(data: Dataset, w) -> Ranking:
    """Rank the whole dataset under w (descending score, id tie-break)."""
    v = np.asarray(w, dtype=float)
    if v.shape != (data.d,):
        raise DimensionMismatch(f"weights have shape {v.shape}, dataset has d={data.d}")
    scores = data.matrix @ v
    idx = _order_indices(data, scores)
    ids = data.ids
    return Ranking(
        order=tuple(ids[i] for i in idx),
        scores=tuple(float(scores[i]) for i in idx),
    )


def check_fairness(
    ranking: Ranking,
    data: Dataset,
    constraints: list[FairnessConstraint] | tuple[FairnessConstraint, ...],
    strict: bool = True,
) -> bool:
    """True iff every constraint's group count in the top k is within bounds.

    ``strict`` validates that constraint groups exist in the dataset and
    raises ``UnknownGroup`` otherwise; with ``strict=False`` an absent group
    simply counts zero members, so constraints demanding its presence can
    never be satisfied. The estimators use the non-strict form.
    """
    if not constraints:
        return True
    if strict:
        for c in constraints:
            if c.group not in data.group_values:
                raise UnknownGroup(
                    f"group {c.group!r} not found in sensitive attribute values "
                    f"{sorted(data.group_values)}"
                )
    groups = {rid: g for rid, g in zip(data.ids, data.groups)}
    for c in constraints:
        count = sum(1 for rid in ranking.order[: c.k] if groups.get(rid) == c.group)
        if not c.min_count <= count <= c.max_count:
            return False
    return True


def group_counts(ranking: Ranking, data: Dataset, k: int) -> dict[str, int]:
    """Occurrences of each sensitive-group value among the top k."""
    groups = {rid: g for rid, g in zip(data.ids, data.groups)}
    counts: dict[str, int] = {g: 0 for g in sorted(data.group_values)}
    for rid in ranking.order[:k]:
        g = groups.get(rid)
        if g is not None:
            counts[g] = counts.get(g, 0) + 1
    return counts


def ordering_exchange(t_i: Record, t_j: Record) -> Hyperplane:
    """Origin-through hyperplane across which t_i and t_j swap ranks.

    The coefficient vector is the scoring difference, so the sign of
    ``coeffs . w`` says which record scores higher under w (positive means
    t_i wins).
    """
    diff = t_i.scoring - t_j.scoring
    if not np.any(diff):
        raise DegenerateExchange(
            f"records {t_i.id!r} and {t_j.id!r} have identical scoring vectors"
        )
    return Hyperplane(coeffs=diff, offset=0.0, label=(t_i.id, t_j.id))


def all_ordering_exchanges(data: Dataset) -> list[Hyperplane]:
    """Ordering-exchange hyperplanes for all record pairs, skipping degenerate ones."""
    planes = []
    for i in range(data.n):
        for j in range(i + 1, data.n):
            try:
                planes.append(ordering_exchange(data.records[i], data.records[j]))
            except DegenerateExchange:
                continue
    return planes
