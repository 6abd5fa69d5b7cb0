"""Unbiased sampling of scoring-function space.

Two samplers are provided: one for the whole function space (points on the
unit d-sphere via normalized standard-normal draws) and one for a region of
interest, the spherical cap of half-angle theta around a reference ray. Cap
sampling draws the polar angle through a tabulated inverse CDF, picks a
uniform direction on the (d-1)-sphere, lifts the pair onto the cap around
the d-th axis, and rotates the result onto the reference ray.

``sample_sphere_by_angles`` is intentionally biased for d >= 3 (it samples
the angles uniformly, which concentrates mass at the poles) and exists as a
negative control for uniformity tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidProbability,
    RegionTooSmall,
    TooCoarse,
)
from .geometry import RotationPlan, to_cartesian, to_polar, unit
from .rng import RngStream

__all__ = [
    "DEFAULT_GAMMA",
    "CdfTable",
    "RegionOfInterest",
    "build_cdf_table",
    "inverse_cdf_3d",
    "sample_cap",
    "sample_cap_batch",
    "sample_cap_rejection",
    "sample_sphere",
    "sample_sphere_batch",
    "sample_sphere_by_angles",
]

DEFAULT_GAMMA = 10_000


@dataclass(frozen=True)
class RegionOfInterest:
    """Spherical cap of half-angle ``theta`` around the ray ``rho``."""

    rho: np.ndarray
    theta: float

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "rho", rho)
        if not 0.0 < self.theta <= math.pi / 2:
            raise ValueError(f"theta must lie in (0, pi/2], got {self.theta}")

    @classmethod
    def around(cls, weights, theta: float) -> "RegionOfInterest":
        """Region centered on the ray of a weight vector."""
        _, angles = to_polar(unit(weights))
        return cls(rho=angles, theta=float(theta))

    @property
    def dimension(self) -> int:
        return self.rho.size + 1

    @cached_property
    def center(self) -> np.ndarray:
        """Unit vector of the reference ray."""
        return to_cartesian(1.0, self.rho)

    @cached_property
    def plan(self) -> RotationPlan:
        return RotationPlan.from_ray(self.rho)

    @cached_property
    def rotation(self) -> np.ndarray:
        return self.plan.matrix()


@dataclass(frozen=True)
class CdfTable:
    """Cumulative table of the cap polar-angle distribution.

    ``values[i]`` approximates the probability that the polar angle is below
    ``(i+1) * epsilon`` where ``epsilon = theta / gamma``; the last entry is
    exactly 1 after normalization.
    """

    values: np.ndarray
    theta: float
    gamma: int
    dimension: int

    @property
    def epsilon(self) -> float:
        return self.theta / self.gamma


def build_cdf_table(theta: float, gamma: int = DEFAULT_GAMMA, d: int = 3) -> CdfTable:
    """Tabulate the polar-angle CDF by Riemann sums of ``sin^(d-2)``.

    The surface measure of the cap between polar angles x and x+dx is
    proportional to ``sin^(d-2)(x) dx``, so partial sums of that integrand
    over a regular partition of [0, theta], normalized by the total, give
    the CDF at each partition boundary.
    """
    if gamma < 100:
        raise TooCoarse(f"need at least 100 partitions, got {gamma}")
    if not 0.0 < theta <= math.pi / 2:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")
    if d < 3:
        raise DimensionMismatch("the table is only defined for d >= 3; 2-D caps are arcs")
    eps = theta / gamma
    alphas = eps * np.arange(1, gamma + 1)
    sums = np.cumsum(np.sin(alphas) ** (d - 2))
    values = sums / sums[-1]
    values[-1] = 1.0
    return CdfTable(values=values, theta=float(theta), gamma=int(gamma), dimension=int(d))


def inverse_cdf_3d(y: float, theta: float) -> float:
    """Closed-form inverse CDF of the cap polar angle in three dimensions.

    In 3-D the CDF is ``(1 - cos x) / (1 - cos theta)``, which inverts to
    ``arccos(1 - (1 - cos theta) * y)``.
    """
    if not 0.0 <= y <= 1.0:
        raise InvalidProbability(f"probability must lie in [0, 1], got {y}")
    return math.acos(1.0 - (1.0 - math.cos(theta)) * y)


def _normal_directions(d: int, rng: RngStream, count: int) -> np.ndarray:
    """``count`` uniform unit vectors in R^d via normalized normal draws."""
    out = rng.normal(size=(count, d))
    norms = np.linalg.norm(out, axis=1)
    # An all-zero draw has probability zero; redraw those rows so the
    # sampler never fails.
    while np.any(norms == 0.0):
        bad = norms == 0.0
        out[bad] = rng.normal(size=(int(bad.sum()), d))
        norms = np.linalg.norm(out, axis=1)
    return out / norms[:, None]


def sample_sphere(d: int, rng: RngStream, nonnegative: bool = False) -> np.ndarray:
    """One uniform sample from the surface of the unit d-sphere.

    ``nonnegative`` folds the sample into the non-negative orthant by taking
    coordinate-wise absolute values, which preserves uniformity within the
    orthant by symmetry.
    """
    if d < 2:
        raise DimensionMismatch(f"dimension must be >= 2, got {d}")
    w = _normal_directions(d, rng, 1)[0]
    return np.abs(w) if nonnegative else w


def sample_sphere_batch(
    d: int, rng: RngStream, count: int, nonnegative: bool = False
) -> np.ndarray:
    """``count`` independent :func:`sample_sphere` draws as a (count, d) array."""
    if d < 2:
        raise DimensionMismatch(f"dimension must be >= 2, got {d}")
    out = _normal_directions(d, rng, count)
    return np.abs(out) if nonnegative else out


def sample_sphere_by_angles(d: int, rng: RngStream, count: int | None = None) -> np.ndarray:
    """Biased sphere sampling: draw the d-1 polar angles uniformly.

    Kept only as a negative control; for d >= 3 the induced surface density
    is proportional to the reciprocal of the sine factors, so samples pile
    up near the poles instead of spreading uniformly. Pass ``count`` for a
    (count, d) batch.
    """
    if d < 2:
        raise DimensionMismatch(f"dimension must be >= 2, got {d}")
    m = 1 if count is None else count
    angles = np.empty((m, d - 1))
    angles[:, 0] = rng.uniform(-math.pi, math.pi, size=m)
    if d > 2:
        angles[:, 1:] = rng.uniform(0.0, math.pi, size=(m, d - 2))
    sines = np.sin(angles)
    suffix = np.ones((m, d))
    suffix[:, :-1] = np.cumprod(sines[:, ::-1], axis=1)[:, ::-1]
    coords = np.empty((m, d))
    coords[:, 0] = suffix[:, 0]
    coords[:, 1:] = np.cos(angles) * suffix[:, 1:]
    return coords[0] if count is None else coords


def _check_table(roi: RegionOfInterest, table: CdfTable | None) -> CdfTable:
    if table is None:
        raise DimensionMismatch(
            f"a CDF table is required for dimension {roi.dimension} cap sampling"
        )
    if table.dimension != roi.dimension:
        raise DimensionMismatch(
            f"table built for dimension {table.dimension}, region has {roi.dimension}"
        )
    if not math.isclose(table.theta, roi.theta, rel_tol=1e-12, abs_tol=0.0):
        raise DimensionMismatch(
            f"table built for theta={table.theta}, region has theta={roi.theta}"
        )
    return table


def sample_cap(
    roi: RegionOfInterest, table: CdfTable | None, rng: RngStream
) -> np.ndarray:
    """One uniform sample from the spherical cap of ``roi``.

    Draw order per sample: the CDF probe y, the within-partition noise, then
    the d-1 normals for the cross-section direction. In 2-D the cap is an
    arc and is sampled directly as a uniform angle offset in [-theta, theta].
    """
    return sample_cap_batch(roi, table, rng, 1)[0]


def sample_cap_batch(
    roi: RegionOfInterest, table: CdfTable | None, rng: RngStream, count: int
) -> np.ndarray:
    """``count`` independent cap samples as a (count, d) array."""
    d = roi.dimension
    if d == 2:
        phis = roi.rho[0] + rng.uniform(-roi.theta, roi.theta, size=count)
        return np.column_stack((np.sin(phis), np.cos(phis)))
    table = _check_table(roi, table)
    eps = table.epsilon
    ys = rng.uniform(0.0, 1.0, size=count)
    idx = np.searchsorted(table.values, ys, side="left")
    polar = idx * eps + rng.uniform(0.0, eps, size=count)
    cross = _normal_directions(d - 1, rng, count)
    local = np.empty((count, d))
    local[:, :-1] = np.sin(polar)[:, None] * cross
    local[:, -1] = np.cos(polar)
    return local @ roi.rotation.T


def sample_cap_rejection(
    roi: RegionOfInterest, rng: RngStream, max_tries: int = 1000
) -> np.ndarray:
    """Cap sampling by acceptance-rejection from the full-sphere sampler.

    Efficient only when the cap is a sizable fraction of the sphere; the
    expected number of tries is the reciprocal of that fraction. When the
    budget runs out, ``RegionTooSmall`` tells the caller to switch to the
    inverse-CDF sampler.
    """
    if max_tries < 1:
        raise ValueError(f"max_tries must be >= 1, got {max_tries}")
    center = roi.center
    cos_theta = math.cos(roi.theta)
    for _ in range(max_tries):
        w = sample_sphere(roi.dimension, rng)
        if float(w @ center) >= cos_theta:
            return w
    raise RegionTooSmall(
        f"no sample within cos-similarity {cos_theta:.6f} of the reference ray "
        f"after {max_tries} tries; use the inverse-CDF sampler"
    )
