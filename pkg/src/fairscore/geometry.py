"""Coordinate conversions, dual-space transforms, and d-dimensional rotation.

Polar convention used throughout the toolkit: a direction in R^d is written
as d-1 angles ``(phi_1, ..., phi_{d-1})`` where the LAST angle is the polar
angle measured from the d-th axis and the remaining angles describe the
direction of the prefix ``(x_1, ..., x_{d-1})`` recursively:

    x_d            = r * cos(phi_{d-1})
    (x_1..x_{d-1}) = r * sin(phi_{d-1}) * cartesian(1, (phi_1..phi_{d-2}))

The base case is one dimension with no angles, so in 2D a single angle
``phi`` gives ``(sin phi, cos phi)``. The first angle is an azimuth in
(-pi, pi]; all later angles lie in [0, pi]. With this convention, appending
a polar angle to the angles of a (d-1)-dimensional direction is exactly the
"lift onto the d-sphere" operation the cap sampler needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateVector, DimensionMismatch, InvalidPlane, InvalidRadius

__all__ = [
    "Hyperplane",
    "RotationPlan",
    "angular_distance",
    "dual_hyperplane",
    "rotate",
    "rotation_matrix",
    "to_cartesian",
    "to_polar",
    "unit",
]


def _as_vector(w, name: str = "vector") -> np.ndarray:
    v = np.asarray(w, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DimensionMismatch(f"{name} must be a 1-D array of length >= 2, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DegenerateVector(f"{name} has non-finite coordinates")
    return v


def unit(w) -> np.ndarray:
    """Return ``w`` scaled to unit Euclidean norm."""
    v = _as_vector(w)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DegenerateVector("cannot normalize the zero vector")
    return v / n


def to_polar(w) -> tuple[float, np.ndarray]:
    """Convert a vector to ``(radius, angles)`` under the module convention.

    Angles whose defining prefix is exactly the zero vector are undefined;
    they are canonicalized to pi/2, the value that makes the rotation plan
    for the d-th axis itself the identity map.
    """
    v = _as_vector(w)
    d = v.size
    norms = np.sqrt(np.cumsum(v * v))
    radius = float(norms[-1])
    if radius == 0.0:
        raise DegenerateVector("zero vector has no polar representation")
    angles = np.full(d - 1, math.pi / 2)
    for k in range(d - 1, 1, -1):
        if norms[k] > 0.0:
            angles[k - 1] = math.acos(min(1.0, max(-1.0, v[k] / norms[k])))
    if norms[1] > 0.0:
        angles[0] = math.atan2(v[0], v[1])
    return radius, angles


def to_cartesian(radius: float, angles) -> np.ndarray:
    """Convert ``(radius, angles)`` back to a vector of dimension ``len(angles)+1``."""
    if radius < 0:
        raise InvalidRadius(f"radius must be non-negative, got {radius}")
    a = np.atleast_1d(np.asarray(angles, dtype=float))
    if a.size < 1:
        raise DimensionMismatch("need at least one angle (dimension >= 2)")
    s = np.sin(a)
    c = np.cos(a)
    # suffix[j] = prod of sines from angle j onward; the first coordinate
    # collects every sine, coordinate j+1 gets cos(a_j) times the later sines.
    suffix = np.empty(a.size + 1)
    suffix[-1] = 1.0
    suffix[:-1] = np.cumprod(s[::-1])[::-1]
    coords = np.empty(a.size + 1)
    coords[0] = radius * suffix[0]
    coords[1:] = radius * c * suffix[1:]
    return coords


def angular_distance(w, w2) -> float:
    """Angle in [0, pi] between two non-zero vectors."""
    a = _as_vector(w)
    b = _as_vector(w2, "second vector")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateVector("angular distance undefined for the zero vector")
    cos_sim = float(np.dot(a, b) / (na * nb))
    return math.acos(min(1.0, max(-1.0, cos_sim)))


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane ``coeffs . x = offset``.

    Ordering-exchange hyperplanes pass through the origin (offset 0); dual
    hyperplanes of tuples have offset 1. ``label`` optionally names the pair
    of tuple ids that generated an exchange plane.
    """

    coeffs: np.ndarray
    offset: float = 0.0
    label: tuple[str, str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.coeffs.ndim != 1 or not np.any(self.coeffs):
            raise DegenerateVector("hyperplane coefficients must not be all zero")

    @property
    def dimension(self) -> int:
        return self.coeffs.size

    def evaluate(self, points) -> np.ndarray | float:
        """Signed value ``coeffs . p - offset`` for a point or batch of points."""
        return np.asarray(points, dtype=float) @ self.coeffs - self.offset


def dual_hyperplane(scoring_values, label: str | None = None) -> Hyperplane:
    """Dual-space image of a tuple: the hyperplane ``t . x = 1``.

    The intersection of this hyperplane with the origin-anchored ray of a
    unit scoring function w lies at distance ``1 / (t . w)`` from the origin,
    so closer intersections mean higher scores.
    """
    t = _as_vector(scoring_values, "tuple scoring values")
    return Hyperplane(coeffs=t, offset=1.0, label=(label, label) if label else None)


def rotation_matrix(i: int, angle: float, d: int) -> np.ndarray:
    """Counterclockwise rotation of the ``x_1``-``x_{i+1}`` plane in R^d.

    Identity except entries (1,1) and (i+1,i+1) holding cos, (1,i+1) holding
    -sin, and (i+1,1) holding sin, in 1-based notation.
    """
    if d < 2:
        raise InvalidPlane(f"dimension must be >= 2, got {d}")
    if not 1 <= i <= d - 1:
        raise InvalidPlane(f"plane index must satisfy 1 <= i <= {d - 1}, got {i}")
    m = np.eye(d)
    c, s = math.cos(angle), math.sin(angle)
    m[0, 0] = c
    m[i, i] = c
    m[0, i] = -s
    m[i, 0] = s
    return m


@dataclass(frozen=True)
class RotationPlan:
    """Ordered sequence of plane rotations taking the d-th axis onto a ray.

    Each step ``(i, angle)`` rotates the ``x_1``-``x_{i+1}`` plane
    counterclockwise by ``angle``; steps are applied in list order. The
    composed map is orthogonal, so norms and pairwise angles are preserved.
    """

    dimension: int
    steps: tuple[tuple[int, float], ...] = field(default_factory=tuple)

    @classmethod
    def from_ray(cls, rho) -> "RotationPlan":
        """Plan whose composed rotation maps ``e_d`` to ``to_cartesian(1, rho)``.

        Working down from the last plane: the ``x_1``-``x_d`` rotation opens
        the polar angle (clockwise, hence the negation), then each earlier
        plane distributes the accumulated ``x_1`` component; those angles are
        complemented so that sin/cos land on the convention of
        :func:`to_cartesian`.
        """
        angles = np.atleast_1d(np.asarray(rho, dtype=float))
        d = angles.size + 1
        if d < 2:
            raise DimensionMismatch("a ray needs at least one angle")
        steps = [(d - 1, -float(angles[-1]))]
        for i in range(d - 2, 0, -1):
            steps.append((i, math.pi / 2 - float(angles[i - 1])))
        return cls(dimension=d, steps=tuple(steps))

    def apply(self, w) -> np.ndarray:
        v = _as_vector(w).copy()
        if v.size != self.dimension:
            raise DimensionMismatch(
                f"plan is for dimension {self.dimension}, vector has {v.size}"
            )
        for i, ang in self.steps:
            c, s = math.cos(ang), math.sin(ang)
            x0, xi = v[0], v[i]
            v[0] = c * x0 - s * xi
            v[i] = s * x0 + c * xi
        return v

    def apply_inverse(self, w) -> np.ndarray:
        v = _as_vector(w).copy()
        if v.size != self.dimension:
            raise DimensionMismatch(
                f"plan is for dimension {self.dimension}, vector has {v.size}"
            )
        for i, ang in reversed(self.steps):
            c, s = math.cos(-ang), math.sin(-ang)
            x0, xi = v[0], v[i]
            v[0] = c * x0 - s * xi
            v[i] = s * x0 + c * xi
        return v

    def matrix(self) -> np.ndarray:
        """Single d x d matrix equal to the composed plan (fast path for batches)."""
        m = np.eye(self.dimension)
        for i, ang in self.steps:
            m = rotation_matrix(i, ang, self.dimension) @ m
        return m


def rotate(w, rho) -> np.ndarray:
    """Rotate ``w`` by the plan that carries the d-th axis onto the ray ``rho``."""
    return RotationPlan.from_ray(rho).apply(w)
