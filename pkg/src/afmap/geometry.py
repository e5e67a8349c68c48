"""Core geometric types and the point-to-segment projection primitive.

Coordinates follow the image convention: origin at the top-left, ``x``
rightward, ``y`` downward, pixel centres on integer coordinates.  Segment
endpoints are real valued (sub-pixel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .exceptions import InvalidSegmentError, LatticeError


class Point2(NamedTuple):
    x: float
    y: float


class Projection(NamedTuple):
    """Result of projecting a point onto a segment.

    ``point = start + t_star * (end - start)`` and ``sq_dist`` is the
    squared distance between the query point and ``point``.
    """

    t_star: float
    point: Point2
    sq_dist: float


@dataclass(frozen=True)
class LineSegment:
    start: Point2
    end: Point2

    def __post_init__(self):
        object.__setattr__(self, "start", Point2(float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", Point2(float(self.end[0]), float(self.end[1])))
        coords = (*self.start, *self.end)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidSegmentError(f"non-finite endpoint in {coords}")
        dx, dy = self.end.x - self.start.x, self.end.y - self.start.y
        if dx * dx + dy * dy == 0:
            raise InvalidSegmentError(f"zero-length segment at {tuple(self.start)}")

    @property
    def length(self) -> float:
        return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.start.x, self.start.y, self.end.x, self.end.y)


@dataclass(frozen=True)
class ImageLattice:
    width: int
    height: int

    def __post_init__(self):
        for name in ("width", "height"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise LatticeError(f"lattice {name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(height, width)`` of a row-major grid on this lattice."""
        return (self.height, self.width)

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True, eq=False)
class LineSegmentMap:
    """A lattice plus an ordered set of segments.

    Segments are held as an ``(n, 4)`` float64 array of ``x1, y1, x2, y2``
    rows; :attr:`segments` exposes them as :class:`LineSegment` objects.
    An empty map is valid for storage but rejected by the encoder.
    """

    lattice: ImageLattice
    coords: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64).reshape(-1, 4)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        validate_segment_coords(coords, self.lattice)

    @classmethod
    def from_segments(cls, lattice: ImageLattice, segments: Iterable) -> "LineSegmentMap":
        rows = []
        for seg in segments:
            if isinstance(seg, LineSegment):
                rows.append(seg.as_tuple())
            else:
                rows.append(tuple(float(v) for v in np.ravel(seg)))
        return cls(lattice, np.array(rows, dtype=np.float64).reshape(-1, 4))

    @property
    def segments(self) -> list[LineSegment]:
        return [LineSegment((r[0], r[1]), (r[2], r[3])) for r in self.coords.tolist()]

    def __len__(self) -> int:
        return len(self.coords)

    def __eq__(self, other):
        if not isinstance(other, LineSegmentMap):
            return NotImplemented
        return self.lattice == other.lattice and np.array_equal(self.coords, other.coords)

    def __repr__(self):
        return f"LineSegmentMap({self.lattice.width}x{self.lattice.height}, n={len(self)})"


def validate_segment_coords(coords: np.ndarray, lattice: ImageLattice) -> None:
    """Raise :class:`InvalidSegmentError` naming the first offending row."""
    if coords.size == 0:
        return
    finite = np.isfinite(coords).all(axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        d = coords[:, 2:] - coords[:, :2]
        # Squared length underflowing to zero would divide by zero downstream.
        degenerate = (d * d).sum(axis=1) == 0
    xs, ys = coords[:, [0, 2]], coords[:, [1, 3]]
    inside = ((xs >= 0) & (xs <= lattice.width) & (ys >= 0) & (ys <= lattice.height)).all(axis=1)
    for i in range(len(coords)):
        if not finite[i]:
            raise InvalidSegmentError(f"segment {i} has non-finite coordinates")
        if degenerate[i]:
            raise InvalidSegmentError(f"segment {i} has zero length")
        if not inside[i]:
            raise InvalidSegmentError(
                f"segment {i} endpoint outside [0, {lattice.width}] x [0, {lattice.height}]"
            )


def project_point_to_segment(p, segment: LineSegment) -> Projection:
    """Closest point of ``segment`` to ``p``.

    The unconstrained line parameter is clamped into ``[0, 1]`` so points
    beyond either end snap to the nearer endpoint.
    """
    if not isinstance(segment, LineSegment):
        segment = LineSegment(*segment)
    px, py = float(p[0]), float(p[1])
    x1, y1 = segment.start
    dx = segment.end.x - x1
    dy = segment.end.y - y1
    # Keep the operation order identical to project_grid so both are bit-exact.
    t = ((px - x1) * dx + (py - y1) * dy) / (dx * dx + dy * dy)
    t = min(max(t, 0.0), 1.0)
    qx = x1 + t * dx
    qy = y1 + t * dy
    ax = qx - px
    ay = qy - py
    return Projection(t, Point2(qx, qy), ax * ax + ay * ay)


def attraction_vector(p, segment: LineSegment) -> Point2:
    """Displacement ``p' - p`` from ``p`` to its projection on ``segment``."""
    proj = project_point_to_segment(p, segment)
    return Point2(proj.point.x - float(p[0]), proj.point.y - float(p[1]))


def project_grid(px: np.ndarray, py: np.ndarray, x1, y1, x2, y2):
    """Vectorised :func:`project_point_to_segment` over arrays of points.

    Returns ``(ax, ay, sq_dist)`` arrays broadcast against ``px``/``py``.
    """
    dx = x2 - x1
    dy = y2 - y1
    if dx * dx + dy * dy == 0:
        raise InvalidSegmentError("zero-length segment")
    t = ((px - x1) * dx + (py - y1) * dy) / (dx * dx + dy * dy)
    np.clip(t, 0.0, 1.0, out=t)
    ax = (x1 + t * dx) - px
    ay = (y1 + t * dy) - py
    return ax, ay, ax * ax + ay * ay
