"""Decode an attraction field map back into line segments.

Every pixel ``p`` is moved along its attraction vector to ``v(p) = p + a(p)``
and filed under the lattice cell ``floor(v(p) + 0.5)``.  Segments are then
grown greedily from seed records: records whose tangent direction agrees
with the growing group (modulo 180 degrees) are absorbed from a small
window around the two extreme cells of the group until nothing more can
be added.  A grown group is kept only if the rectangle around its
projection points is thin enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .codec import AttractionFieldMap, FieldState
from .exceptions import DomainError, LatticeError, StateError
from .geometry import ImageLattice, LineSegmentMap

ZERO_VECTOR_NORM = 1e-6

ACTIVE, USED, DISCARDED = 0, 1, 2


@dataclass(frozen=True)
class SqueezeParams:
    window_radius: int = 1
    angular_threshold_deg: float = 10.0
    aspect_ratio_max: float = 0.2
    min_support: int = 2
    rng_seed: Optional[int] = None
    # "cell": a failed verification stops seeding from that cell.
    # "record": only the seed record is retired (quadratic on endpoint cells).
    seed_retirement: str = "cell"

    def __post_init__(self):
        validate_squeeze_params(
            self.window_radius, self.angular_threshold_deg, self.aspect_ratio_max, self.min_support
        )
        if self.seed_retirement not in ("cell", "record"):
            raise DomainError(f"seed_retirement must be 'cell' or 'record', got {self.seed_retirement!r}")


def validate_squeeze_params(window_radius, angular_threshold_deg, aspect_ratio_max, min_support):
    if isinstance(window_radius, bool) or int(window_radius) != window_radius or window_radius < 1:
        raise DomainError(f"window_radius must be an integer >= 1, got {window_radius!r}")
    if not (0 < angular_threshold_deg <= 90):
        raise DomainError(f"angular_threshold_deg must lie in (0, 90], got {angular_threshold_deg!r}")
    if not (0 < aspect_ratio_max <= 1):
        raise DomainError(f"aspect_ratio_max must lie in (0, 1], got {aspect_ratio_max!r}")
    if isinstance(min_support, bool) or int(min_support) != min_support or min_support < 2:
        raise DomainError(f"min_support must be an integer >= 2, got {min_support!r}")


class AttractionRecord(NamedTuple):
    source: tuple[int, int]
    vector: tuple[float, float]
    projection: tuple[float, float]
    used: bool = False
    discarded_as_seed: bool = False


@dataclass(frozen=True, eq=False)
class LineProposalMap:
    """Records grouped by the lattice cell their projection rounds to.

    Flat arrays are sorted by row-major cell id; within a cell records keep
    the row-major order of their source pixels.  ``offsets[c]:offsets[c+1]``
    delimits the records of cell ``c = y * width + x``.
    """

    lattice: ImageLattice
    source: np.ndarray  # (N, 2) int64, (x, y)
    vector: np.ndarray  # (N, 2) float64
    projection: np.ndarray  # (N, 2) float64
    cell: np.ndarray  # (N,) int64 row-major cell id
    offsets: np.ndarray  # (W*H + 1,) int64

    def __len__(self):
        return len(self.cell)

    def cell_records(self, x: int, y: int) -> list[AttractionRecord]:
        c = y * self.lattice.width + x
        return [
            AttractionRecord(
                tuple(self.source[i].tolist()),
                tuple(self.vector[i].tolist()),
                tuple(self.projection[i].tolist()),
            )
            for i in range(self.offsets[c], self.offsets[c + 1])
        ]

    def nonempty_cells(self) -> np.ndarray:
        """Row-major ids of cells holding at least one record."""
        return np.flatnonzero(np.diff(self.offsets))


@dataclass(eq=False)
class SqueezeOutput:
    segments: LineSegmentMap
    support_sizes: np.ndarray
    rejected_seed_count: int
    # Diagnostics: record indices (into ``proposals``) of each support, and
    # the group direction in radians at the moment each record joined.
    supports: list = field(default_factory=list, repr=False)
    absorb_directions: list = field(default_factory=list, repr=False)
    proposals: Optional[LineProposalMap] = field(default=None, repr=False)


def build_line_proposal_map(afm: AttractionFieldMap) -> LineProposalMap:
    if afm.state is not FieldState.RAW:
        raise StateError(f"proposal map needs a raw field, got {afm.state.value}")
    lattice = afm.lattice
    w, h = lattice.width, lattice.height
    ys, xs = np.mgrid[0:h, 0:w]
    source = np.stack([xs.ravel(), ys.ravel()], axis=1).astype(np.int64)
    vector = afm.vectors.reshape(-1, 2).astype(np.float64)
    projection = source + vector
    target = np.floor(projection + 0.5).astype(np.int64)
    inside = (target[:, 0] >= 0) & (target[:, 0] < w) & (target[:, 1] >= 0) & (target[:, 1] < h)
    source, vector, projection, target = source[inside], vector[inside], projection[inside], target[inside]
    cell = target[:, 1] * w + target[:, 0]
    order = np.argsort(cell, kind="stable")
    cell = cell[order]
    offsets = np.zeros(w * h + 1, dtype=np.int64)
    np.cumsum(np.bincount(cell, minlength=w * h), out=offsets[1:])
    return LineProposalMap(lattice, source[order], vector[order], projection[order], cell, offsets)


def _angle_gap(phi: np.ndarray, theta: float) -> np.ndarray:
    """Angular distance between undirected directions, in [0, pi/2]."""
    d = np.abs(phi - theta) % math.pi
    return np.minimum(d, math.pi - d)


class _Grouper:
    """Mutable state of one squeeze run over a proposal map."""

    def __init__(self, proposals: LineProposalMap, params: SqueezeParams):
        self.p = proposals
        self.params = params
        self.w = proposals.lattice.width
        self.h = proposals.lattice.height
        self.r = int(params.window_radius)
        self.tau = math.radians(params.angular_threshold_deg)
        vec = proposals.vector
        norm = np.hypot(vec[:, 0], vec[:, 1])
        self.zero = norm < ZERO_VECTOR_NORM
        # Tangent = attraction direction rotated by 90 degrees, folded to [0, pi).
        self.phi = np.mod(np.arctan2(vec[:, 1], vec[:, 0]) + math.pi / 2, math.pi)
        self.c2 = np.where(self.zero, 0.0, np.cos(2 * self.phi))
        self.s2 = np.where(self.zero, 0.0, np.sin(2 * self.phi))
        self.px = proposals.projection[:, 0]
        self.py = proposals.projection[:, 1]
        self.cell = proposals.cell
        self.offsets = proposals.offsets.tolist()
        self.status = np.zeros(len(proposals), dtype=np.int8)
        self.free = np.ones(len(proposals), dtype=bool)

    def scan(self, c: int, theta: float):
        """Free records aligned with ``theta`` in the window around cell ``c``.

        Returns ``(hits, gap)`` where ``hits`` is a list of index arrays and
        ``gap`` the smallest angular distance among free records that were
        not aligned (inf if there are none).
        """
        cy, cx = divmod(c, self.w)
        r, w, off = self.r, self.w, self.offsets
        x0, x1 = max(0, cx - r), min(w, cx + r + 1)
        hits = []
        gap = math.inf
        for yy in range(max(0, cy - r), min(self.h, cy + r + 1)):
            base = yy * w
            a, b = off[base + x0], off[base + x1]
            if a == b:
                continue
            idx = np.flatnonzero(self.free[a:b]) + a
            if not idx.size:
                continue
            d = _angle_gap(self.phi[idx], theta)
            ok = (d < self.tau) | self.zero[idx]
            if ok.all():
                hits.append(idx)
                continue
            if ok.any():
                hits.append(idx[ok])
            gap = min(gap, float(d[~ok].min()))
        return hits, gap

    def _scan_end(self, c: int, theta: float, cache: dict):
        # The free set only shrinks during a growth, and rotating the group
        # by delta moves every angular gap by at most delta, so an end that
        # failed before cannot succeed while gap - delta >= tau.
        prev = cache.get("cell")
        if prev == c:
            delta = abs(theta - cache["theta"]) % math.pi
            delta = min(delta, math.pi - delta)
            if cache["gap"] - delta >= self.tau:
                return []
        hits, gap = self.scan(c, theta)
        if hits:
            cache.clear()
        else:
            cache.update(cell=c, theta=theta, gap=gap)
        return hits

    def grow(self, seed: int):
        """Grow a group from ``seed``; returns (members, directions, theta) or None."""
        theta = float(self.phi[seed])
        self.free[seed] = False
        hits, _ = self.scan(int(self.cell[seed]), theta)
        if not hits:
            return None
        members = _Buffer(self.px, self.py)
        members.add(np.array([seed]))
        directions = [np.array([theta])]
        sum_c = float(self.c2[seed])
        sum_s = float(self.s2[seed])
        new = np.concatenate(hits)
        lo_cache, hi_cache = {}, {}
        while new.size:
            self.free[new] = False
            members.add(new)
            directions.append(np.full(len(new), theta))
            sum_c += float(self.c2[new].sum())
            sum_s += float(self.s2[new].sum())
            if sum_c != 0.0 or sum_s != 0.0:
                theta = (math.atan2(sum_s, sum_c) / 2) % math.pi
            lo, hi = members.extremes(theta)
            lo_cell, hi_cell = int(self.cell[lo]), int(self.cell[hi])
            hits = self._scan_end(lo_cell, theta, lo_cache)
            if hi_cell != lo_cell:
                hits += self._scan_end(hi_cell, theta, hi_cache)
            if len(hits) > 1:
                # Overlapping windows can report a record twice.
                new = np.unique(np.concatenate(hits))
            else:
                new = hits[0] if hits else np.empty(0, dtype=np.int64)
        return members.indices(), np.concatenate(directions), theta

    def fit(self, support: np.ndarray, theta: float):
        """Rectangle aligned with ``theta`` through the centroid of ``support``.

        Returns ``(endpoints, aspect)``; aspect is inf for a zero-length fit.
        """
        pts = np.stack([self.px[support], self.py[support]], axis=1)
        centre = pts.mean(axis=0)
        u = np.array([math.cos(theta), math.sin(theta)])
        n = np.array([-u[1], u[0]])
        rel = pts - centre
        along = rel @ u
        across = rel @ n
        length = float(along.max() - along.min())
        width = float(across.max() - across.min())
        aspect = width / length if length > 0 else math.inf
        ends = (centre + along.min() * u, centre + along.max() * u)
        return ends, aspect


class _Buffer:
    """Append-only record index list with cached projection coordinates."""

    def __init__(self, px: np.ndarray, py: np.ndarray, capacity: int = 256):
        self.px, self.py = px, py
        self.idx = np.empty(capacity, dtype=np.int64)
        self.x = np.empty(capacity)
        self.y = np.empty(capacity)
        self.n = 0

    def add(self, new: np.ndarray) -> None:
        end = self.n + len(new)
        if end > len(self.idx):
            cap = max(end, 2 * len(self.idx))
            for name in ("idx", "x", "y"):
                old = getattr(self, name)
                grown = np.empty(cap, dtype=old.dtype)
                grown[: self.n] = old[: self.n]
                setattr(self, name, grown)
        self.idx[self.n : end] = new
        self.x[self.n : end] = self.px[new]
        self.y[self.n : end] = self.py[new]
        self.n = end

    def extremes(self, theta: float) -> tuple[int, int]:
        """Records with the smallest and largest projection along ``theta``."""
        along = self.x[: self.n] * math.cos(theta) + self.y[: self.n] * math.sin(theta)
        return int(self.idx[np.argmin(along)]), int(self.idx[np.argmax(along)])

    def indices(self) -> np.ndarray:
        return self.idx[: self.n].copy()


def _cell_order(proposals: LineProposalMap, rng_seed) -> np.ndarray:
    cells = proposals.nonempty_cells()
    if rng_seed is not None:
        cells = np.random.default_rng(rng_seed).permutation(cells)
    return cells


def squeeze(afm: AttractionFieldMap, params: Optional[SqueezeParams] = None) -> SqueezeOutput:
    """Recover line segments from a raw attraction field map."""
    params = params or SqueezeParams()
    if afm.state is not FieldState.RAW:
        raise StateError(f"squeeze needs a raw field, got {afm.state.value}; apply transforms.reverse first")
    lattice = afm.lattice
    if lattice.width < 2 or lattice.height < 2:
        raise LatticeError(f"squeeze needs a lattice of at least 2x2, got {lattice.width}x{lattice.height}")
    proposals = build_line_proposal_map(afm)
    g = _Grouper(proposals, params)
    seedable = g.free & ~g.zero
    retire_cell = params.seed_retirement == "cell"

    rows, supports, dirs = [], [], []
    rejected = 0
    for c in _cell_order(proposals, params.rng_seed).tolist():
        a, b = g.offsets[c], g.offsets[c + 1]
        while True:
            candidates = np.flatnonzero(seedable[a:b] & g.free[a:b])
            if not candidates.size:
                break
            seed = int(candidates[0]) + a
            grown = g.grow(seed)
            if grown is None:
                # No aligned neighbour: drop this record, keep the cell.
                g.status[seed] = DISCARDED
                rejected += 1
                continue
            support, directions, theta = grown
            if len(support) >= params.min_support:
                (p0, p1), aspect = g.fit(support, theta)
                if aspect <= params.aspect_ratio_max:
                    row = _clip_row(p0, p1, lattice)
                    if row is not None:
                        g.status[support] = USED
                        rows.append(row)
                        supports.append(support)
                        dirs.append(directions)
                        continue
            g.free[support] = True
            g.free[seed] = False
            g.status[seed] = DISCARDED
            rejected += 1
            if retire_cell:
                break

    segments = LineSegmentMap(lattice, np.array(rows, dtype=np.float64).reshape(-1, 4))
    return SqueezeOutput(
        segments=segments,
        support_sizes=np.array([len(s) for s in supports], dtype=np.int64),
        rejected_seed_count=rejected,
        supports=supports,
        absorb_directions=dirs,
        proposals=proposals,
    )


def _clip_row(p0, p1, lattice: ImageLattice):
    # Projections may round into edge cells from up to half a pixel outside.
    lim = np.array([lattice.width, lattice.height], dtype=np.float64)
    a = np.clip(p0, 0.0, lim)
    b = np.clip(p1, 0.0, lim)
    if a[0] == b[0] and a[1] == b[1]:
        return None
    return (float(a[0]), float(a[1]), float(b[0]), float(b[1]))
