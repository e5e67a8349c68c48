"""Encode a segment map into its region-partition and attraction field maps."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyMapError, LatticeError, StateError
from .geometry import ImageLattice, LineSegmentMap, project_grid


class FieldState(enum.Enum):
    RAW = "raw"
    SIZE_NORMALIZED = "size_normalized"
    STRETCHED = "stretched"


@dataclass(frozen=True, eq=False)
class RegionPartitionMap:
    """Per-pixel index of the nearest segment, shape ``(height, width)``."""

    lattice: ImageLattice
    region_index: np.ndarray

    def __post_init__(self):
        if self.region_index.shape != self.lattice.shape:
            raise LatticeError(
                f"region grid {self.region_index.shape} does not match lattice {self.lattice.shape}"
            )

    def region_sizes(self, n_segments: int) -> np.ndarray:
        return np.bincount(self.region_index.ravel(), minlength=n_segments)


@dataclass(frozen=True, eq=False)
class AttractionFieldMap:
    """Per-pixel 2D vectors on a lattice, array shape ``(height, width, 2)``.

    ``vectors[y, x] = (a_x, a_y)``.  The dtype is preserved (float64 from
    the encoder, float32 when read back from disk).
    """

    lattice: ImageLattice
    vectors: np.ndarray
    state: FieldState = FieldState.RAW

    def __post_init__(self):
        vectors = np.asarray(self.vectors)
        if vectors.dtype not in (np.float32, np.float64):
            vectors = vectors.astype(np.float64)
        expected = (*self.lattice.shape, 2)
        if vectors.shape != expected:
            raise LatticeError(f"vector grid {vectors.shape} does not match lattice {expected}")
        if not np.isfinite(vectors).all():
            raise StateError("attraction field contains non-finite components")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "state", FieldState(self.state))

    @property
    def ax(self) -> np.ndarray:
        return self.vectors[..., 0]

    @property
    def ay(self) -> np.ndarray:
        return self.vectors[..., 1]

    def with_vectors(self, vectors: np.ndarray, state: FieldState) -> "AttractionFieldMap":
        return AttractionFieldMap(self.lattice, vectors, state)

    def __eq__(self, other):
        if not isinstance(other, AttractionFieldMap):
            return NotImplemented
        return (
            self.lattice == other.lattice
            and self.state is other.state
            and self.vectors.dtype == other.vectors.dtype
            and np.array_equal(self.vectors, other.vectors)
        )

    def __repr__(self):
        return (
            f"AttractionFieldMap({self.lattice.width}x{self.lattice.height}, "
            f"state={self.state.value}, dtype={self.vectors.dtype})"
        )


def _pixel_grid(lattice: ImageLattice):
    ys, xs = np.mgrid[0 : lattice.height, 0 : lattice.width]
    return xs.astype(np.float64), ys.astype(np.float64)


def _nearest_segment_scan(segment_map: LineSegmentMap):
    if len(segment_map) == 0:
        raise EmptyMapError("cannot encode a map with no segments")
    px, py = _pixel_grid(segment_map.lattice)
    best_index = np.zeros(segment_map.lattice.shape, dtype=np.int64)
    best_d = np.full(segment_map.lattice.shape, np.inf)
    best_ax = np.zeros(segment_map.lattice.shape)
    best_ay = np.zeros(segment_map.lattice.shape)
    for i, (x1, y1, x2, y2) in enumerate(segment_map.coords.tolist()):
        ax, ay, d = project_grid(px, py, x1, y1, x2, y2)
        # Strict comparison: equidistant pixels keep the lower index.
        closer = d < best_d
        best_index[closer] = i
        best_d[closer] = d[closer]
        best_ax[closer] = ax[closer]
        best_ay[closer] = ay[closer]
    return best_index, best_ax, best_ay


def compute_region_partition(segment_map: LineSegmentMap) -> RegionPartitionMap:
    """Assign every pixel to its nearest segment (lowest index on ties)."""
    index, _, _ = _nearest_segment_scan(segment_map)
    return RegionPartitionMap(segment_map.lattice, index)


def compute_attraction_field(segment_map: LineSegmentMap):
    """Return ``(afm, partition)`` for ``segment_map``.

    Each pixel stores the vector from itself to its projection on the
    segment of its partition region.  The field is in the raw state.
    """
    index, ax, ay = _nearest_segment_scan(segment_map)
    afm = AttractionFieldMap(segment_map.lattice, np.stack([ax, ay], axis=-1), FieldState.RAW)
    return afm, RegionPartitionMap(segment_map.lattice, index)
