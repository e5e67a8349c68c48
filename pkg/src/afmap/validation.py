"""Input coercion helpers used by the estimator wrappers."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

from .codec import AttractionFieldMap, FieldState
from .exceptions import StateError
from .geometry import ImageLattice, LineSegmentMap


def check_segment_map(X) -> LineSegmentMap:
    """Coerce ``X`` to a :class:`LineSegmentMap`.

    Accepts a map, a JSON-style mapping with ``width``/``height``/``segments``,
    or a ``(lattice, coords)`` pair.
    """
    if isinstance(X, LineSegmentMap):
        return X
    if isinstance(X, Mapping):
        return LineSegmentMap(ImageLattice(X["width"], X["height"]), np.asarray(X["segments"], dtype=float))
    if isinstance(X, tuple) and len(X) == 2:
        lattice, coords = X
        if not isinstance(lattice, ImageLattice):
            lattice = ImageLattice(*lattice)
        return LineSegmentMap(lattice, coords)
    raise TypeError(f"expected a LineSegmentMap, got {type(X).__name__}")


def check_afm(X, state=None) -> AttractionFieldMap:
    if not isinstance(X, AttractionFieldMap):
        raise TypeError(f"expected an AttractionFieldMap, got {type(X).__name__}")
    if state is not None and X.state is not FieldState(state):
        raise StateError(f"expected a {FieldState(state).value} field, got {X.state.value}")
    return X


def _is_single(X) -> bool:
    if isinstance(X, (LineSegmentMap, AttractionFieldMap, Mapping)):
        return True
    # A (lattice, coords) pair is one map, not a batch of two.
    return isinstance(X, tuple) and len(X) == 2 and isinstance(X[0], (ImageLattice, tuple))


def as_batch(X):
    """Return ``(items, single)``: a list of inputs and whether ``X`` was one item."""
    if _is_single(X):
        return [X], True
    if isinstance(X, Sequence) or isinstance(X, np.ndarray):
        return list(X), False
    raise TypeError(f"expected a map or a sequence of maps, got {type(X).__name__}")
