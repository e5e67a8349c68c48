"""Size normalisation and value stretching of attraction field maps.

The legal state path is ``raw -> size_normalized -> stretched`` and its
exact reverse.  :func:`reverse` undoes whatever has been applied, which is
how predicted fields are brought back to pixel units before squeezing.
"""

from __future__ import annotations

import logging

import numpy as np

from .codec import AttractionFieldMap, FieldState
from .exceptions import StateError

logger = logging.getLogger(__name__)

EPS = 1e-6
# Largest magnitude for which -log(|z| + EPS) stays strictly positive.
_Z_LIMIT = 1.0 - 2 * EPS


def _require(afm: AttractionFieldMap, state: FieldState, op: str) -> None:
    if not isinstance(afm, AttractionFieldMap):
        raise TypeError(f"{op} expects an AttractionFieldMap, got {type(afm).__name__}")
    if afm.state is not state:
        raise StateError(f"{op} needs a {state.value} field, got {afm.state.value}")


def _scale(afm: AttractionFieldMap) -> np.ndarray:
    return np.array([afm.lattice.width, afm.lattice.height], dtype=afm.vectors.dtype)


def size_normalize(afm: AttractionFieldMap) -> AttractionFieldMap:
    _require(afm, FieldState.RAW, "size_normalize")
    return afm.with_vectors(afm.vectors / _scale(afm), FieldState.SIZE_NORMALIZED)


def size_denormalize(afm: AttractionFieldMap) -> AttractionFieldMap:
    _require(afm, FieldState.SIZE_NORMALIZED, "size_denormalize")
    return afm.with_vectors(afm.vectors * _scale(afm), FieldState.RAW)


def stretch_values(z: np.ndarray) -> tuple[np.ndarray, int]:
    """Signed log stretch of an array; returns ``(stretched, n_clamped)``.

    ``sign(0) = 0`` so zero maps to zero.  Magnitudes above ``1 - 2*EPS``
    are clamped first, otherwise the sign of the output would flip.
    """
    z = np.asarray(z)
    mag = np.abs(z)
    over = mag > _Z_LIMIT
    n_clamped = int(np.count_nonzero(over))
    if n_clamped:
        mag = np.where(over, _Z_LIMIT, mag)
    out = -np.sign(z) * np.log(mag + EPS)
    return out.astype(z.dtype, copy=False), n_clamped


def unstretch_values(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    return (np.sign(z) * np.exp(-np.abs(z))).astype(z.dtype, copy=False)


def stretch(afm: AttractionFieldMap, return_clamped: bool = False):
    """Apply the signed log stretch to a size-normalised field.

    With ``return_clamped=True`` the number of clamped components is
    returned alongside the new field.
    """
    _require(afm, FieldState.SIZE_NORMALIZED, "stretch")
    values, n_clamped = stretch_values(afm.vectors)
    if n_clamped:
        logger.warning("stretch clamped %d component(s) to |z| = 1 - 2e-6", n_clamped)
    out = afm.with_vectors(values, FieldState.STRETCHED)
    return (out, n_clamped) if return_clamped else out


def unstretch(afm: AttractionFieldMap) -> AttractionFieldMap:
    _require(afm, FieldState.STRETCHED, "unstretch")
    return afm.with_vectors(unstretch_values(afm.vectors), FieldState.SIZE_NORMALIZED)


def forward(afm: AttractionFieldMap, stretched: bool = True) -> AttractionFieldMap:
    """Raw field to the learning representation (normalised, optionally stretched)."""
    out = size_normalize(afm)
    return stretch(out) if stretched else out


def reverse(afm: AttractionFieldMap) -> AttractionFieldMap:
    """Undo every applied transform, returning a raw pixel-unit field."""
    if afm.state is FieldState.STRETCHED:
        afm = unstretch(afm)
    if afm.state is FieldState.SIZE_NORMALIZED:
        afm = size_denormalize(afm)
    return afm
