"""scikit-learn compatible wrappers.

These let the encoder, the learning transforms and the squeeze decoder sit
in a :class:`sklearn.pipeline.Pipeline` and expose ``get_params`` /
``set_params`` for grid searches.  Every method accepts either a single
map or a sequence of maps and returns the same arity.

>>> from sklearn.pipeline import make_pipeline
>>> detector = make_pipeline(AFMReverser(), SqueezeDecoder(aspect_ratio_max=0.2))
>>> # segments = detector.predict(predicted_afms)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import transforms
from .codec import FieldState, compute_attraction_field
from .metrics import evaluate
from .squeeze import SqueezeParams, squeeze, validate_squeeze_params
from .validation import as_batch, check_afm, check_segment_map


def _unbatch(items, single):
    return items[0] if single else items


class AttractionFieldEncoder(TransformerMixin, BaseEstimator):
    """Segment maps to raw attraction field maps."""

    def __init__(self, return_partition=False):
        self.return_partition = return_partition

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        items, single = as_batch(X)
        out = []
        for item in items:
            afm, partition = compute_attraction_field(check_segment_map(item))
            out.append((afm, partition) if self.return_partition else afm)
        return _unbatch(out, single)


class AFMNormalizer(TransformerMixin, BaseEstimator):
    """Raw field to the learning representation, with an exact inverse."""

    def __init__(self, stretch=True):
        self.stretch = stretch

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        items, single = as_batch(X)
        out = [transforms.forward(check_afm(a, FieldState.RAW), stretched=self.stretch) for a in items]
        return _unbatch(out, single)

    def inverse_transform(self, X):
        items, single = as_batch(X)
        out = [transforms.reverse(check_afm(a)) for a in items]
        return _unbatch(out, single)


class AFMReverser(TransformerMixin, BaseEstimator):
    """Undo whatever transforms a (predicted) field carries, yielding raw pixels."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        items, single = as_batch(X)
        return _unbatch([transforms.reverse(check_afm(a)) for a in items], single)


class SqueezeDecoder(BaseEstimator):
    """Raw attraction field maps to segment maps via the squeeze algorithm."""

    def __init__(
        self,
        window_radius=1,
        angular_threshold_deg=10.0,
        aspect_ratio_max=0.2,
        min_support=2,
        random_state=None,
        seed_retirement="cell",
    ):
        self.window_radius = window_radius
        self.angular_threshold_deg = angular_threshold_deg
        self.aspect_ratio_max = aspect_ratio_max
        self.min_support = min_support
        self.random_state = random_state
        self.seed_retirement = seed_retirement

    def _params(self) -> SqueezeParams:
        return SqueezeParams(
            window_radius=self.window_radius,
            angular_threshold_deg=self.angular_threshold_deg,
            aspect_ratio_max=self.aspect_ratio_max,
            min_support=self.min_support,
            rng_seed=self.random_state,
            seed_retirement=self.seed_retirement,
        )

    def fit(self, X=None, y=None):
        validate_squeeze_params(
            self.window_radius, self.angular_threshold_deg, self.aspect_ratio_max, self.min_support
        )
        self.params_ = self._params()
        return self

    def predict(self, X):
        params = self._params()
        items, single = as_batch(X)
        out = []
        for afm in items:
            result = squeeze(check_afm(afm, FieldState.RAW), params)
            out.append(result.segments)
        return _unbatch(out, single)

    def transform(self, X):
        return self.predict(X)

    def score(self, X, y, rel_tolerance=0.01):
        """Mean F-measure of the decoded maps against ground-truth maps ``y``."""
        detected, _ = as_batch(self.predict(X))
        gts, _ = as_batch(y)
        if len(detected) != len(gts):
            raise ValueError(f"{len(detected)} fields but {len(gts)} ground-truth maps")
        return float(np.mean([evaluate(d, check_segment_map(g), rel_tolerance).f_measure for d, g in zip(detected, gts)]))
