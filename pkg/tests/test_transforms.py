import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afmap import FieldState, ImageLattice, StateError
from afmap.codec import AttractionFieldMap
from afmap.transforms import (
    EPS,
    forward,
    reverse,
    size_denormalize,
    size_normalize,
    stretch,
    stretch_values,
    unstretch,
    unstretch_values,
)

# -log(0.05 + 1e-6), evaluated with mpmath at 30 digits.
S_005 = 2.9957122737539883


def one_pixel(ax, ay, w=320, h=320, state=FieldState.RAW):
    vectors = np.zeros((h, w, 2))
    vectors[0, 0] = (ax, ay)
    return AttractionFieldMap(ImageLattice(w, h), vectors, state)


@pytest.mark.parametrize(
    "a, w, h, expected",
    [((16, -8), 320, 320, (0.05, -0.025)), ((0, 0), 17, 5, (0, 0)), ((17, 5), 17, 5, (1, 1))],
)
def test_size_normalize_examples(a, w, h, expected):
    out = size_normalize(one_pixel(*a, w=w, h=h))
    assert out.state is FieldState.SIZE_NORMALIZED
    assert tuple(out.vectors[0, 0]) == pytest.approx(expected, abs=1e-15)


def test_size_denormalize_examples():
    out = size_denormalize(one_pixel(0.05, -0.025, state=FieldState.SIZE_NORMALIZED))
    assert out.state is FieldState.RAW
    assert tuple(out.vectors[0, 0]) == pytest.approx((16, -8), abs=1e-12)
    out = size_denormalize(one_pixel(0, 0, state=FieldState.SIZE_NORMALIZED))
    assert tuple(out.vectors[0, 0]) == (0, 0)


def test_normalize_round_trip(rng):
    vectors = rng.uniform(-40, 40, (30, 50, 2))
    afm = AttractionFieldMap(ImageLattice(50, 30), vectors)
    back = size_denormalize(size_normalize(afm))
    np.testing.assert_allclose(back.vectors, vectors, rtol=1e-12, atol=0)


def test_stretch_examples():
    z = np.array([0.0, 0.05, -0.05])
    out, clamped = stretch_values(z)
    assert clamped == 0
    assert out[0] == 0.0
    assert out[1] == pytest.approx(S_005, abs=1e-12)
    assert out[2] == -out[1]


def test_unstretch_examples():
    out = unstretch_values(np.array([0.0, 2.99571]))
    assert out[0] == 0.0
    assert out[1] == pytest.approx(0.050001, abs=2e-6)


@settings(max_examples=500, deadline=None)
@given(st.floats(-0.99, 0.99, allow_nan=False))
def test_stretch_round_trip_and_oddness(z):
    s, _ = stretch_values(np.array([z, -z]))
    assert s[1] == -s[0]
    back = unstretch_values(s[:1])[0]
    assert abs(back - z) <= 2 * EPS


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-9, 1 - 2e-6), st.floats(1e-9, 1 - 2e-6))
def test_stretch_is_decreasing_and_positive_on_unit_interval(z1, z2):
    if z1 == z2:
        return
    lo, hi = sorted((z1, z2))
    s, _ = stretch_values(np.array([lo, hi]))
    assert s[0] >= s[1] > 0
    if hi - lo > 1e-9 * (lo + EPS):
        assert s[0] > s[1]


def test_out_of_range_components_are_clamped():
    z = np.array([1.0, -1.5, 0.5])
    out, clamped = stretch_values(z)
    assert clamped == 2
    assert out[0] > 0 and out[1] < 0
    assert out[0] == -out[1]
    afm = one_pixel(1.0, 0.0, w=2, h=2, state=FieldState.SIZE_NORMALIZED)
    _, n = stretch(afm, return_clamped=True)
    assert n == 1


def test_state_machine():
    raw = one_pixel(3, 4, w=8, h=8)
    norm = size_normalize(raw)
    st_ = stretch(norm)
    assert st_.state is FieldState.STRETCHED
    assert unstretch(st_).state is FieldState.SIZE_NORMALIZED
    illegal = [
        (size_normalize, norm),
        (size_normalize, st_),
        (size_denormalize, raw),
        (size_denormalize, st_),
        (stretch, raw),
        (stretch, st_),
        (unstretch, raw),
        (unstretch, norm),
    ]
    for op, arg in illegal:
        with pytest.raises(StateError):
            op(arg)


def test_reverse_undoes_forward(rng):
    vectors = rng.uniform(-15, 15, (16, 24, 2))
    afm = AttractionFieldMap(ImageLattice(24, 16), vectors)
    for stretched in (False, True):
        back = reverse(forward(afm, stretched=stretched))
        assert back.state is FieldState.RAW
        # The stretch offsets each component by EPS in normalised units.
        np.testing.assert_allclose(back.vectors, vectors, atol=2 * EPS * 24)
    assert reverse(afm) is afm


def test_float32_fields_keep_their_dtype():
    afm = AttractionFieldMap(ImageLattice(4, 4), np.ones((4, 4, 2), dtype=np.float32))
    out = forward(afm)
    assert out.vectors.dtype == np.float32
    assert math.isfinite(float(out.vectors.max()))
