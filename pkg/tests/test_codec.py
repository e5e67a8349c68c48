import numpy as np
import pytest

from afmap import (
    EmptyMapError,
    FieldState,
    ImageLattice,
    LineSegmentMap,
    compute_attraction_field,
    compute_region_partition,
    generate_synthetic_map,
    SynthConfig,
)
from afmap.codec import AttractionFieldMap

from conftest import brute_force_field, exact_sq_dist, random_map

L10 = ImageLattice(10, 10)

# Three segments on a 10x10 lattice in the spirit of the toy layout used to
# illustrate the representation: two oblique strokes and a short bar.
TOY = LineSegmentMap(L10, [[1.0, 1.0, 8.0, 2.0], [2.0, 8.0, 8.0, 6.0], [1.5, 3.0, 2.5, 7.0]])


def test_single_segment_owns_every_pixel():
    m = LineSegmentMap(ImageLattice(7, 5), [[1, 1, 5, 3]])
    assert (compute_region_partition(m).region_index == 0).all()


def test_parallel_segments_split_with_low_index_tie_break():
    m = LineSegmentMap(L10, [[0, 2, 9, 2], [0, 8, 9, 8]])
    index = compute_region_partition(m).region_index
    # Frozen from an exact rational scan; row y=5 is equidistant and goes to 0.
    expected = np.zeros((10, 10), dtype=int)
    expected[6:] = 1
    np.testing.assert_array_equal(index, expected)


def test_toy_layout_matches_brute_force():
    index, vectors = brute_force_field(TOY)
    afm, partition = compute_attraction_field(TOY)
    np.testing.assert_array_equal(partition.region_index, index)
    np.testing.assert_array_equal(afm.vectors, vectors)
    assert set(np.unique(index)) == {0, 1, 2}


def test_partition_agrees_with_exact_arithmetic_up_to_float_ties(rng):
    m = random_map(rng, 24, 24, 3, 6)
    index = compute_region_partition(m).region_index
    segs = m.segments
    for y in range(24):
        for x in range(24):
            exact = [exact_sq_dist((x, y), s) for s in segs]
            best = min(range(len(segs)), key=lambda i: (exact[i], i))
            if index[y, x] != best:
                # Only acceptable when the two candidates are equal in float.
                a, b = float(exact[index[y, x]]), float(exact[best])
                assert a == pytest.approx(b, rel=1e-12)


def test_attraction_field_examples():
    m = LineSegmentMap(L10, [[0, 5, 9, 5]])
    afm, _ = compute_attraction_field(m)
    assert afm.state is FieldState.RAW
    assert tuple(afm.vectors[8, 4]) == (0.0, -3.0)
    assert tuple(afm.vectors[5, 4]) == (0.0, 0.0)


def test_random_map_matches_brute_force(rng):
    m = random_map(rng, 64, 64, 5, 5)
    index, vectors = brute_force_field(m)
    afm, partition = compute_attraction_field(m)
    np.testing.assert_array_equal(partition.region_index, index)
    np.testing.assert_array_equal(afm.vectors, vectors)


def test_vector_norm_matches_distance_to_assigned_segment(rng):
    m = random_map(rng, 40, 30, 3, 8)
    afm, partition = compute_attraction_field(m)
    segs = m.segments
    for y in range(0, 30, 3):
        for x in range(0, 40, 3):
            seg = segs[partition.region_index[y, x]]
            d = float(exact_sq_dist((x, y), seg))
            assert float((afm.vectors[y, x] ** 2).sum()) == pytest.approx(d, abs=1e-9)


def test_encoding_is_idempotent(rng):
    m = random_map(rng)
    a, _ = compute_attraction_field(m)
    b, _ = compute_attraction_field(m)
    assert a == b
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_zero_vectors_are_rare_on_synthetic_maps():
    for seed in range(5):
        m = generate_synthetic_map(SynthConfig(seed=seed, lattice=ImageLattice(128, 128)))
        afm, _ = compute_attraction_field(m)
        zero = np.hypot(afm.ax, afm.ay) == 0
        assert zero.mean() < 0.05


def test_empty_map_rejected():
    with pytest.raises(EmptyMapError):
        compute_attraction_field(LineSegmentMap(L10))
    with pytest.raises(EmptyMapError):
        compute_region_partition(LineSegmentMap(L10))


def test_field_shape_and_finiteness_checked():
    with pytest.raises(ValueError):
        AttractionFieldMap(L10, np.zeros((10, 9, 2)))
    bad = np.zeros((10, 10, 2))
    bad[3, 3, 0] = np.inf
    with pytest.raises(ValueError):
        AttractionFieldMap(L10, bad)
