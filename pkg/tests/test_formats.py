import hashlib
import json
import struct

import numpy as np
import pytest

from afmap import (
    FieldState,
    FormatError,
    ImageLattice,
    LineSegmentMap,
    SynthConfig,
    compute_attraction_field,
    generate_synthetic_map,
    verify_duality,
)
from afmap.codec import AttractionFieldMap
from afmap.formats import (
    afm_from_bytes,
    afm_to_bytes,
    read_afm,
    read_ppm,
    read_segments,
    render_visualization,
    segments_from_json,
    segments_to_json,
    sniff_afm,
    write_afm,
    write_pr_csv,
    write_scale_csv,
    write_segments,
)
from afmap.metrics import EvalReport
from afmap.transforms import forward, size_normalize


def test_one_pixel_file_layout():
    afm = AttractionFieldMap(ImageLattice(1, 1), np.array([[[1.5, -2.0]]]))
    data = afm_to_bytes(afm)
    assert len(data) == 21
    assert data[:4] == b"AFM1"
    assert struct.unpack("<IIB", data[4:13]) == (1, 1, 0)
    assert struct.unpack("<ff", data[13:]) == (1.5, -2.0)


def test_float32_round_trip_is_bit_exact(tmp_path, rng):
    vectors = rng.normal(0, 10, (7, 5, 2)).astype(np.float32)
    afm = AttractionFieldMap(ImageLattice(5, 7), vectors)
    path = tmp_path / "a.afm"
    write_afm(afm, path)
    back = read_afm(path)
    assert back == afm
    assert back.vectors.tobytes() == vectors.tobytes()
    write_afm(back, tmp_path / "b.afm")
    assert (tmp_path / "b.afm").read_bytes() == path.read_bytes()


def test_state_flags_round_trip(rng):
    afm = AttractionFieldMap(ImageLattice(4, 3), rng.normal(0, 2, (3, 4, 2)).astype(np.float32))
    for state_afm, flags in [(afm, 0), (size_normalize(afm), 1), (forward(afm), 3)]:
        data = afm_to_bytes(state_afm)
        assert data[12] == flags
        assert afm_from_bytes(data).state is state_afm.state


@pytest.mark.parametrize(
    "mutate, offset",
    [
        (lambda d: b"AFM2" + d[4:], 0),
        (lambda d: d[:10], 10),
        (lambda d: d[:-3], None),
        (lambda d: d[:12] + bytes([2]) + d[13:], 12),
        (lambda d: d[:12] + bytes([8]) + d[13:], 12),
        (lambda d: d + b"\x00", None),
        (lambda d: d[:4] + struct.pack("<I", 0) + d[8:], 4),
    ],
)
def test_corrupt_files_are_rejected(mutate, offset):
    afm = AttractionFieldMap(ImageLattice(3, 2), np.ones((2, 3, 2)))
    with pytest.raises(FormatError) as info:
        afm_from_bytes(mutate(afm_to_bytes(afm)))
    if offset is not None:
        assert info.value.offset == offset


def test_non_finite_payload_rejected():
    data = bytearray(afm_to_bytes(AttractionFieldMap(ImageLattice(2, 1), np.zeros((1, 2, 2)))))
    data[17:21] = struct.pack("<f", float("nan"))
    with pytest.raises(FormatError) as info:
        afm_from_bytes(bytes(data))
    assert info.value.offset == 17


def test_segment_json_round_trip(tmp_path):
    lattice = ImageLattice(64, 48)
    for m in [
        LineSegmentMap(lattice),
        LineSegmentMap(lattice, [[1.0, 2.0, 30.0, 40.0]]),
        LineSegmentMap(lattice, [[1.123456, 2.654321, 63.999999, 0.000001], [0, 48, 64, 0]]),
    ]:
        path = tmp_path / "m.json"
        write_segments(m, path)
        assert read_segments(path) == m
        doc = json.loads(path.read_text())
        assert doc["width"] == 64 and doc["height"] == 48


def test_synthetic_map_json_round_trip_is_exact():
    m = generate_synthetic_map(SynthConfig(seed=9))
    assert segments_from_json(segments_to_json(m)) == m


@pytest.mark.parametrize(
    "text, match",
    [
        ("{not json", "malformed JSON"),
        ('{"width": 10, "height": 10}', "segments"),
        ('{"width": 10.5, "height": 10, "segments": []}', "integers"),
        ('{"width": 10, "height": 10, "segments": [[0, 0, 11, 5]]}', "segment 0 endpoint"),
        ('{"width": 10, "height": 10, "segments": [[0, 0, 5, 5], [2, 2, 2, 2]]}', "segment 1 has zero length"),
        ('{"width": 10, "height": 10, "segments": [[0, 0, 5]]}', "segment 0 must be"),
        ('{"width": 10, "height": 10, "segments": [[0, 0, "a", 5]]}', "must be a number"),
        ("[]", "top level"),
    ],
)
def test_bad_segment_json(text, match):
    with pytest.raises(FormatError, match=match):
        segments_from_json(text)


def test_pr_csv(tmp_path):
    report = EvalReport(0.5, 1.0, 2 / 3, 1, 2, 1, 1.0)
    path = tmp_path / "pr.csv"
    write_pr_csv([(0.2, report), (None, report)], path)
    lines = path.read_text().splitlines()
    assert lines == [
        "threshold,precision,recall,fmeasure",
        "0.200000,0.500000,1.000000,0.666667",
        ",0.500000,1.000000,0.666667",
    ]


def test_scale_csv(tmp_path):
    m = LineSegmentMap(ImageLattice(60, 60), [[5, 5, 50, 40]])
    report = verify_duality(m, [0.5, 1.0])
    path = tmp_path / "s.csv"
    write_scale_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "scale,precision,recall,fmeasure"
    assert lines[1].startswith("0.500000,") and lines[2].startswith("1.000000,")
    assert lines[3].startswith("mean,")
    assert len(lines) == 4


def test_field_rendering(tmp_path):
    m = LineSegmentMap(ImageLattice(10, 10), [[1, 1, 8, 6]])
    afm, _ = compute_attraction_field(m)
    path = tmp_path / "f.ppm"
    render_visualization(afm, path)
    image = read_ppm(path)
    assert image.shape == (10, 20, 3)
    assert image.min() == 0 and image.max() == 255
    assert path.read_bytes().startswith(b"P6\n20 10\n255\n")


def test_constant_field_renders_gray(tmp_path):
    afm = AttractionFieldMap(ImageLattice(4, 3), np.zeros((3, 4, 2)))
    path = tmp_path / "z.ppm"
    render_visualization(afm, path)
    assert (read_ppm(path) == 128).all()


def test_segment_rendering(tmp_path):
    m = LineSegmentMap(ImageLattice(8, 6), [[0, 2, 7, 2]])
    path = tmp_path / "s.ppm"
    render_visualization(m, path)
    image = read_ppm(path)
    assert image.shape == (6, 8, 3)
    assert (image[2] == 0).all() and (image[3] == 255).all()


def test_sniff(tmp_path):
    afm = AttractionFieldMap(ImageLattice(2, 2), np.zeros((2, 2, 2)))
    write_afm(afm, tmp_path / "a.afm")
    write_segments(LineSegmentMap(ImageLattice(2, 2)), tmp_path / "b.json")
    assert sniff_afm(tmp_path / "a.afm")
    assert not sniff_afm(tmp_path / "b.json")


def test_writers_are_deterministic(tmp_path):
    m = generate_synthetic_map(SynthConfig(seed=3, lattice=ImageLattice(64, 64), segment_count=(5, 8)))
    afm, _ = compute_attraction_field(m)
    digests = []
    for k in range(2):
        write_afm(afm, tmp_path / f"{k}.afm")
        write_segments(m, tmp_path / f"{k}.json")
        render_visualization(afm, tmp_path / f"{k}.ppm")
        digests.append(
            [hashlib.sha256((tmp_path / f"{k}{ext}").read_bytes()).hexdigest() for ext in (".afm", ".json", ".ppm")]
        )
    assert digests[0] == digests[1]
    assert read_afm(tmp_path / "0.afm").state is FieldState.RAW
