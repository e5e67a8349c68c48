"""On-disk formats: AFM1 binary fields, segment JSON, CSV reports, PPM images.

AFM1 layout (little-endian)::

    offset 0   4 bytes  magic b"AFM1"
    offset 4   uint32   width
    offset 8   uint32   height
    offset 12  uint8    flags  (bit0 size-normalised, bit1 stretched)
    offset 13  float32  a_x, a_y interleaved, row-major from the top-left
"""

from __future__ import annotations

import json
import math
import os
import struct
from typing import Iterable, Union

import numpy as np

from .codec import AttractionFieldMap, FieldState
from .exceptions import AfmError, FormatError
from .geometry import ImageLattice, LineSegmentMap
from .metrics import rasterize_segments

MAGIC = b"AFM1"
HEADER = struct.Struct("<4sIIB")
FLAG_NORMALIZED = 0x01
FLAG_STRETCHED = 0x02

_STATE_FLAGS = {
    FieldState.RAW: 0,
    FieldState.SIZE_NORMALIZED: FLAG_NORMALIZED,
    FieldState.STRETCHED: FLAG_NORMALIZED | FLAG_STRETCHED,
}
_FLAG_STATES = {v: k for k, v in _STATE_FLAGS.items()}

PathLike = Union[str, os.PathLike]


def afm_to_bytes(afm: AttractionFieldMap) -> bytes:
    header = HEADER.pack(MAGIC, afm.lattice.width, afm.lattice.height, _STATE_FLAGS[afm.state])
    return header + np.ascontiguousarray(afm.vectors, dtype="<f4").tobytes()


def afm_from_bytes(data: bytes) -> AttractionFieldMap:
    if len(data) < HEADER.size:
        raise FormatError(f"truncated header: {len(data)} of {HEADER.size} bytes", offset=len(data))
    magic, width, height, flags = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if width < 1:
        raise FormatError("width must be at least 1", offset=4)
    if height < 1:
        raise FormatError("height must be at least 1", offset=8)
    if flags & FLAG_STRETCHED and not flags & FLAG_NORMALIZED:
        raise FormatError("stretched flag set without the size-normalised flag", offset=12)
    if flags & ~(FLAG_NORMALIZED | FLAG_STRETCHED):
        raise FormatError(f"unknown flag bits 0x{flags:02x}", offset=12)
    expected = HEADER.size + 8 * width * height
    if len(data) < expected:
        raise FormatError(
            f"truncated payload: {len(data)} bytes, expected {expected}", offset=len(data)
        )
    if len(data) > expected:
        raise FormatError(f"{len(data) - expected} trailing bytes after payload", offset=expected)
    values = np.frombuffer(data, dtype="<f4", offset=HEADER.size).astype(np.float32)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FormatError("non-finite vector component", offset=HEADER.size + 4 * int(bad[0]))
    lattice = ImageLattice(width, height)
    return AttractionFieldMap(lattice, values.reshape(height, width, 2), _FLAG_STATES[flags])


def write_afm(afm: AttractionFieldMap, path: PathLike) -> None:
    """Write ``afm`` as AFM1.  float64 fields are rounded to float32."""
    with open(path, "wb") as fh:
        fh.write(afm_to_bytes(afm))


def read_afm(path: PathLike) -> AttractionFieldMap:
    with open(path, "rb") as fh:
        return afm_from_bytes(fh.read())


def segments_to_json(segment_map: LineSegmentMap) -> str:
    doc = {
        "width": segment_map.lattice.width,
        "height": segment_map.lattice.height,
        "segments": segment_map.coords.tolist(),
    }
    return json.dumps(doc) + "\n"


def _number(value, where: str, index):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where} must be a number, got {value!r}", offset=index)
    if not math.isfinite(value):
        raise FormatError(f"{where} is not finite", offset=index)
    return float(value)


def segments_from_json(text: str) -> LineSegmentMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc.msg}", offset=exc.pos) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object with width, height and segments")
    for key in ("width", "height", "segments"):
        if key not in doc:
            raise FormatError(f"missing key {key!r}")
    w, h = doc["width"], doc["height"]
    if isinstance(w, bool) or not isinstance(w, int) or isinstance(h, bool) or not isinstance(h, int):
        raise FormatError(f"width and height must be integers, got {w!r} x {h!r}")
    try:
        lattice = ImageLattice(w, h)
    except AfmError as exc:
        raise FormatError(str(exc)) from None
    if not isinstance(doc["segments"], list):
        raise FormatError("segments must be a list")
    rows = []
    for i, seg in enumerate(doc["segments"]):
        if not isinstance(seg, list) or len(seg) != 4:
            raise FormatError(f"segment {i} must be [x1, y1, x2, y2]", offset=i)
        x1, y1, x2, y2 = (_number(v, f"segment {i} coordinate", i) for v in seg)
        if (x1, y1) == (x2, y2):
            raise FormatError(f"segment {i} has zero length", offset=i)
        for x, y in ((x1, y1), (x2, y2)):
            if not (0 <= x <= w and 0 <= y <= h):
                raise FormatError(f"segment {i} endpoint ({x}, {y}) outside [0, {w}] x [0, {h}]", offset=i)
        rows.append((x1, y1, x2, y2))
    return LineSegmentMap(lattice, np.array(rows, dtype=np.float64).reshape(-1, 4))


def write_segments(segment_map: LineSegmentMap, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(segments_to_json(segment_map))


def read_segments(path: PathLike) -> LineSegmentMap:
    with open(path, "r", encoding="utf-8") as fh:
        return segments_from_json(fh.read())


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def write_pr_csv(rows: Iterable, path: PathLike) -> None:
    """``threshold,precision,recall,fmeasure`` rows from ``(threshold, EvalReport)`` pairs.

    A threshold of ``None`` leaves the first column empty.
    """
    lines = ["threshold,precision,recall,fmeasure"]
    for threshold, report in rows:
        t = "" if threshold is None else _fmt(threshold)
        lines.append(f"{t},{_fmt(report.precision)},{_fmt(report.recall)},{_fmt(report.f_measure)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scale_csv(report, path: PathLike) -> None:
    """``scale,precision,recall,fmeasure`` rows plus a trailing ``mean`` row."""
    lines = ["scale,precision,recall,fmeasure"]
    for s, (p, r, f) in zip(report.scales, report.per_scale):
        lines.append(f"{_fmt(s)},{_fmt(p)},{_fmt(r)},{_fmt(f)}")
    lines.append(
        f"mean,{_fmt(report.mean_precision)},{_fmt(report.mean_recall)},{_fmt(report.mean_f_measure)}"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _gray_panel(channel: np.ndarray) -> np.ndarray:
    channel = channel.astype(np.float64)
    lo, hi = channel.min(), channel.max()
    if hi == lo:
        return np.full(channel.shape, 128, dtype=np.uint8)
    return np.floor((channel - lo) / (hi - lo) * 255 + 0.5).astype(np.uint8)


def render_image(obj) -> np.ndarray:
    """RGB uint8 image for a segment map or an attraction field map.

    Segment maps are drawn in black on white.  Fields become two
    side-by-side grayscale panels (x component left, y component right).
    """
    if isinstance(obj, LineSegmentMap):
        gray = np.full(obj.lattice.shape, 255, dtype=np.uint8)
        for x, y in rasterize_segments(obj):
            gray[y, x] = 0
    elif isinstance(obj, AttractionFieldMap):
        gray = np.concatenate([_gray_panel(obj.ax), _gray_panel(obj.ay)], axis=1)
    else:
        raise TypeError(f"cannot render {type(obj).__name__}")
    return np.repeat(gray[..., None], 3, axis=2)


def render_visualization(obj, path: PathLike) -> None:
    image = render_image(obj)
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_ppm(path: PathLike) -> np.ndarray:
    """Parse a binary P6 file with maxval 255 into an ``(h, w, 3)`` array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header", offset=pos)
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise FormatError(f"not a P6 file: {tokens[0]!r}", offset=0)
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}")
    pos += 1
    body = data[pos:]
    if len(body) != 3 * w * h:
        raise FormatError(f"PPM payload is {len(body)} bytes, expected {3 * w * h}", offset=pos)
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


def sniff_afm(path: PathLike) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC

