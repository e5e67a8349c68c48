from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from afmap import ImageLattice, LineSegmentMap, LineSegment, project_point_to_segment

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; all lines are echoed in the terminal summary."""

    def _record(label: str, passed, detail: str = "") -> None:
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        ACCEPTANCE_LINES.append(f"{label}: {status} {detail}".rstrip())

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_force_field(segment_map: LineSegmentMap):
    """Per-pixel scalar scan: nearest segment (lowest index on ties) and its vector."""
    segs = segment_map.segments
    h, w = segment_map.lattice.shape
    index = np.zeros((h, w), dtype=np.int64)
    vectors = np.zeros((h, w, 2))
    for y in range(h):
        for x in range(w):
            best = None
            for i, seg in enumerate(segs):
                proj = project_point_to_segment((x, y), seg)
                if best is None or proj.sq_dist < best[1].sq_dist:
                    best = (i, proj)
            index[y, x] = best[0]
            vectors[y, x] = (best[1].point.x - x, best[1].point.y - y)
    return index, vectors


def exact_sq_dist(p, seg: LineSegment) -> Fraction:
    """Squared point-to-segment distance in exact rational arithmetic."""
    px, py = (Fraction(v) for v in p)
    x1, y1, x2, y2 = (Fraction(v) for v in seg.as_tuple())
    dx, dy = x2 - x1, y2 - y1
    t = ((px - x1) * dx + (py - y1) * dy) / (dx * dx + dy * dy)
    t = min(max(t, Fraction(0)), Fraction(1))
    return (x1 + t * dx - px) ** 2 + (y1 + t * dy - py) ** 2


def random_map(rng, width=64, height=64, n_min=2, n_max=10, min_length=3.0) -> LineSegmentMap:
    n = int(rng.integers(n_min, n_max + 1))
    rows = []
    while len(rows) < n:
        a = rng.random(2) * (width, height)
        b = rng.random(2) * (width, height)
        if np.hypot(*(b - a)) >= min_length:
            rows.append([*a, *b])
    return LineSegmentMap(ImageLattice(width, height), np.array(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(20190615)
