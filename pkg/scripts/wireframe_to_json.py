#!/usr/bin/env python3
"""Convert WireFrame line annotations into per-image segment JSON files.

The input is the list-of-records JSON distributed with common wireframe
parsing code bases (``test.json``), where each record looks like::

    {"filename": "00031546.png", "width": 512, "height": 512,
     "lines": [[x1, y1, x2, y2], ...]}

Each record becomes ``<outdir>/<stem>.json`` in the ``afmap`` segment format.
Endpoints are clamped into ``[0, W] x [0, H]`` and zero-length lines are
dropped.  Point the acceptance suite at the output with
``AFM_WIREFRAME_DIR=<outdir>``.

Usage::

    python3 scripts/wireframe_to_json.py test.json wireframe_json/
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from afmap import ImageLattice, LineSegmentMap
from afmap.formats import write_segments


def convert_record(record: dict) -> LineSegmentMap:
    w, h = int(record["width"]), int(record["height"])
    lines = np.asarray(record.get("lines", []), dtype=np.float64).reshape(-1, 4)
    lines[:, [0, 2]] = np.clip(lines[:, [0, 2]], 0, w)
    lines[:, [1, 3]] = np.clip(lines[:, [1, 3]], 0, h)
    keep = (lines[:, 0] != lines[:, 2]) | (lines[:, 1] != lines[:, 3])
    return LineSegmentMap(ImageLattice(w, h), lines[keep])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("annotations", type=Path)
    parser.add_argument("outdir", type=Path)
    args = parser.parse_args(argv)
    records = json.loads(args.annotations.read_text())
    args.outdir.mkdir(parents=True, exist_ok=True)
    for record in records:
        stem = Path(record["filename"]).stem
        write_segments(convert_record(record), args.outdir / f"{stem}.json")
    print(f"wrote {len(records)} maps to {args.outdir}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
