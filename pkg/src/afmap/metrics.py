"""Pixel-wise precision / recall / F-measure for segment maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .codec import AttractionFieldMap
from .exceptions import DomainError, LatticeError, StateError
from .geometry import LineSegmentMap
from .squeeze import SqueezeParams, squeeze
from .transforms import reverse

DEFAULT_THRESHOLDS = tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    matched: int
    detected_pixels: int
    gt_pixels: int
    tolerance_px: float


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Integer pixels on the line from ``(x0, y0)`` to ``(x1, y1)``, inclusive."""
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = []
    while True:
        out.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return out
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_segments(segment_map: LineSegmentMap) -> set[tuple[int, int]]:
    """Union of the digitised segments, clipped to the lattice.

    Endpoints are rounded with ``floor(v + 0.5)`` before line drawing.
    """
    w, h = segment_map.lattice.width, segment_map.lattice.height
    pixels = set()
    for x1, y1, x2, y2 in np.floor(segment_map.coords + 0.5).astype(np.int64).tolist():
        for x, y in bresenham(x1, y1, x2, y2):
            if 0 <= x < w and 0 <= y < h:
                pixels.add((x, y))
    return pixels


def _sorted_pixels(pixels) -> np.ndarray:
    """Pixels as an ``(n, 2)`` array in row-major order (y, then x)."""
    arr = np.array(sorted(pixels, key=lambda p: (p[1], p[0])), dtype=np.float64)
    return arr.reshape(-1, 2)


def _candidates(det: np.ndarray, gt: np.ndarray, tol: float):
    """For each detected pixel, GT indices within ``tol`` sorted by (distance, index)."""
    tree = cKDTree(gt)
    lists = tree.query_ball_point(det, r=tol + 1e-9)
    out = []
    for i, idx in enumerate(lists):
        if not idx:
            out.append(())
            continue
        idx = np.array(idx)
        d2 = ((gt[idx] - det[i]) ** 2).sum(axis=1)
        keep = d2 <= tol * tol
        idx, d2 = idx[keep], d2[keep]
        out.append(tuple(idx[np.lexsort((idx, d2))].tolist()))
    return out


def match_pixels(det: np.ndarray, gt: np.ndarray, tol: float, method: str = "greedy") -> int:
    """Size of a one-to-one matching between pixel sets within ``tol``.

    ``greedy`` visits detected pixels in the given order and takes the
    nearest unmatched GT pixel.  ``maximum`` extends the greedy matching to
    a maximum-cardinality one with augmenting paths.
    """
    if method not in ("greedy", "maximum"):
        raise ValueError(f"unknown matching method {method!r}")
    if len(det) == 0 or len(gt) == 0:
        return 0
    cands = _candidates(det, gt, tol)
    match_det = [-1] * len(det)
    match_gt = [-1] * len(gt)
    for i, idx in enumerate(cands):
        for j in idx:
            if match_gt[j] < 0:
                match_gt[j] = i
                match_det[i] = j
                break
    if method == "maximum":
        _augment(cands, match_det, match_gt)
    return sum(j >= 0 for j in match_det)


def _augment(adj, match_det, match_gt) -> None:
    """Hopcroft-Karp phases on top of an existing matching, in place."""
    inf = len(adj) + 1
    while True:
        dist = [inf] * len(adj)
        queue = [i for i, j in enumerate(match_det) if j < 0]
        for i in queue:
            dist[i] = 0
        found = False
        for u in queue:  # the list grows while iterating: plain BFS
            for g in adj[u]:
                w = match_gt[g]
                if w < 0:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return
        cursor = [0] * len(adj)
        for root in range(len(adj)):
            if match_det[root] >= 0 or dist[root] != 0:
                continue
            stack, via = [root], []
            while stack:
                u = stack[-1]
                if cursor[u] == len(adj[u]):
                    dist[u] = inf  # dead end for this phase
                    stack.pop()
                    if via:
                        via.pop()
                    continue
                g = adj[u][cursor[u]]
                cursor[u] += 1
                w = match_gt[g]
                if w < 0:
                    via.append(g)
                    for a, b in zip(stack, via):
                        match_det[a] = b
                        match_gt[b] = a
                    break
                if dist[w] == dist[u] + 1:
                    via.append(g)
                    stack.append(w)


def f_measure(p: float, r: float) -> float:
    if not (0 <= p <= 1) or not (0 <= r <= 1):
        raise DomainError(f"precision and recall must lie in [0, 1], got ({p!r}, {r!r})")
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def evaluate(
    detected: LineSegmentMap,
    gt: LineSegmentMap,
    rel_tolerance: float = 0.01,
    method: str = "greedy",
) -> EvalReport:
    """Compare two segment maps pixel-wise.

    Tolerance is ``rel_tolerance`` times the lattice diagonal.  An empty
    detection has precision 1 by convention.
    """
    if detected.lattice != gt.lattice:
        raise LatticeError(f"lattice mismatch: {detected.lattice} vs {gt.lattice}")
    if rel_tolerance < 0:
        raise DomainError(f"rel_tolerance must be non-negative, got {rel_tolerance!r}")
    tol = rel_tolerance * gt.lattice.diagonal
    det = _sorted_pixels(rasterize_segments(detected))
    ref = _sorted_pixels(rasterize_segments(gt))
    matched = match_pixels(det, ref, tol, method)
    precision = matched / len(det) if len(det) else 1.0
    recall = matched / len(ref) if len(ref) else 1.0
    return EvalReport(
        precision=precision,
        recall=recall,
        f_measure=f_measure(precision, recall),
        matched=matched,
        detected_pixels=len(det),
        gt_pixels=len(ref),
        tolerance_px=tol,
    )


def pr_sweep(
    afm: AttractionFieldMap,
    gt: LineSegmentMap,
    thresholds: Optional[Iterable[float]] = None,
    params=None,
    rel_tolerance: float = 0.01,
) -> list[tuple[float, EvalReport]]:
    """Squeeze ``afm`` at each aspect-ratio threshold and evaluate against ``gt``.

    ``params`` supplies the remaining squeeze settings; only
    ``aspect_ratio_max`` is overridden.
    """
    thresholds = DEFAULT_THRESHOLDS if thresholds is None else list(thresholds)
    for t in thresholds:
        if not (0 < t <= 1):
            raise DomainError(f"thresholds must lie in (0, 1], got {t!r}")
    raw = reverse(afm)
    base = params or SqueezeParams()
    out = []
    for t in thresholds:
        result = squeeze(raw, replace(base, aspect_ratio_max=t))
        out.append((t, evaluate(result.segments, gt, rel_tolerance)))
    return out


def afm_l1(a: AttractionFieldMap, b: AttractionFieldMap) -> float:
    """Sum over pixels of the l1 norm of the vector difference."""
    if a.lattice != b.lattice:
        raise LatticeError(f"lattice mismatch: {a.lattice} vs {b.lattice}")
    if a.state is not b.state:
        raise StateError(f"state mismatch: {a.state.value} vs {b.state.value}")
    diff = a.vectors.astype(np.float64) - b.vectors.astype(np.float64)
    return float(math.fsum(np.abs(diff).ravel().tolist()))
