"""Multi-scale encode/squeeze/evaluate sweeps and a synthetic map generator."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .codec import compute_attraction_field
from .exceptions import ConfigError, DomainError, EmptyMapError
from .geometry import ImageLattice, LineSegmentMap
from .metrics import evaluate
from .squeeze import SqueezeParams, squeeze

DEFAULT_SCALES = tuple(round(0.5 + 0.1 * k, 1) for k in range(16))


@dataclass(frozen=True)
class ScaleSweepReport:
    scales: list
    per_scale: list  # (precision, recall, f_measure) per scale
    mean_precision: float
    mean_recall: float

    def __post_init__(self):
        if len(self.scales) != len(self.per_scale):
            raise ValueError("one result row is needed per scale")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly increasing")

    @property
    def mean_f_measure(self) -> float:
        return float(np.mean([row[2] for row in self.per_scale]))


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    segment_count: tuple = (5, 30)
    min_length_px: float = 20.0
    lattice: ImageLattice = field(default_factory=lambda: ImageLattice(320, 320))
    min_endpoint_separation_px: float = 2.0
    max_attempts: int = 10_000


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def parse_scales(text: str) -> list[float]:
    """Parse ``LO:STEP:HI`` (inclusive) or a comma separated list of scales."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"scale range must be LO:STEP:HI, got {text!r}")
        lo, step, hi = (float(v) for v in parts)
        if step <= 0 or lo <= 0 or hi < lo:
            raise DomainError(f"invalid scale range {text!r}")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 10) for k in range(n)]
    scales = [float(v) for v in text.split(",") if v.strip()]
    if not scales or any(s <= 0 for s in scales):
        raise DomainError(f"invalid scale list {text!r}")
    return scales


def scale_map(segment_map: LineSegmentMap, s: float) -> LineSegmentMap:
    """Scale geometry and lattice by ``s``.

    Lattice dimensions round half up (minimum 1); endpoints are clamped
    into the new bounds and segments that collapse to a point are dropped.
    """
    if not (s > 0) or not math.isfinite(s):
        raise DomainError(f"scale must be positive, got {s!r}")
    if s == 1.0:
        return segment_map
    w = max(1, _round_half_up(s * segment_map.lattice.width))
    h = max(1, _round_half_up(s * segment_map.lattice.height))
    coords = segment_map.coords * s
    coords[:, [0, 2]] = np.clip(coords[:, [0, 2]], 0, w)
    coords[:, [1, 3]] = np.clip(coords[:, [1, 3]], 0, h)
    keep = (coords[:, 0] != coords[:, 2]) | (coords[:, 1] != coords[:, 3])
    return LineSegmentMap(ImageLattice(w, h), coords[keep])


def duality_at_scale(segment_map: LineSegmentMap, s: float, params: Optional[SqueezeParams] = None):
    """Encode the scaled map, squeeze it back and evaluate; returns an EvalReport."""
    scaled = scale_map(segment_map, s)
    afm, _ = compute_attraction_field(scaled)
    recovered = squeeze(afm, params or SqueezeParams())
    return evaluate(recovered.segments, scaled)


def verify_duality(
    segment_map: LineSegmentMap,
    scales: Sequence[float] = DEFAULT_SCALES,
    params: Optional[SqueezeParams] = None,
    n_jobs: int = 1,
) -> ScaleSweepReport:
    if len(segment_map) == 0:
        raise EmptyMapError("duality check needs a non-empty map")
    scales = list(scales)
    if not scales:
        raise DomainError("at least one scale is required")
    params = params or SqueezeParams()
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            reports = list(pool.map(duality_at_scale, [segment_map] * len(scales), scales, [params] * len(scales)))
    else:
        reports = [duality_at_scale(segment_map, s, params) for s in scales]
    rows = [(r.precision, r.recall, r.f_measure) for r in reports]
    return ScaleSweepReport(
        scales=scales,
        per_scale=rows,
        mean_precision=float(np.mean([r[0] for r in rows])),
        mean_recall=float(np.mean([r[1] for r in rows])),
    )


def generate_synthetic_map(config: SynthConfig) -> LineSegmentMap:
    """Seeded random segment map.

    Endpoints are drawn uniformly over pixel centres' bounding box
    ``[0, W-1] x [0, H-1]``; candidates that are too short or whose
    endpoints crowd an existing endpoint are redrawn.
    """
    lo, hi = config.segment_count
    lattice = config.lattice
    if lo < 1 or hi < lo:
        raise ConfigError(f"segment_count must be 1 <= lo <= hi, got {config.segment_count!r}")
    if config.min_length_px <= 0 or config.min_endpoint_separation_px < 0:
        raise ConfigError("min_length_px must be positive and min_endpoint_separation_px non-negative")
    span = math.hypot(lattice.width - 1, lattice.height - 1)
    if config.min_length_px > span:
        raise ConfigError(
            f"min_length_px={config.min_length_px} exceeds the lattice diagonal {span:.3f}"
        )
    rng = np.random.default_rng(config.seed)
    count = int(rng.integers(lo, hi + 1))
    limits = np.array([lattice.width - 1, lattice.height - 1], dtype=np.float64)
    rows: list[np.ndarray] = []
    ends = np.zeros((0, 2))
    attempts = 0
    while len(rows) < count:
        attempts += 1
        if attempts > config.max_attempts:
            raise ConfigError(f"could not place {count} segments in {config.max_attempts} attempts")
        a, b = rng.random((2, 2)) * limits
        if math.hypot(*(b - a)) < config.min_length_px:
            continue
        if len(ends) and config.min_endpoint_separation_px > 0:
            d = np.hypot(*(ends[:, None, :] - np.stack([a, b])[None]).transpose(2, 0, 1))
            if d.min() < config.min_endpoint_separation_px:
                continue
        rows.append(np.concatenate([a, b]))
        ends = np.vstack([ends, a, b])
    return LineSegmentMap(lattice, np.array(rows))


def synthetic_corpus(n_maps: int, seed: int = 42, **kwargs) -> list[LineSegmentMap]:
    """``n_maps`` maps with per-map seeds spawned from ``seed``."""
    seeds = np.random.SeedSequence(seed).generate_state(n_maps)
    return [generate_synthetic_map(SynthConfig(seed=int(s), **kwargs)) for s in seeds]
