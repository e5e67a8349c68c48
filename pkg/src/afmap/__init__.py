"""Attraction field dual representation of line segment maps.

Encode segment maps into region-partition and attraction field maps,
decode fields back into segments with the squeeze algorithm, apply the
learning transforms, and evaluate pixel-wise precision and recall.
"""

from .codec import (
    AttractionFieldMap,
    FieldState,
    RegionPartitionMap,
    compute_attraction_field,
    compute_region_partition,
)
from .estimators import AFMNormalizer, AFMReverser, AttractionFieldEncoder, SqueezeDecoder
from .exceptions import (
    AfmError,
    ConfigError,
    DomainError,
    EmptyMapError,
    FormatError,
    InvalidSegmentError,
    LatticeError,
    StateError,
)
from .formats import read_afm, read_segments, render_visualization, write_afm, write_segments
from .geometry import (
    ImageLattice,
    LineSegment,
    LineSegmentMap,
    Point2,
    Projection,
    attraction_vector,
    project_point_to_segment,
)
from .harness import (
    ScaleSweepReport,
    SynthConfig,
    generate_synthetic_map,
    scale_map,
    synthetic_corpus,
    verify_duality,
)
from .metrics import EvalReport, afm_l1, evaluate, f_measure, pr_sweep, rasterize_segments
from .squeeze import LineProposalMap, SqueezeOutput, SqueezeParams, build_line_proposal_map, squeeze
from .transforms import size_denormalize, size_normalize, stretch, unstretch

__version__ = "0.1.0"
