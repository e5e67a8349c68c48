"""Command-line entry point.

Exit status: 0 on success, 1 on validation or usage errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import transforms
from .codec import compute_attraction_field
from .exceptions import AfmError
from .formats import (
    read_afm,
    read_segments,
    render_visualization,
    sniff_afm,
    write_afm,
    write_pr_csv,
    write_scale_csv,
    write_segments,
)
from .geometry import ImageLattice
from .harness import DEFAULT_SCALES, SynthConfig, generate_synthetic_map, parse_scales, verify_duality
from .metrics import DEFAULT_THRESHOLDS, evaluate, pr_sweep
from .squeeze import SqueezeParams, squeeze

logger = logging.getLogger("afmap")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(AfmError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _range_pair(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return (int(lo), int(hi or lo))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="afmap", description="Attraction field maps for line segment maps.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("encode", help="segment JSON -> AFM1 file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--normalize", action="store_true", help="divide by image width/height")
    p.add_argument("--stretch", action="store_true", help="apply the log stretch (implies --normalize)")

    p = sub.add_parser("squeeze", help="AFM1 file -> segment JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_squeeze_flags(p)

    p = sub.add_parser("roundtrip", help="multi-scale encode/squeeze/evaluate")
    p.add_argument("--input", required=True)
    p.add_argument("--scales", default="0.5:0.1:2.0", help="LO:STEP:HI or comma list")
    p.add_argument("--report", required=True)
    _add_squeeze_flags(p)

    p = sub.add_parser("eval", help="compare detected and ground-truth segment JSON")
    p.add_argument("--detected", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--tolerance", type=float, default=0.01, help="fraction of the image diagonal")
    p.add_argument("--report", required=True)

    p = sub.add_parser("sweep", help="precision/recall over aspect-ratio thresholds")
    p.add_argument("--afm", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--thresholds", default=None, help="comma list in (0, 1]; default 0.1..1.0")
    p.add_argument("--tolerance", type=float, default=0.01)

    p = sub.add_parser("synth", help="write seeded synthetic segment maps")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True, help="number of maps to write")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--segments", type=_range_pair, default=(5, 30), help="LO:HI segments per map")
    p.add_argument("--min-length", type=float, default=20.0)

    p = sub.add_parser("viz", help="render a segment JSON or AFM1 file as PPM")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    return parser


def _add_squeeze_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=10.0, help="angular threshold in degrees")
    p.add_argument("--aspect", type=float, default=0.2, help="maximum width/length ratio")
    p.add_argument("--window", type=int, default=1, help="search window radius")
    p.add_argument("--seed", type=int, default=None, help="shuffle seed cells with this seed")


def _params(args) -> SqueezeParams:
    return SqueezeParams(
        window_radius=args.window,
        angular_threshold_deg=args.tau,
        aspect_ratio_max=args.aspect,
        rng_seed=args.seed,
    )


def _n_jobs() -> int:
    value = os.environ.get("AFM_THREADS")
    if not value:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        raise UsageError(f"AFM_THREADS must be an integer, got {value!r}") from None


def cmd_encode(args) -> None:
    segment_map = read_segments(args.input)
    afm, _ = compute_attraction_field(segment_map)
    if args.normalize or args.stretch:
        afm = transforms.forward(afm, stretched=args.stretch)
    write_afm(afm, args.output)


def cmd_squeeze(args) -> None:
    params = _params(args)
    afm = transforms.reverse(read_afm(args.input))
    result = squeeze(afm, params)
    write_segments(result.segments, args.output)
    logger.info("recovered %d segments (%d rejected seeds)", len(result.segments), result.rejected_seed_count)


def cmd_roundtrip(args) -> None:
    params = _params(args)
    scales = parse_scales(args.scales) if args.scales else list(DEFAULT_SCALES)
    report = verify_duality(read_segments(args.input), scales, params, n_jobs=_n_jobs())
    write_scale_csv(report, args.report)
    logger.info("mean precision %.4f, mean recall %.4f", report.mean_precision, report.mean_recall)


def cmd_eval(args) -> None:
    report = evaluate(read_segments(args.detected), read_segments(args.gt), args.tolerance)
    write_pr_csv([(None, report)], args.report)


def cmd_sweep(args) -> None:
    thresholds = DEFAULT_THRESHOLDS
    if args.thresholds:
        thresholds = [float(t) for t in args.thresholds.split(",") if t.strip()]
    rows = pr_sweep(read_afm(args.afm), read_segments(args.gt), thresholds, rel_tolerance=args.tolerance)
    write_pr_csv(rows, args.report)


def cmd_synth(args) -> None:
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    lattice = ImageLattice(args.width, args.height)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        config = SynthConfig(
            seed=args.seed + i,
            segment_count=args.segments,
            min_length_px=args.min_length,
            lattice=lattice,
        )
        write_segments(generate_synthetic_map(config), outdir / f"map_{i:04d}.json")


def cmd_viz(args) -> None:
    obj = read_afm(args.input) if sniff_afm(args.input) else read_segments(args.input)
    render_visualization(obj, args.output)


COMMANDS = {
    "encode": cmd_encode,
    "squeeze": cmd_squeeze,
    "roundtrip": cmd_roundtrip,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "viz": cmd_viz,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except AfmError as exc:
        print(f"afmap {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"afmap {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
