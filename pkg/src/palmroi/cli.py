"""Command-line driver: extract, consistency, synth and debug subcommands."""

import argparse
import itertools
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import imagecore, overlay, synth
from .errors import ConfigError
from .pipeline import PipelineConfig, run_stages
from .roi import roi_similarity

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 2, 3
IMAGE_SUFFIXES = (".png", ".pgm")
CONFIG_ENV = "PALMROI_CONFIG"


def dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def collect_inputs(args):
    """Expand directories (non-recursive) and ``@list`` files into sorted image paths."""
    paths = []
    for a in args:
        if a.startswith("@"):
            lines = Path(a[1:]).read_text().splitlines()
            paths.extend(Path(x.strip()) for x in lines if x.strip())
            continue
        p = Path(a)
        if p.is_dir():
            paths.extend(q for q in p.iterdir() if q.suffix.lower() in IMAGE_SUFFIXES)
        else:
            paths.append(p)
    return sorted(set(paths))


def resolve_config(args):
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = PipelineConfig.load(path) if path else PipelineConfig()
    overrides = {"beta": args.beta, "delta": args.delta, "out_side": args.roi_size}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        cfg = replace(cfg, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def process_one(path, cfg, out_dir, debug=False, timings=False):
    """Run the pipeline on one file and write its outputs; returns (path, ok, roi)."""
    stem = Path(path).stem
    out_dir = Path(out_dir)
    try:
        img = imagecore.read_image(path)
    except (OSError, ValueError) as exc:
        report = {"input": str(path), "status": "error", "stage": "read",
                  "error_code": "UnreadableImage", "message": str(exc)}
        dump_json(out_dir / f"{stem}.report.json", report)
        return str(path), False, None

    res = run_stages(img, cfg)
    report = res.report.to_dict(include_timings=timings)
    report["input"] = str(path)
    dump_json(out_dir / f"{stem}.report.json", report)
    if res.roi is not None:
        imagecore.write_png(out_dir / f"{stem}.roi.png", res.roi.data)
        dump_json(out_dir / f"{stem}.roi.json", res.roi.provenance())
    if res.lines is not None:
        imagecore.write_png(out_dir / f"{stem}.lines.png", res.lines.data)
    if debug:
        ddir = out_dir / f"{stem}.debug"
        ddir.mkdir(exist_ok=True)
        for stage, im in overlay.stage_images(img, res).items():
            im.save(ddir / f"{stage}.png", format="PNG", optimize=False)
        dump_json(ddir / "geometry.json", overlay.debug_json(res))
    roi_data = res.roi.data if res.roi is not None else None
    return str(path), res.report.ok, roi_data


def _run_batch(paths, cfg, out_dir, workers, debug, timings):
    out_dir.mkdir(parents=True, exist_ok=True)
    n = len(paths)
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process_one, paths, [cfg] * n, [out_dir] * n,
                                    [debug] * n, [timings] * n))
    else:
        results = [process_one(p, cfg, out_dir, debug, timings) for p in paths]
    return sorted(results, key=lambda r: r[0])


def _summary(results):
    return {"images": len(results), "ok": sum(ok for _, ok, _ in results),
            "failed": sorted(p for p, ok, _ in results if not ok)}


def cmd_extract(args, debug=False):
    cfg = resolve_config(args)
    paths = collect_inputs(args.inputs)
    out_dir = Path(args.out)
    results = _run_batch(paths, cfg, out_dir, args.workers, debug or args.debug, args.timings)
    summary = _summary(results)
    summary["config"] = cfg.to_dict()
    dump_json(out_dir / "summary.json", summary)
    print(f"{summary['ok']}/{summary['images']} images ok", file=sys.stderr)
    return EXIT_OK if not summary["failed"] else EXIT_FAILED


def cmd_debug(args):
    return cmd_extract(args, debug=True)


def group_key(path, pattern):
    """Group label of a path: the first capture group if any, else the whole match."""
    m = pattern.search(Path(path).name)
    if m is None:
        return None
    return m.group(1) if m.groups() else m.group(0)


def cmd_consistency(args):
    cfg = resolve_config(args)
    try:
        pattern = re.compile(args.group_by)
    except re.error as exc:
        raise ConfigError(f"bad --group-by pattern: {exc}") from exc
    paths = collect_inputs(args.inputs)
    out_dir = Path(args.out)
    results = _run_batch(paths, cfg, out_dir, args.workers, args.debug, args.timings)

    groups = {}
    for path, ok, roi in results:
        key = group_key(path, pattern)
        if key is not None:
            groups.setdefault(key, []).append((path, roi))
    report = {"config": cfg.to_dict(), "group_by": args.group_by, "groups": {}}
    for key in sorted(groups):
        pairs = []
        for (pa, ra), (pb, rb) in itertools.combinations(groups[key], 2):
            score = roi_similarity(ra, rb) if ra is not None and rb is not None else None
            pairs.append({"a": pa, "b": pb, "roi_similarity": score})
        scores = [p["roi_similarity"] for p in pairs if p["roi_similarity"] is not None]
        report["groups"][key] = {
            "members": [p for p, _ in groups[key]],
            "pairs": pairs,
            "min": min(scores) if scores else None,
            "median": float(np.median(scores)) if scores else None,
        }
    summary = _summary(results)
    report["summary"] = summary
    dump_json(out_dir / "consistency.json", report)
    print(f"{summary['ok']}/{summary['images']} images ok, {len(groups)} group(s)", file=sys.stderr)
    return EXIT_OK if not summary["failed"] else EXIT_FAILED


GESTURES = ("open", "closed", "thumb")


def synth_corpus(out_dir, seed=0, count=5, width=640, height=480, pose=True, noise_sigma=0.0):
    """Write ``count`` hands per gesture class with ground truth; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    cases = []
    for gesture in GESTURES:
        for k in range(count):
            params = synth.random_hand(rng, gesture, pose=pose, width=width, height=height,
                                       noise_sigma=noise_sigma)
            img, gt = synth.generate_hand(params, width, height)
            name = f"{gesture}_{k:03d}"
            imagecore.write_png(out_dir / f"{name}.png", img)
            dump_json(out_dir / f"{name}.truth.json",
                      {"params": params.to_dict(), "truth": gt.to_dict()})
            cases.append({"name": name, "gesture": gesture, "image": f"{name}.png",
                          "truth": f"{name}.truth.json"})
    manifest = {"seed": seed, "width": width, "height": height, "cases": cases}
    dump_json(out_dir / "manifest.json", manifest)
    return manifest


def cmd_synth(args):
    manifest = synth_corpus(args.out, args.seed, args.count, args.width, args.height,
                            pose=not args.no_pose, noise_sigma=args.noise)
    print(f"wrote {len(manifest['cases'])} cases to {args.out}", file=sys.stderr)
    return EXIT_OK


def _pipeline_flags(p):
    p.add_argument("inputs", nargs="+", help="image files, directories or @list files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help=f"JSON config (falls back to ${CONFIG_ENV})")
    p.add_argument("--beta", type=float, help="ROI side as a multiple of |K1K3|")
    p.add_argument("--delta", type=float, help="ROI centre offset into the palm, in |K1K3|")
    p.add_argument("--roi-size", type=int, help="ROI output side in pixels")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--debug", action="store_true", help="write per-stage overlay PNGs")
    p.add_argument("--timings", action="store_true",
                   help="include per-stage timings in reports (breaks byte-identical output)")


def build_parser():
    parser = argparse.ArgumentParser(prog="palmroi", description="Palm ROI extraction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract ROIs and line maps")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("debug", help="extract with per-stage overlays")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_debug)

    p = sub.add_parser("consistency", help="all-pairs ROI similarity within groups")
    _pipeline_flags(p)
    p.add_argument("--group-by", default=r"^([^_]+)",
                   help="regex on file names; group label is capture group 1")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("synth", help="write a synthetic corpus with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=5, help="hands per gesture class")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--noise", type=float, default=0.0, help="intensity noise sigma")
    p.add_argument("--no-pose", action="store_true", help="render at the identity pose")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
