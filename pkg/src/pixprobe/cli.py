"""Command-line access to classification, inpainting, CAM export, the
benchmark suites, and the HTTP service.

Exit codes: 0 success, 1 domain error (bad image, incompatible model, ...),
2 usage or I/O error.
"""

import argparse
import json
import sys
from pathlib import Path

from .errors import PixprobeError

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _read_file(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write_file(path: str, data: bytes):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_graph(model_dir: str):
    from .model import load_model_dir

    if not Path(model_dir).is_dir():
        print(f"error: model directory not found: {model_dir}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    return load_model_dir(model_dir)


def cmd_classify(args) -> int:
    from .image import decode_image
    from .model import classify

    graph = _load_graph(args.model)
    img = decode_image(_read_file(args.image))
    scores = classify(graph, img, args.k)
    if args.json:
        print(json.dumps(scores.to_json()))
    else:
        print(f"{'class_id':>8}  {'probability':>11}  label")
        for p in scores.topk:
            print(f"{p.class_id:>8}  {p.probability:>11.6f}  {p.label}")
    return EXIT_OK


def cmd_inpaint(args) -> int:
    from .image import decode_image, encode_image, mask_from_image
    from .patchmatch import PatchMatchParams, inpaint_patchmatch
    from .telea import inpaint_telea

    img = decode_image(_read_file(args.image))
    mask_img = decode_image(_read_file(args.mask))
    mask = mask_from_image(mask_img)
    if args.algorithm == "telea":
        out = inpaint_telea(img, mask, args.radius)
    else:
        params = PatchMatchParams(
            patch_size=args.patch_size,
            iterations=args.iterations,
            rng_seed=args.seed,
        )
        out = inpaint_patchmatch(img, mask, params)
    _write_file(args.out, encode_image(out))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_cam(args) -> int:
    from .cam import compute_cam, heatmap_image, render_overlay
    from .image import decode_image, encode_image

    graph = _load_graph(args.model)
    img = decode_image(_read_file(args.image))
    heatmap = compute_cam(graph, img, args.class_id)
    if args.mode == "raw":
        out = heatmap_image(heatmap)
    else:
        out = render_overlay(heatmap, img, args.alpha)
    _write_file(args.out, encode_image(out))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench

    rows = []
    if args.suite in ("compare", "all"):
        rows += bench.run_compare(args.reps)
    if args.suite in ("budget", "all"):
        rows += bench.run_budget(args.reps)
    if args.json:
        from dataclasses import asdict

        print(json.dumps([asdict(r) for r in rows]))
    else:
        print(bench.format_rows(rows))
    over = [r for r in rows if r.within_budget is False]
    for r in over:
        print(f"warning: {r.name} median {r.median_ms:.0f} ms exceeds "
              f"{r.budget_ms:.0f} ms budget", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import ServiceConfig, run

    config = ServiceConfig.from_env()
    if args.model:
        config.model_dir = args.model
    if args.port:
        config.port = args.port
    if args.host:
        config.host = args.host
    if args.static:
        config.static_dir = args.static
    if args.ttl is not None:
        config.session_ttl = args.ttl
    run(config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pixprobe")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="print the top-k classes for an image")
    p.add_argument("image")
    p.add_argument("--model", required=True, help="model directory (manifest.json + blobs)")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("inpaint", help="fill a masked region and write the result")
    p.add_argument("image")
    p.add_argument("mask", help="single-channel PNG, white = remove")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--algorithm", choices=["telea", "patchmatch"], default="telea")
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--patch-size", type=int, default=7)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_inpaint)

    p = sub.add_parser("cam", help="export a class activation map")
    p.add_argument("image")
    p.add_argument("--model", required=True)
    p.add_argument("--class-id", type=int, required=True)
    p.add_argument("--mode", choices=["overlay", "raw"], default="overlay")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=cmd_cam)

    p = sub.add_parser("bench", help="latency report for the hot operations")
    p.add_argument("--suite", choices=["compare", "budget", "all"], default="all")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", help="model directory")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--static", help="directory of UI assets to serve at /")
    p.add_argument("--ttl", type=float, help="session idle TTL in seconds")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PixprobeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
