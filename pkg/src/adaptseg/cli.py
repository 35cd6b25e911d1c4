"""Command-line front end.

Subcommands:

* segment   run a segmentation, writing trace.csv, session.json and
            scheduled snapshot images into an output directory
* replay    re-run a session file against its image and verify the trace
* analysis  export indicator-quality probability curves as CSV
* generate  write synthetic test images (simple, perturbed, noise)
* serve     host the HTTP session API plus the static web UI

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or image
hash mismatch, 3 stalled before the stop criterion was met, 4 replay
divergence.
"""

import argparse
import json
import logging
import os
import sys

from . import analysis, session
from .engine import (MULTISCALAR_STRATEGIES, RUNNING, STALLED,
                     Segmentation, StopCriterion, cutting_from_label)
from .image_io import ImageFormatError, load_image, save_image

log = logging.getLogger("adaptseg")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_STALLED = 3
EXIT_DIVERGED = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adaptseg",
        description="Adaptive image segmentation by optimal region splitting.")
    subs = parser.add_subparsers(dest="command", required=True)

    seg = subs.add_parser("segment", help="segment an image")
    seg.add_argument("input", help="input image (8-bit PNG/PPM/PGM)")
    seg.add_argument("--out", default="out", help="output directory")
    seg.add_argument("--mode", choices=("vector", "multiscalar"),
                     default="vector")
    seg.add_argument("--cutting", choices=("overall-best", "family"),
                     default="overall-best")
    seg.add_argument("--family-positions", choices=("all", "midpoints"),
                     default="all",
                     help="axis-cut family: every boundary or midpoints only")
    seg.add_argument("--multiscalar", choices=MULTISCALAR_STRATEGIES,
                     help="commit policy (multiscalar mode only)")
    seg.add_argument("--target-regions", type=int,
                     help="stop at this many uniform-color regions (n_vr)")
    seg.add_argument("--target-scalar-regions", type=int,
                     help="stop at this many scalar regions (n_sr)")
    seg.add_argument("--target-tau", type=float,
                     help="stop once explained data reaches this percentage")
    seg.add_argument("--max-iterations", type=int)
    seg.add_argument("--j-epsilon", type=float,
                     help="stop once the misfit J drops to this value")
    seg.add_argument("--snapshot-every", type=int, metavar="K",
                     help="write snapshot images every K iterations")
    seg.add_argument("--snapshot-at", metavar="N,N,...",
                     help="write snapshot images at these iterations")

    rep = subs.add_parser("replay", help="verify a recorded session")
    rep.add_argument("session", help="session.json written by segment")
    rep.add_argument("image", help="the image the session was recorded on")

    ana = subs.add_parser("analysis",
                          help="indicator-quality probability curves")
    ana.add_argument("--p", default="4,10,80",
                     help="comma-separated region sizes")
    ana.add_argument("--xi", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
                     help="comma-separated quality thresholds in [0,1]")
    ana.add_argument("--out", default=".", help="output directory")

    gen = subs.add_parser("generate", help="write a synthetic test image")
    gen.add_argument("kind", choices=("simple", "perturbed", "noise"))
    gen.add_argument("--size", type=int, default=256,
                     help="square edge length (simple/perturbed/noise)")
    gen.add_argument("--width", type=int, help="noise width (overrides --size)")
    gen.add_argument("--height", type=int, help="noise height (overrides --size)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--channels", type=int, choices=(1, 3), default=3,
                     help="noise channel count")
    gen.add_argument("--out", default=None, help="output PNG path")

    srv = subs.add_parser("serve", help="run the HTTP API and web UI")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--ttl", type=float, default=3600.0,
                     help="idle session lifetime in seconds")
    srv.add_argument("--ui-dir", default=None,
                     help="static UI bundle (default: ./frontend/dist if present)")
    return parser


def _stop_criterion(args):
    stop = StopCriterion(
        target_vr=args.target_regions,
        target_sr=args.target_scalar_regions,
        target_tau=args.target_tau,
        max_iterations=args.max_iterations,
        j_epsilon=args.j_epsilon,
    )
    set_count = sum(v is not None for v in (
        args.target_regions, args.target_scalar_regions, args.target_tau,
        args.max_iterations, args.j_epsilon))
    if set_count != 1:
        raise ValueError("segment needs exactly one stop criterion")
    return stop


def _snapshot_schedule(args):
    explicit = set()
    if args.snapshot_at:
        try:
            explicit = {int(v) for v in args.snapshot_at.split(",") if v.strip()}
        except ValueError:
            raise ValueError(f"bad --snapshot-at list: {args.snapshot_at!r}")
    every = args.snapshot_every
    if every is not None and every < 1:
        raise ValueError("--snapshot-every must be positive")

    def scheduled(iteration):
        if iteration in explicit:
            return True
        return every is not None and iteration % every == 0

    return scheduled


def _write_snapshot(out_dir, engine):
    n = engine.iteration
    stem = os.path.join(out_dir, f"iter_{n:04d}")
    with open(stem + ".png", "wb") as fh:
        fh.write(session.render_segmented(engine))
    with open(stem + "_edges.png", "wb") as fh:
        fh.write(session.render_edges(engine))
    with open(os.path.join(out_dir, f"labels_{n:04d}.json"), "w") as fh:
        json.dump(session.labels_dump(engine), fh, sort_keys=True)
        fh.write("\n")


def cmd_segment(args):
    stop = _stop_criterion(args)
    scheduled = _snapshot_schedule(args)
    if args.mode == "multiscalar" and args.multiscalar is None:
        raise ValueError("--multiscalar is required in multiscalar mode")
    if args.mode == "vector" and args.multiscalar is not None:
        raise ValueError("--multiscalar only applies to multiscalar mode")
    cutting_label = ("overall-best" if args.cutting == "overall-best"
                     else f"family-{args.family_positions}")
    img = load_image(args.input)
    engine = Segmentation(img, mode=args.mode,
                          cutting=cutting_from_label(cutting_label),
                          multiscalar=args.multiscalar)
    os.makedirs(args.out, exist_ok=True)
    written = set()
    if scheduled(0):
        _write_snapshot(args.out, engine)
        written.add(0)
    while True:
        if stop.satisfied(engine):
            outcome = "stopped"
            break
        if engine.status != RUNNING or not engine.step():
            outcome = engine.status
            break
        if scheduled(engine.iteration):
            _write_snapshot(args.out, engine)
            written.add(engine.iteration)
    if engine.iteration not in written:
        _write_snapshot(args.out, engine)
    session.write_trace(os.path.join(args.out, "trace.csv"), engine.history)
    session.write_session(os.path.join(args.out, "session.json"),
                          engine, session.image_hash(img))
    j = engine.j_current()
    log.info("%s after %d iterations: n_sr=%d n_vr=%d J=%.9g tau=%.9g",
             outcome, engine.iteration, engine.n_sr(), engine.n_vr(),
             j, engine.tau_from_j(j))
    print(f"{outcome}: iterations={engine.iteration} n_sr={engine.n_sr()} "
          f"n_vr={engine.n_vr()} J={j:.9g} tau={engine.tau_from_j(j):.9g}")
    return EXIT_STALLED if outcome == STALLED else EXIT_OK


def cmd_replay(args):
    payload = session.load_session(args.session)
    img = load_image(args.image)
    try:
        engine = session.replay_session(payload, img)
    except session.ReplayDivergence as exc:
        print(f"divergence: {exc}")
        return EXIT_DIVERGED
    print(f"replay ok: {len(engine.history)} events verified")
    return EXIT_OK


def cmd_analysis(args):
    try:
        p_values = [int(v) for v in args.p.split(",") if v.strip()]
        xi_grid = [float(v) for v in args.xi.split(",") if v.strip()]
    except ValueError:
        raise ValueError("--p and --xi must be comma-separated numbers")
    if not p_values or not xi_grid:
        raise ValueError("--p and --xi must be non-empty")
    os.makedirs(args.out, exist_ok=True)
    for p in p_values:
        curve = analysis.quality_curve(p, xi_grid)
        path = os.path.join(args.out, f"quality_p{p}.csv")
        analysis.write_quality_csv(path, curve)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_generate(args):
    if args.kind == "simple":
        img = analysis.generate_simple(args.size)
    elif args.kind == "perturbed":
        img = analysis.generate_perturbed(args.size)
    else:
        width = args.width or args.size
        height = args.height or args.size
        img = analysis.generate_noise(width, height, seed=args.seed,
                                      channel_count=args.channels)
    out = args.out or f"{args.kind}.png"
    save_image(img, img.planes, out)
    print(f"wrote {out} ({img.width}x{img.height}, {img.channel_count} channels)")
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .server import create_app

    ui_dir = args.ui_dir
    if ui_dir is not None and not os.path.isdir(ui_dir):
        print(f"error: --ui-dir {ui_dir}: not a directory", file=sys.stderr)
        return EXIT_CONFIG
    if ui_dir is None:
        # Look next to the cwd first, then next to the source tree, so the
        # UI is found no matter where the server is launched from.
        here = os.path.dirname(os.path.abspath(__file__))
        candidates = [
            os.path.join("frontend", "dist"),
            os.path.join(here, "..", "..", "frontend", "dist"),
        ]
        for cand in candidates:
            if os.path.isdir(cand):
                ui_dir = os.path.abspath(cand)
                break
    if ui_dir is None:
        print("web UI not found (frontend/dist missing); serving the API only",
              flush=True)
    else:
        print(f"serving web UI from {ui_dir}", flush=True)
    app = create_app(ttl=args.ttl, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("ADAPTSEG_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "segment": cmd_segment,
        "replay": cmd_replay,
        "analysis": cmd_analysis,
        "generate": cmd_generate,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ImageFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
