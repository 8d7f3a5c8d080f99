"""Command-line front door: replay, forcemap, assess, presets, serve, simulate.

Thin wrappers over the library; every subcommand exits 1 with a one-line
message on domain errors (bad files, unknown presets) and lets argparse
handle usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .assessment import analyze, report_dict
from .config import load_config
from .errors import PalpaError
from .forcemap import ConeScale, cones_from_trace, export_obj, save_cones
from .gestures import load_script, press_cycle_waypoints, simulate
from .mesh import save_obj
from .presets import instantiate, list_presets, load_preset, load_scene
from .recorder import load_trace, record, replay_full, save_full_rate, save_trace
from .recorder import TraceHeader
from .server import PalpationService
from .timeline import run_ticks


def _scene_for_trace(header, assets):
    if header.preset:
        _, mesh, _, _ = load_scene(header.preset, assets)
    else:
        from .assets import load_asset_mesh
        mesh = load_asset_mesh(header.mesh_name, assets)
    return mesh


def cmd_presets_list(args) -> int:
    if args.json:
        rows = []
        for name in list_presets(args.assets):
            p = load_preset(name, args.assets)
            rows.append({"name": p.name, "kind": p.kind, "mesh": p.mesh_name,
                         "description": p.description,
                         "k_range": [p.material_range.k_min, p.material_range.k_max],
                         "b_range": [p.material_range.b_min, p.material_range.b_max],
                         "kernel": {"a": p.kernel.a, "w": p.kernel.w,
                                    "cutoff_eps": p.kernel.cutoff_eps}})
        print(json.dumps(rows, indent=2))
    else:
        for name in list_presets(args.assets):
            p = load_preset(name, args.assets)
            print(f"{name:12s} {p.description}" if p.description else name)
    return 0


def cmd_presets_bake(args) -> int:
    mesh, rng, _ = instantiate(args.name, args.assets)
    save_obj(mesh, args.out)
    print(f"baked {args.name} -> {args.out} "
          f"({len(mesh.vertices)} vertices, k in [{rng.k_min:g}, {rng.k_max:g}] N/m)")
    return 0


def cmd_replay(args) -> int:
    trace = load_trace(args.trace)
    mesh = _scene_for_trace(trace.header, args.assets)
    states, outputs = replay_full(trace, mesh, trace.header.material_range)
    mags = np.array([float(np.linalg.norm(o.force)) for o in outputs])
    contacts = sum(1 for o in outputs if o.contact is not None)
    print(f"replayed {len(outputs)} servo ticks over {trace.duration:.2f} s")
    print(f"  contact ticks: {contacts}   peak force: {mags.max() if len(mags) else 0:.3f} N")
    if args.out:
        save_full_rate(states, outputs, args.out)
        print(f"  wrote full-rate log {args.out}")
    if args.retrace:
        again = record(zip(states, outputs), trace.header)
        save_trace(again, args.retrace)
        print(f"  wrote re-recorded trace {args.retrace}")
    return 0


def cmd_forcemap(args) -> int:
    cfg = load_config(args.config)
    scale = cfg.forcemap
    if args.height_per_newton is not None or args.radius_per_newton is not None:
        scale = ConeScale(
            height_per_newton=args.height_per_newton or scale.height_per_newton,
            radius_per_newton=args.radius_per_newton or scale.radius_per_newton)
    trace = load_trace(args.trace)
    cones = cones_from_trace(trace, scale, cfg.assessment)
    print(f"{len(cones)} taps -> {len(cones)} cones")
    if args.obj:
        export_obj(cones, args.obj)
        print(f"  wrote {args.obj}")
    if args.map:
        save_cones(cones, args.map, scale)
        print(f"  wrote {args.map}")
    if not args.obj and not args.map:
        for c in cones:
            print(f"  t={c.t_peak:7.2f}s  peak={c.peak_force:6.3f} N  "
                  f"apex=({c.apex[0]:+.4f}, {c.apex[1]:+.4f}, {c.apex[2]:+.4f})")
    return 0


def cmd_assess(args) -> int:
    cfg = load_config(args.config)
    trace = load_trace(args.trace)
    report = analyze(trace, cfg.assessment)
    if args.json:
        print(json.dumps(report_dict(report), indent=2))
        return 0
    print(f"label: {report.label}")
    print(f"taps: {len(report.taps)}")
    if report.taps:
        def fmt(x):
            return "n/a" if x != x else f"{x:.3f}"
        print(f"peak-force spread (cv): {fmt(report.force_cv)}")
        print(f"lateral-speed spread (cv): {fmt(report.speed_cv)}")
        print(f"peaks in band: {fmt(report.band_fraction)}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    preset, mesh, rng, kernel = load_scene(args.preset, args.assets)
    if args.gesture:
        waypoints = load_script(args.gesture)
    else:
        apex = mesh.vertices[int(np.argmax(mesh.vertices[:, 2]))]
        normal = mesh.vertex_normals[int(np.argmax(mesh.vertices[:, 2]))]
        waypoints = press_cycle_waypoints(apex, normal, depth=args.depth,
                                          period=args.period, count=args.presses)
    poses = simulate(waypoints)
    states, outputs = run_ticks(mesh, rng, poses)
    header = TraceHeader(mesh_name=preset.mesh_name, preset=preset.name,
                         material_range=rng, kernel=kernel)
    trace = record(zip(states, outputs), header)
    print(f"simulated {len(outputs)} servo ticks, recorded {len(trace.samples)} samples")
    if args.trace_out:
        save_trace(trace, args.trace_out)
        print(f"  wrote {args.trace_out}")
    if args.report:
        report = analyze(trace, cfg.assessment)
        print(json.dumps(report_dict(report), indent=2))
    return 0


def cmd_serve(args) -> int:
    cfg = load_config(args.config)
    host, port = None, None
    if args.bind:
        host, _, tail = args.bind.rpartition(":")
        if host and tail.isdigit():
            port = int(tail)
        else:
            host = args.bind
    service = PalpationService(cfg, asset_root=args.assets, out_dir=args.out,
                               host=host, port=port)
    service.serve_forever()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palpa",
        description="virtual palpation: sessions, traces, force maps, scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True, assets=True):
        if config:
            p.add_argument("--config", help="INI config file (defaults built in)")
        if assets:
            p.add_argument("--assets", help="asset directory override")

    p = sub.add_parser("presets", help="list or bake organ presets")
    psub = p.add_subparsers(dest="presets_command", required=True)

    q = psub.add_parser("list", help="list available presets")
    add_common(q, config=False)
    q.add_argument("--json", action="store_true", help="machine-readable listing")
    q.set_defaults(func=cmd_presets_list)

    q = psub.add_parser("bake", help="write a preset's colored mesh to a file")
    add_common(q, config=False)
    q.add_argument("--name", required=True, help="preset name")
    q.add_argument("--out", required=True, help="output mesh file (OBJ)")
    q.set_defaults(func=cmd_presets_bake)

    p = sub.add_parser("replay", help="re-run a recorded trace deterministically")
    add_common(p, config=False)
    p.add_argument("trace", help="trace file (JSONL)")
    p.add_argument("--out", help="write full-rate 1 kHz force log here")
    p.add_argument("--retrace", help="write the re-recorded 100 Hz trace here")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("forcemap", help="build tap cones from a trace")
    add_common(p, assets=False)
    p.add_argument("trace", help="trace file (JSONL)")
    p.add_argument("--obj", help="write cone geometry as OBJ")
    p.add_argument("--map", help="write cone list as JSONL")
    p.add_argument("--height-per-newton", type=float, default=None)
    p.add_argument("--radius-per-newton", type=float, default=None)
    p.set_defaults(func=cmd_forcemap)

    p = sub.add_parser("assess", help="score a recorded session")
    add_common(p, assets=False)
    p.add_argument("trace", help="trace file (JSONL)")
    p.add_argument("--json", action="store_true", help="print the full report as JSON")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("simulate", help="run a scripted session headlessly")
    add_common(p)
    p.add_argument("--preset", default="healthy", help="organ preset name")
    p.add_argument("--gesture", help="waypoint script file; omit for built-in presses")
    p.add_argument("--presses", type=int, default=5, help="built-in: press count")
    p.add_argument("--depth", type=float, default=0.008, help="built-in: press depth (m)")
    p.add_argument("--period", type=float, default=1.0, help="built-in: seconds per press")
    p.add_argument("--trace-out", help="write the recorded trace here")
    p.add_argument("--report", action="store_true", help="print the skill report")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the WebSocket session service")
    add_common(p)
    p.add_argument("--bind", default=None, help="listen address, host or host:port")
    p.add_argument("--out", help="directory for traces recorded over the socket")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PalpaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
