"""Score two palpation styles: steady in-band presses vs erratic poking.

Assessment segments a session into taps with a hysteresis detector (open
above 0.5 N, close below 0.3 N), then scores the spread of the per-tap peak
forces and lateral speeds. A practiced examiner keeps peaks inside the 2.1
to 2.5 N working band with low variation; an untrained one alternates
between too soft and too hard. This script synthesizes one session of each
style through the real servo and prints both report cards.
"""

import numpy as np

from palpa.assessment import analyze, report_dict
from palpa.gestures import press_cycle_waypoints
from palpa.presets import load_scene
from palpa.recorder import TraceHeader, record
from palpa.timeline import run_ticks, waypoint_poses


def run_session(scene, depths):
    preset, mesh, mrange, kernel = scene
    top = int(np.argmax(mesh.vertices[:, 2]))
    n = mesh.vertex_normals[top] / np.linalg.norm(mesh.vertex_normals[top])
    waypoints = []
    for i, depth in enumerate(depths):
        waypoints += press_cycle_waypoints(mesh.vertices[top], n, depth=depth,
                                           period=1.6, count=1, start_t=1.6 * i)[:-1]
    waypoints.append((1.6 * len(depths), mesh.vertices[top] + 0.02 * n,
                      waypoints[0][2]))
    states, outputs = run_ticks(mesh, mrange, waypoint_poses(waypoints))
    header = TraceHeader(mesh_name=preset.mesh_name, preset=preset.name,
                         material_range=mrange, kernel=kernel)
    return record(zip(states, outputs), header)


def show(tag, trace):
    report = analyze(trace)
    d = report_dict(report)
    print(f"\n{tag}: {d['label']}")
    print(f"  taps {d['tap_count']}, peak-force CV {d['force_cv']:.3f}, "
          f"speed CV {d['speed_cv']:.3f}, in-band fraction {d['band_fraction']:.2f}")
    for tap in report.taps:
        print(f"    t {tap.t_start:5.2f}..{tap.t_stop:5.2f} s  "
              f"peak {tap.peak_force:5.2f} N")


def main():
    scene = load_scene("healthy")
    # healthy preset presses at 330 N/m: ~7 mm lands inside the working band
    steady = run_session(scene, [0.0069, 0.0071, 0.0070, 0.0070, 0.0069])
    erratic = run_session(scene, [0.003, 0.013, 0.004, 0.014, 0.003])
    show("steady examiner", steady)
    show("erratic examiner", erratic)


if __name__ == "__main__":
    main()
