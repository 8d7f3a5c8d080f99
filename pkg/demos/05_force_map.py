"""Turn a palpation session into a 3D force map you can open in a viewer.

Every tap in a session leaves one cone on the map: the apex sits at the
contact point on the surface, the axis points along the applied force, and
the height and radius grow linearly with the peak force (12 mm and 4 mm per
newton by default). A glance at the exported OBJ shows where the examiner
pressed and how hard, without replaying anything.
"""

import numpy as np

from palpa.forcemap import cones_from_trace, export_obj, save_cones
from palpa.gestures import press_cycle_waypoints
from palpa.presets import load_scene
from palpa.recorder import TraceHeader, record
from palpa.timeline import run_ticks, waypoint_poses


def main():
    preset, mesh, mrange, kernel = load_scene("cirrhosis")
    top = int(np.argmax(mesh.vertices[:, 2]))
    n = mesh.vertex_normals[top] / np.linalg.norm(mesh.vertex_normals[top])

    # five presses marching across the organ at varying depth
    waypoints = press_cycle_waypoints(mesh.vertices[top], n, depth=0.007,
                                      period=1.4, count=5,
                                      drift=[0.012, -0.004, 0.0])
    states, outputs = run_ticks(mesh, mrange, waypoint_poses(waypoints))
    header = TraceHeader(mesh_name=preset.mesh_name, preset=preset.name,
                         material_range=mrange, kernel=kernel)
    trace = record(zip(states, outputs), header)

    cones = cones_from_trace(trace)
    print(f"{len(cones)} taps -> {len(cones)} cones")
    for c in cones:
        print(f"  t={c.t_peak:5.2f} s  apex {np.round(c.apex, 3)}  "
              f"peak {c.peak_force:4.2f} N  height {c.height * 1e3:4.1f} mm")

    save_cones(cones, "forcemap.jsonl")
    export_obj(cones, "forcemap.obj")
    print("wrote forcemap.jsonl (data) and forcemap.obj (geometry)")


if __name__ == "__main__":
    main()
