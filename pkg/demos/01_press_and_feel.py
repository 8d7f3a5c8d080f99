"""Press straight into the organ and watch the reaction force grow.

The servo runs at a fixed 1 kHz. Each tick resolves the closest surface
point to the instrument tip, samples the stiffness map there, and returns a
spring-damper force along the surface normal. This script pushes 10 mm into
the healthy preset over one second and prints the force every 100 ms, then
repeats the press over the soft spot of the cyst preset so you can feel the
difference the stiffness map makes.
"""

import numpy as np

from palpa.gestures import press_cycle_waypoints
from palpa.presets import load_scene
from palpa.timeline import run_ticks, waypoint_poses


def press(scene_name: str, vertex: int, depth: float = 0.010):
    preset, mesh, mrange, _ = load_scene(scene_name)
    target = mesh.vertices[vertex]
    normal = mesh.vertex_normals[vertex] / np.linalg.norm(mesh.vertex_normals[vertex])
    waypoints = press_cycle_waypoints(target, normal, depth=depth, period=2.0, count=1)
    states, outputs = run_ticks(mesh, mrange, waypoint_poses(waypoints))
    print(f"\n{preset.name}: {preset.description}")
    print(f"pressing {depth * 1e3:.0f} mm at vertex {vertex}")
    for tick in range(0, len(outputs), 100):
        force = float(np.linalg.norm(outputs[tick].force))
        depth_now = outputs[tick].contact.penetration if outputs[tick].contact else 0.0
        bar = "#" * int(force * 12)
        print(f"  t={states[tick].t:4.1f} s  depth={depth_now * 1e3:5.2f} mm  "
              f"force={force:5.3f} N  {bar}")
    peak = max(float(np.linalg.norm(o.force)) for o in outputs)
    print(f"  peak {peak:.3f} N")
    return peak


def main():
    # the cyst preset softens a patch around one vertex; find it from the map
    _, cyst_mesh, _, _ = load_scene("cyst")
    spot = int(np.argmin(cyst_mesh.vertex_rgb[:, 0]))

    healthy_peak = press("healthy", spot)
    cyst_peak = press("cyst", spot)
    print(f"\nsame gesture, same spot: healthy {healthy_peak:.3f} N "
          f"vs cyst {cyst_peak:.3f} N ({healthy_peak / cyst_peak:.1f}x stiffer)")
    print("the lesion is invisible on screen; only the force map changed")


if __name__ == "__main__":
    main()
