"""Bake the bundled stiffness maps and compare what the fingertip would feel.

Stiffness is painted per vertex: the red channel positions each vertex
inside the preset's stiffness range, green does the same for damping, and
blue is ignored. The screen never shows these colors; a constant tint is
rendered instead, so a lesion is a purely haptic feature. This script
instantiates every bundled preset and prints the stiffness statistics that
the servo will sample.
"""

import numpy as np

from palpa.mesh import save_obj
from palpa.presets import list_presets, load_scene


def describe(name: str):
    preset, mesh, mrange, _ = load_scene(name)
    r = mesh.vertex_rgb[:, 0]
    k = mrange.k_min + r * (mrange.k_max - mrange.k_min)
    print(f"\n{preset.name} ({preset.kind}): {preset.description}")
    print(f"  stiffness range [{mrange.k_min:.0f}, {mrange.k_max:.0f}] N/m, "
          f"damping range [{mrange.b_min:.1f}, {mrange.b_max:.1f}] N*s/m")
    print(f"  baked k: min {k.min():7.1f}  mean {k.mean():7.1f}  max {k.max():7.1f} N/m")
    if preset.kind == "spot":
        softest = int(np.argmin(r))
        print(f"  softest vertex {softest} at {np.round(mesh.vertices[softest], 4)}")
    if preset.kind == "nodular":
        stiffest = int(np.argmax(r))
        print(f"  stiffest vertex {stiffest} at {np.round(mesh.vertices[stiffest], 4)}")
    return preset, mesh


def main():
    for name in list_presets():
        describe(name)

    # write one baked map to disk; the colored OBJ round-trips losslessly
    _, mesh, _, _ = load_scene("cirrhosis")
    out = "cirrhosis_baked.obj"
    save_obj(mesh, out)
    print(f"\nwrote {out} ({mesh.n_vertices} vertices with stiffness colors)")


if __name__ == "__main__":
    main()
