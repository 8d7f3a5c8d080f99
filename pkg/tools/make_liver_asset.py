"""Generate the bundled organ mesh (about 3000 triangles) deterministically.

Builds a UV sphere, sculpts it into a lobed, flattened organ shape with a
few smooth analytic deformations, orients all faces outward, paints the
default tissue colors, and writes src/palpa/assets/liver_3k.obj. Also
prints the apex vertex (useful as a soft-spot center for presets) and the
bounding box. Run from the repository root:

    python tools/make_liver_asset.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from palpa.mesh import TriMesh, compute_vertex_normals, save_obj, validate_mesh

N_LAT = 40   # latitude bands (poles are single vertices)
N_LON = 40   # longitude steps
BASE_RGB = (0.8, 0.25, 0.0)
OUT = Path(__file__).resolve().parents[1] / "src" / "palpa" / "assets" / "liver_3k.obj"


def unit_sphere():
    verts = [(0.0, 0.0, 1.0)]
    for i in range(1, N_LAT):
        theta = np.pi * i / N_LAT
        for j in range(N_LON):
            phi = 2.0 * np.pi * j / N_LON
            verts.append((np.sin(theta) * np.cos(phi),
                          np.sin(theta) * np.sin(phi),
                          np.cos(theta)))
    verts.append((0.0, 0.0, -1.0))
    south = len(verts) - 1

    def vid(i, j):
        return 1 + (i - 1) * N_LON + (j % N_LON)

    tris = []
    for j in range(N_LON):
        tris.append((0, vid(1, j), vid(1, j + 1)))
    for i in range(1, N_LAT - 1):
        for j in range(N_LON):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    for j in range(N_LON):
        tris.append((south, vid(N_LAT - 1, j + 1), vid(N_LAT - 1, j)))
    return np.array(verts), np.array(tris, dtype=np.int32)


def sculpt(unit: np.ndarray) -> np.ndarray:
    """Smooth, star-shaped deformation of the unit sphere into an organ."""
    x, y, z = unit[:, 0], unit[:, 1], unit[:, 2]
    px = 0.130 * x * (1.0 + 0.12 * y)
    py = 0.085 * y * (1.0 - 0.15 * x)
    pz = 0.055 * z * (1.0 - 0.22 * x * x + 0.08 * y)
    # shallow dent on one lobe's underside, like the gallbladder fossa
    dent = 0.006 * np.exp(-((x - 0.55) ** 2 + y * y) / 0.35)
    pz = pz + np.where(z < 0.0, dent, 0.0)
    return np.stack([px, py, pz], axis=1)


def main():
    unit, tris = unit_sphere()
    verts = sculpt(unit)

    # consistent orientation: every edge must appear once per direction
    edges = set()
    for a, b, c in tris.tolist():
        for e in ((a, b), (b, c), (c, a)):
            if e in edges:
                raise SystemExit(f"edge {e} used twice in the same direction")
            edges.add(e)
    for a, b in edges:
        if (b, a) not in edges:
            raise SystemExit(f"boundary edge {(a, b)}, surface is not closed")

    # outward: signed volume via the divergence theorem must be positive
    va, vb, vc = (verts[tris[:, k]] for k in range(3))
    volume = float(np.einsum("ij,ij->i", va, np.cross(vb, vc)).sum()) / 6.0
    if volume < 0:
        tris = tris[:, ::-1].copy()
        volume = -volume
    print(f"  enclosed volume {volume * 1e6:.1f} cm^3")

    normals = compute_vertex_normals(verts, tris)
    rgb = np.tile(np.array(BASE_RGB), (len(verts), 1))
    mesh = TriMesh(vertices=verts, triangles=tris, vertex_rgb=rgb,
                   vertex_normals=normals, name="liver_3k")
    problems = validate_mesh(mesh)
    if problems:
        raise SystemExit(f"invalid mesh: {problems[:3]}")

    OUT.parent.mkdir(parents=True, exist_ok=True)
    save_obj(mesh, OUT)

    apex = int(np.argmax(verts[:, 2]))
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    print(f"wrote {OUT}")
    print(f"  vertices={len(verts)} triangles={len(tris)}")
    print(f"  bbox min={lo.tolist()} max={hi.tolist()} extent={(hi - lo).tolist()}")
    print(f"  apex vertex {apex} at {verts[apex].tolist()}")
    print(f"  apex normal {normals[apex].tolist()}")


if __name__ == "__main__":
    main()
