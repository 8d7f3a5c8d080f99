"""Triangle meshes with per-vertex RGB material codes.

Two file formats are accepted (exact grammar in docs/formats.md):

* OBJ with the vertex-color extension: ``v x y z r g b`` lines.
* PLY (ascii or binary_little_endian 1.0) with ``red``/``green``/``blue``
  vertex properties.

Color channels must land in [0, 1]. Files storing 8-bit colors (any channel
above 1) are divided by 255; floating colors pass through unchanged.
Positions are meters.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, MaterialError, ParseError

DEGENERATE_AREA = 1e-12  # m^2, triangles at or below this are rejected
NORMAL_UNIT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Immutable triangle mesh with per-vertex material codes.

    Attributes:
        vertices: (N, 3) float64 positions in meters.
        triangles: (M, 3) int32 vertex indices.
        vertex_rgb: (N, 3) float64 material codes, each channel in [0, 1].
        vertex_normals: (N, 3) float64 unit vectors.
        name: identifier used in trace headers.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_rgb: np.ndarray
    vertex_normals: np.ndarray
    name: str = "unnamed"

    def __post_init__(self):
        v = _freeze(np.asarray(self.vertices, dtype=np.float64), (-1, 3), "vertices")
        t = _freeze(np.asarray(self.triangles, dtype=np.int32), (-1, 3), "triangles")
        c = _freeze(np.asarray(self.vertex_rgb, dtype=np.float64), (-1, 3), "vertex_rgb")
        n = _freeze(np.asarray(self.vertex_normals, dtype=np.float64), (-1, 3), "vertex_normals")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "vertex_rgb", c)
        object.__setattr__(self, "vertex_normals", n)
        if len(c) != len(v) or len(n) != len(v):
            raise ValueError("vertex_rgb and vertex_normals must match vertex count")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def with_rgb(self, rgb: np.ndarray) -> "TriMesh":
        """New mesh re-using this geometry with a replaced color field."""
        return TriMesh(self.vertices, self.triangles, rgb, self.vertex_normals, self.name)


def _freeze(a: np.ndarray, shape, what: str) -> np.ndarray:
    if a.ndim != 2 or a.shape[1] != shape[1]:
        raise ValueError(f"{what} must have shape (*, {shape[1]}), got {a.shape}")
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_mesh."""

    invariant: str
    element: int  # vertex or triangle index, -1 when mesh-level
    detail: str = ""


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def face_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Unit normals per triangle, right-hand rule over the winding order."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    n = np.cross(b - a, c - a)
    norms = np.linalg.norm(n, axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        unit = np.where(norms > 0, n / norms, 0.0)
    return unit


def compute_vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted average of incident triangle normals, then normalized.

    The raw cross product of a triangle's edges has magnitude 2*area, so
    accumulating it unnormalized weights each face by area. Vertices with no
    incident triangle get +z.
    """
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    weighted = np.cross(b - a, c - a)
    acc = np.zeros_like(vertices)
    for col in range(3):
        np.add.at(acc, triangles[:, col], weighted)
    norms = np.linalg.norm(acc, axis=1, keepdims=True)
    out = np.divide(acc, norms, out=np.zeros_like(acc), where=norms > 1e-30)
    lonely = norms[:, 0] <= 1e-30
    out[lonely] = (0.0, 0.0, 1.0)
    return out


def validate_mesh(mesh: TriMesh) -> list[Violation]:
    """Check every TriMesh invariant; empty list means valid.

    Violations are data, not errors: each names the broken invariant and the
    offending vertex/triangle index.
    """
    out: list[Violation] = []
    nv = mesh.n_vertices

    if mesh.n_triangles < 1:
        out.append(Violation("mesh-nonempty", -1, "mesh has no triangles"))
        return out

    bad = np.nonzero((mesh.triangles < 0) | (mesh.triangles >= nv))[0]
    for ti in bad:
        out.append(Violation("triangle-index-bound", int(ti),
                             f"triangle {ti} references a vertex outside 0..{nv - 1}"))
    if len(bad):
        return out  # remaining checks index vertices through triangles

    lo = np.nonzero((mesh.vertex_rgb < 0.0).any(axis=1) | (mesh.vertex_rgb > 1.0).any(axis=1))[0]
    for vi in lo:
        out.append(Violation("rgb-channel-bound", int(vi),
                             f"vertex {vi} color {mesh.vertex_rgb[vi].tolist()} outside [0, 1]"))

    norms = np.linalg.norm(mesh.vertex_normals, axis=1)
    for vi in np.nonzero(np.abs(norms - 1.0) > NORMAL_UNIT_TOL)[0]:
        out.append(Violation("normal-unit-length", int(vi),
                             f"vertex {vi} normal has length {norms[vi]:.9g}"))

    areas = triangle_areas(mesh.vertices, mesh.triangles)
    for ti in np.nonzero(areas <= DEGENERATE_AREA)[0]:
        out.append(Violation("triangle-nondegenerate", int(ti),
                             f"triangle {ti} area {areas[ti]:.3g} m^2"))
    return out


def load_mesh(path, format: str | None = None) -> TriMesh:
    """Load a colored triangle mesh from an OBJ or PLY file.

    Args:
        path: file to read.
        format: "obj" or "ply"; inferred from the extension when None.

    Returns:
        A TriMesh satisfying all invariants; normals are taken from the file
        when present for every vertex, otherwise recomputed from geometry.

    Raises:
        ParseError: the file does not match the documented grammar.
        MaterialError: colors missing, or a channel outside [0, 1] after the
            8-bit division rule.
        GeometryError: dangling vertex index or degenerate triangle.
    """
    path = Path(path)
    if format is None:
        format = path.suffix.lstrip(".").lower()
    if format not in ("obj", "ply"):
        raise ParseError(f"unsupported mesh format {format!r}")

    if format == "obj":
        verts, tris, colors, normals = _parse_obj(path)
    else:
        verts, tris, colors, normals = _parse_ply(path)

    return _assemble(path.stem, verts, tris, colors, normals)


def _assemble(name, verts, tris, colors, normals) -> TriMesh:
    verts = np.asarray(verts, dtype=np.float64).reshape(-1, 3)
    tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
    if len(tris) < 1:
        raise GeometryError("mesh has no triangles")
    if len(verts) < 1:
        raise GeometryError("mesh has no vertices")
    if tris.min() < 0 or tris.max() >= len(verts):
        bad = int(np.nonzero((tris < 0) | (tris >= len(verts)))[0][0])
        raise GeometryError(f"triangle {bad} references a vertex outside 0..{len(verts) - 1}")

    colors = np.asarray(colors, dtype=np.float64).reshape(-1, 3)
    colors = _normalize_colors(colors)

    areas = triangle_areas(verts, tris)
    degen = np.nonzero(areas <= DEGENERATE_AREA)[0]
    if len(degen):
        raise GeometryError(f"triangle {int(degen[0])} is degenerate (area {areas[degen[0]]:.3g} m^2)")

    if normals is not None and len(normals) == len(verts):
        normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        lens = np.linalg.norm(normals, axis=1, keepdims=True)
        computed = compute_vertex_normals(verts, tris)
        # near-zero stored normals fall back to the geometric one
        normals = np.where(lens > 1e-12, np.divide(normals, lens, where=lens > 1e-12), computed)
    else:
        normals = compute_vertex_normals(verts, tris)

    return TriMesh(verts, tris, colors, normals, name=name)


def _normalize_colors(colors: np.ndarray) -> np.ndarray:
    if np.any(colors < 0.0):
        vi = int(np.nonzero((colors < 0.0).any(axis=1))[0][0])
        raise MaterialError(f"vertex {vi} has a negative color channel")
    if np.any(colors > 1.0):
        colors = colors / 255.0  # 8-bit encoding: any channel above 1 switches the whole file
        if np.any(colors > 1.0):
            vi = int(np.nonzero((colors > 1.0).any(axis=1))[0][0])
            raise MaterialError(f"vertex {vi} color outside [0, 255] in 8-bit mode")
    return colors


# --- OBJ ------------------------------------------------------------------

def _parse_obj(path: Path):
    verts: list[list[float]] = []
    colors: list[list[float]] = []
    normals: list[list[float]] = []
    tris: list[list[int]] = []
    missing_color = False

    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not a text OBJ file ({e})") from None

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        key = parts[0]
        if key == "v":
            vals = _floats(parts[1:], path, ln)
            if len(vals) == 3:
                verts.append(vals)
                colors.append(None)  # type: ignore[arg-type]
                missing_color = True
            elif len(vals) == 6:
                verts.append(vals[:3])
                colors.append(vals[3:])
            else:
                raise ParseError(f"{path}:{ln}: 'v' line needs 3 coords or 3 coords + 3 colors")
        elif key == "vn":
            vals = _floats(parts[1:], path, ln)
            if len(vals) != 3:
                raise ParseError(f"{path}:{ln}: 'vn' line needs 3 components")
            normals.append(vals)
        elif key == "f":
            idx = []
            for tok in parts[1:]:
                head = tok.split("/")[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ParseError(f"{path}:{ln}: bad face index {tok!r}") from None
                if i < 0:
                    raise ParseError(f"{path}:{ln}: negative (relative) face indices unsupported")
                idx.append(i - 1)
            if len(idx) < 3:
                raise ParseError(f"{path}:{ln}: face with fewer than 3 vertices")
            for k in range(1, len(idx) - 1):  # fan-triangulate n-gons
                tris.append([idx[0], idx[k], idx[k + 1]])
        # vt, o, g, s, usemtl, mtllib are irrelevant here and skipped

    if not verts:
        raise ParseError(f"{path}: no vertices found")
    if missing_color:
        raise MaterialError(f"{path}: vertex colors missing on one or more 'v' lines")
    norm_arr = np.asarray(normals) if len(normals) == len(verts) else None
    return verts, tris, colors, norm_arr


def _floats(tokens, path, ln):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"{path}:{ln}: expected numeric fields, got {tokens!r}") from None


def save_obj(mesh: TriMesh, path) -> None:
    """Write the colored-OBJ form read back by load_mesh (lossless floats)."""
    lines = [f"# palpa mesh: {mesh.name}", f"o {mesh.name}"]
    for p, c in zip(mesh.vertices.tolist(), mesh.vertex_rgb.tolist()):
        lines.append(f"v {p[0]!r} {p[1]!r} {p[2]!r} {c[0]!r} {c[1]!r} {c[2]!r}")
    for n in mesh.vertex_normals.tolist():
        lines.append(f"vn {n[0]!r} {n[1]!r} {n[2]!r}")
    for t in mesh.triangles:
        lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- PLY ------------------------------------------------------------------

_PLY_TYPES = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def _parse_ply(path: Path):
    blob = path.read_bytes()
    end = blob.find(b"end_header\n")
    if not blob.startswith(b"ply") or end < 0:
        raise ParseError(f"{path}: missing ply header")
    header = blob[:end].decode("ascii", errors="replace").splitlines()
    body = blob[end + len(b"end_header\n"):]

    fmt = None
    elements = []  # (name, count, [(prop_name, type) or ("list", count_t, idx_t, name)])
    for line in header[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] not in ("ascii", "binary_little_endian") or parts[2] != "1.0":
                raise ParseError(f"{path}: unsupported ply format {' '.join(parts[1:])}")
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError(f"{path}: property before any element")
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append((parts[2], parts[1]))
    if fmt is None:
        raise ParseError(f"{path}: ply header lacks a format line")

    data = {}
    offset = 0
    ascii_tokens = body.decode("ascii", errors="replace").split() if fmt == "ascii" else None
    tok_i = 0
    for name, count, props in elements:
        if fmt == "ascii":
            rows, tok_i = _ply_ascii_rows(ascii_tokens, tok_i, count, props, path)
        else:
            rows, offset = _ply_binary_rows(body, offset, count, props, path)
        data[name] = (props, rows)

    if "vertex" not in data or "face" not in data:
        raise ParseError(f"{path}: ply needs vertex and face elements")

    vprops, vrows = data["vertex"]
    names = [p[0] for p in vprops]
    for req in ("x", "y", "z"):
        if req not in names:
            raise ParseError(f"{path}: vertex element lacks property {req!r}")
    if not all(c in names for c in ("red", "green", "blue")):
        raise MaterialError(f"{path}: vertex colors (red/green/blue properties) missing")

    def col(prop):
        i = names.index(prop)
        return np.array([r[i] for r in vrows], dtype=np.float64)

    verts = np.stack([col("x"), col("y"), col("z")], axis=1)
    colors = np.stack([col("red"), col("green"), col("blue")], axis=1)
    ctype = vprops[names.index("red")][1]
    if ctype in ("uchar", "uint8"):
        colors = colors / 255.0

    normals = None
    if all(c in names for c in ("nx", "ny", "nz")):
        normals = np.stack([col("nx"), col("ny"), col("nz")], axis=1)

    tris = []
    for row in data["face"][1]:
        idx = row[0]
        if len(idx) < 3:
            raise ParseError(f"{path}: face with fewer than 3 vertices")
        for k in range(1, len(idx) - 1):
            tris.append([idx[0], idx[k], idx[k + 1]])

    return verts, tris, colors, normals


def _ply_ascii_rows(tokens, i, count, props, path):
    rows = []
    for _ in range(count):
        row = []
        for p in props:
            if p[0] == "list":
                try:
                    n = int(tokens[i]); i += 1
                    row.append([int(tokens[i + k]) for k in range(n)])
                    i += n
                except (IndexError, ValueError):
                    raise ParseError(f"{path}: truncated or non-numeric ascii ply body") from None
            else:
                try:
                    row.append(float(tokens[i])); i += 1
                except (IndexError, ValueError):
                    raise ParseError(f"{path}: truncated or non-numeric ascii ply body") from None
        rows.append(row)
    return rows, i


def _ply_binary_rows(body, off, count, props, path):
    rows = []
    for _ in range(count):
        row = []
        for p in props:
            try:
                if p[0] == "list":
                    cf, xf = _PLY_TYPES[p[1]], _PLY_TYPES[p[2]]
                    (n,) = struct.unpack_from("<" + cf, body, off)
                    off += struct.calcsize(cf)
                    vals = struct.unpack_from("<" + xf * n, body, off)
                    off += struct.calcsize(xf) * n
                    row.append(list(vals))
                else:
                    f = _PLY_TYPES[p[1]]
                    (v,) = struct.unpack_from("<" + f, body, off)
                    off += struct.calcsize(f)
                    row.append(v)
            except (struct.error, KeyError):
                raise ParseError(f"{path}: truncated or mistyped binary ply body") from None
        rows.append(row)
    return rows, off
