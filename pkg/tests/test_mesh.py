import struct

import numpy as np
import pytest

from palpa.errors import GeometryError, MaterialError, ParseError
from palpa.mesh import (TriMesh, compute_vertex_normals, load_mesh, save_obj,
                        triangle_areas, validate_mesh)

from conftest import build_mesh


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestObjLoading:
    def test_vertices_and_faces(self, tmp_path):
        p = write(tmp_path / "m.obj", """
# comment
v 0 0 0 1 1 1
v 1 0 0 1 1 1
v 0 1 0 1 1 1
f 1 2 3
""")
        mesh = load_mesh(p)
        assert mesh.n_vertices == 3
        assert mesh.n_triangles == 1
        assert np.array_equal(mesh.triangles, [[0, 1, 2]])

    def test_vertex_colors_parsed(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 0.2 0.4 0.0\nv 1 0 0 0.2 0.4 0.0\nv 0 1 0 0.2 0.4 0.0\nf 1 2 3\n")
        mesh = load_mesh(p)
        assert np.allclose(mesh.vertex_rgb[:, 0], 0.2)
        assert np.allclose(mesh.vertex_rgb[:, 1], 0.4)

    def test_missing_colors_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
        with pytest.raises(MaterialError):
            load_mesh(p)

    def test_partially_colored_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 1 1 1\nv 1 0 0\nv 0 1 0 1 1 1\nf 1 2 3\n")
        with pytest.raises(MaterialError):
            load_mesh(p)

    def test_quad_faces_fan_triangulated(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 1 1 1\nv 1 0 0 1 1 1\nv 1 1 0 1 1 1\nv 0 1 0 1 1 1\n"
                  "f 1 2 3 4\n")
        mesh = load_mesh(p)
        assert mesh.n_triangles == 2
        assert np.array_equal(mesh.triangles, [[0, 1, 2], [0, 2, 3]])

    def test_face_with_slash_syntax(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 1 1 1\nv 1 0 0 1 1 1\nv 0 1 0 1 1 1\nvt 0 0\nf 1/1 2/1 3/1\n")
        mesh = load_mesh(p)
        assert mesh.n_triangles == 1

    def test_negative_indices_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 1 1 1\nv 1 0 0 1 1 1\nv 0 1 0 1 1 1\nf -3 -2 -1\n")
        with pytest.raises(ParseError):
            load_mesh(p)

    def test_out_of_range_index_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 1 1 1\nv 1 0 0 1 1 1\nv 0 1 0 1 1 1\nf 1 2 4\n")
        with pytest.raises(GeometryError):
            load_mesh(p)

    def test_wrong_vertex_arity_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj", "v 0 0\nf 1 1 1\n")
        with pytest.raises(ParseError):
            load_mesh(p)

    def test_byte_scale_colors_normalized(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 204 51 0\nv 1 0 0 204 51 0\nv 0 1 0 204 51 0\nf 1 2 3\n")
        mesh = load_mesh(p)
        assert np.allclose(mesh.vertex_rgb[0], [0.8, 0.2, 0.0])

    def test_negative_color_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj",
                  "v 0 0 0 -0.1 0 0\nv 1 0 0 0 0 0\nv 0 1 0 0 0 0\nf 1 2 3\n")
        with pytest.raises(MaterialError):
            load_mesh(p)

    def test_unknown_format_rejected(self, tmp_path):
        p = write(tmp_path / "m.xyz", "whatever")
        with pytest.raises(ParseError):
            load_mesh(p)


class TestPlyLoading:
    def test_ascii_ply_with_colors(self, tmp_path):
        p = write(tmp_path / "m.ply", """ply
format ascii 1.0
element vertex 3
property float x
property float y
property float z
property uchar red
property uchar green
property uchar blue
element face 1
property list uchar int vertex_indices
end_header
0 0 0 255 0 0
1 0 0 255 0 0
0 1 0 255 0 0
3 0 1 2
""")
        mesh = load_mesh(p)
        assert mesh.n_triangles == 1
        assert np.allclose(mesh.vertex_rgb[:, 0], 1.0)
        assert np.allclose(mesh.vertex_rgb[:, 1], 0.0)

    def test_binary_ply_round_trip(self, tmp_path):
        head = b"""ply
format binary_little_endian 1.0
element vertex 3
property double x
property double y
property double z
property uchar red
property uchar green
property uchar blue
element face 1
property list uchar int32 vertex_indices
end_header
"""
        body = b"".join(struct.pack("<3dBBB", *v, 128, 64, 0)
                        for v in [(0, 0, 0), (1, 0, 0), (0, 1, 0)])
        body += struct.pack("<B3i", 3, 0, 1, 2)
        p = tmp_path / "m.ply"
        p.write_bytes(head + body)
        mesh = load_mesh(p)
        assert mesh.n_vertices == 3
        assert np.array_equal(mesh.triangles, [[0, 1, 2]])
        assert np.allclose(mesh.vertex_rgb[0], [128 / 255, 64 / 255, 0.0])
        assert abs(mesh.vertex_rgb[0, 0] - 0.50196) < 1e-5

    def test_truncated_binary_rejected(self, tmp_path):
        head = (b"ply\nformat binary_little_endian 1.0\n"
                b"element vertex 2\nproperty float x\nproperty float y\n"
                b"property float z\nproperty uchar red\nproperty uchar green\n"
                b"property uchar blue\nelement face 0\n"
                b"property list uchar int vertex_indices\nend_header\n")
        p = tmp_path / "m.ply"
        p.write_bytes(head + struct.pack("<3fBBB", 0, 0, 0, 1, 1, 1))  # one vertex missing
        with pytest.raises(ParseError):
            load_mesh(p)


class TestSaveLoad:
    def test_obj_round_trip_is_lossless(self, tmp_path, octahedron):
        path = tmp_path / "octa.obj"
        save_obj(octahedron, path)
        again = load_mesh(path)
        assert np.array_equal(again.vertices, octahedron.vertices)
        assert np.array_equal(again.triangles, octahedron.triangles)
        assert np.array_equal(again.vertex_rgb, octahedron.vertex_rgb)
        assert np.array_equal(again.vertex_normals, octahedron.vertex_normals)

    def test_bundled_asset_loads_clean(self, liver):
        assert liver.n_triangles == 3120
        assert validate_mesh(liver) == []
        extent = liver.vertices.max(axis=0) - liver.vertices.min(axis=0)
        assert np.all(extent <= 0.3)


class TestValidation:
    def test_clean_mesh_passes(self, octahedron):
        assert validate_mesh(octahedron) == []

    def test_degenerate_triangle_flagged(self):
        mesh = build_mesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
        names = {v.invariant for v in validate_mesh(mesh)}
        assert "triangle-nondegenerate" in names

    def test_rgb_out_of_range_flagged(self, single_triangle):
        rgb = single_triangle.vertex_rgb.copy()
        rgb[0, 0] = 1.5
        bad = single_triangle.with_rgb(rgb.clip(0, 2))  # bypass loader checks
        names = {v.invariant for v in validate_mesh(bad)}
        assert "rgb-channel-bound" in names

    def test_non_unit_normal_flagged(self, single_triangle):
        mesh = TriMesh(vertices=single_triangle.vertices,
                       triangles=single_triangle.triangles,
                       vertex_rgb=single_triangle.vertex_rgb,
                       vertex_normals=single_triangle.vertex_normals * 2.0,
                       name="bad")
        names = {v.invariant for v in validate_mesh(mesh)}
        assert "normal-unit-length" in names

    def test_empty_file_rejected(self, tmp_path):
        p = write(tmp_path / "m.obj", "v 0 0 0 1 1 1\n")
        with pytest.raises(GeometryError):
            load_mesh(p)

    def test_triangle_free_mesh_flagged(self):
        mesh = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                          np.zeros((0, 3), dtype=np.int32))
        names = {v.invariant for v in validate_mesh(mesh)}
        assert "mesh-nonempty" in names


class TestNormals:
    def test_flat_plane_normals_point_up(self, square):
        assert np.allclose(square.vertex_normals, [0, 0, 1])

    def test_normals_unit_length(self, octahedron):
        lens = np.linalg.norm(octahedron.vertex_normals, axis=1)
        assert np.allclose(lens, 1.0, atol=1e-12)

    def test_area_weighting(self):
        # vertex 0 shared by a big +z triangle and a small +x one: the big
        # face dominates the average
        verts = [[0, 0, 0], [4, 0, 0], [0, 4, 0], [0, 0.2, -0.2]]
        tris = [[0, 1, 2], [0, 3, 2]]
        n = compute_vertex_normals(np.array(verts, float), np.array(tris, np.int32))
        assert n[0, 2] > abs(n[0, 0])

    def test_lonely_vertex_gets_default(self):
        mesh = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [9, 9, 9]],
                          [[0, 1, 2]])
        assert np.allclose(mesh.vertex_normals[3], [0, 0, 1])


def test_triangle_areas():
    verts = np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0]], float)
    tris = np.array([[0, 1, 2]], np.int32)
    assert np.allclose(triangle_areas(verts, tris), [2.0])
