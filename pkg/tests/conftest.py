import numpy as np
import pytest

from palpa.mesh import TriMesh, compute_vertex_normals


def build_mesh(vertices, triangles, rgb=None, name="test") -> TriMesh:
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int32)
    if rgb is None:
        rgb = np.tile([0.5, 0.5, 0.0], (len(vertices), 1))
    normals = compute_vertex_normals(vertices, triangles)
    return TriMesh(vertices=vertices, triangles=triangles,
                   vertex_rgb=np.asarray(rgb, dtype=np.float64),
                   vertex_normals=normals, name=name)


@pytest.fixture
def single_triangle() -> TriMesh:
    # right triangle in the z=0 plane, outward normal +z
    return build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


@pytest.fixture
def square() -> TriMesh:
    # unit square in the z=0 plane split along the diagonal
    return build_mesh([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]],
                      [[0, 1, 2], [0, 2, 3]])


@pytest.fixture
def octahedron() -> TriMesh:
    v = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    t = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
         [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return build_mesh(v, t, name="octa")


@pytest.fixture(scope="session")
def healthy_scene():
    from palpa.presets import load_scene
    return load_scene("healthy")


@pytest.fixture(scope="session")
def liver(healthy_scene):
    return healthy_scene[1]


def apex_of(mesh):
    i = int(np.argmax(mesh.vertices[:, 2]))
    return i, mesh.vertices[i], mesh.vertex_normals[i]
