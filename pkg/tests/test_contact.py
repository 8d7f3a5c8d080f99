"""Contact resolution and the spring-damper reaction force.

The closest-point oracle here is deliberately built differently from the
library: per triangle it solves the unconstrained 2x2 normal equations and
falls back to enumerating the three clamped edge projections, instead of
classifying Voronoi regions. Agreement between the two is the test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palpa.haptics import (ContactState, ToolState, compute_force,
                           resolve_contact, servo_step, surface_index)
from palpa.materials import MaterialRange

from conftest import build_mesh


def make_octahedron():
    v = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    t = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
         [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return build_mesh(v, t)


def make_square():
    return build_mesh([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]],
                      [[0, 1, 2], [0, 2, 3]])


OCTA = make_octahedron()
SQUARE = make_square()


def closest_on_triangle_oracle(p, a, b, c):
    ab, ac, ap = b - a, c - a, p - a
    m = np.array([[ab @ ab, ab @ ac], [ab @ ac, ac @ ac]])
    rhs = np.array([ab @ ap, ac @ ap])
    s, t = np.linalg.solve(m, rhs)
    if s >= 0 and t >= 0 and s + t <= 1:
        return a + s * ab + t * ac
    best, best_d2 = None, np.inf
    for p0, p1 in ((a, b), (a, c), (b, c)):
        e = p1 - p0
        u = np.clip(((p - p0) @ e) / (e @ e), 0.0, 1.0)
        cand = p0 + u * e
        d2 = float((p - cand) @ (p - cand))
        if d2 < best_d2:
            best, best_d2 = cand, d2
    return best


def closest_on_mesh_oracle(mesh, p):
    best, best_d2, best_ti = None, np.inf, -1
    for ti, (i, j, k) in enumerate(mesh.triangles):
        cand = closest_on_triangle_oracle(
            p, mesh.vertices[i], mesh.vertices[j], mesh.vertices[k])
        d2 = float((p - cand) @ (p - cand))
        if d2 < best_d2 - 1e-15:
            best, best_d2, best_ti = cand, d2, ti
    return best_ti, best, best_d2


class TestClosestPoint:
    @pytest.mark.parametrize("seed", range(4))
    def test_agrees_with_oracle_octahedron(self, octahedron, seed):
        idx = surface_index(octahedron)
        rng = np.random.default_rng(seed)
        for p in rng.uniform(-1.5, 1.5, size=(50, 3)):
            ti, proxy, bary, d2 = idx.closest(p)
            _, want, want_d2 = closest_on_mesh_oracle(octahedron, p)
            assert d2 == pytest.approx(want_d2, abs=1e-12)
            assert np.allclose(proxy, want, atol=1e-7)

    def test_agrees_with_oracle_liver(self, liver):
        idx = surface_index(liver)
        rng = np.random.default_rng(7)
        lo = liver.vertices.min(axis=0) - 0.02
        hi = liver.vertices.max(axis=0) + 0.02
        for p in rng.uniform(lo, hi, size=(25, 3)):
            ti, proxy, bary, d2 = idx.closest(p)
            _, want, want_d2 = closest_on_mesh_oracle(liver, p)
            assert d2 == pytest.approx(want_d2, abs=1e-12)

    def test_tie_broken_by_smallest_triangle(self, square):
        # equidistant from both triangles along their shared diagonal
        idx = surface_index(square)
        ti, proxy, bary, d2 = idx.closest(np.array([0.5, 0.5, -0.1]))
        assert ti == 0
        assert np.allclose(proxy, [0.5, 0.5, 0.0])

    def test_interior_point_barycentric(self, single_triangle):
        idx = surface_index(single_triangle)
        ti, proxy, bary, d2 = idx.closest(np.array([0.25, 0.25, 0.5]))
        assert ti == 0
        assert np.allclose(proxy, [0.25, 0.25, 0.0])
        assert bary.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(bary >= 0.0)
        corners = single_triangle.vertices[single_triangle.triangles[ti]]
        assert np.allclose(bary @ corners, proxy, atol=1e-12)

    def test_vertex_region(self, single_triangle):
        idx = surface_index(single_triangle)
        ti, proxy, bary, d2 = idx.closest(np.array([-1.0, -1.0, 0.0]))
        assert np.allclose(proxy, [0.0, 0.0, 0.0])
        assert np.allclose(bary, [1.0, 0.0, 0.0])

    def test_edge_region(self, single_triangle):
        idx = surface_index(single_triangle)
        ti, proxy, bary, d2 = idx.closest(np.array([0.5, -2.0, 0.0]))
        assert np.allclose(proxy, [0.5, 0.0, 0.0])
        assert np.allclose(bary, [0.5, 0.5, 0.0])


class TestResolveContact:
    def test_free_space_none(self, square):
        assert resolve_contact(square, [0.5, 0.5, 0.2]) is None

    def test_penetration_depth(self, square):
        c = resolve_contact(square, [0.5, 0.5, -0.003])
        assert c is not None
        assert c.penetration == pytest.approx(0.003, abs=1e-15)
        assert np.allclose(c.proxy, [0.5, 0.5, 0.0])
        assert np.allclose(c.normal, [0.0, 0.0, 1.0])

    def test_grazing_touch_counts_as_contact(self, square):
        c = resolve_contact(square, [0.5, 0.5, 0.0])
        assert c is not None
        assert c.penetration == 0.0

    def test_material_left_unsampled(self, square):
        c = resolve_contact(square, [0.5, 0.5, -0.001])
        assert c.material is None

    def test_patch_continuation_matches_global(self, liver):
        # slide along the surface; warm-started resolution must agree with a
        # cold global query at every step
        top = int(np.argmax(liver.vertices[:, 2]))
        start = liver.vertices[top]
        prev = None
        for step in range(40):
            p = start + np.array([0.0015 * step, 0.0008 * step, 0.0]) \
                - liver.vertex_normals[top] * 0.004
            warm = resolve_contact(liver, p, previous=prev)
            cold = resolve_contact(liver, p, previous=None)
            assert (warm is None) == (cold is None)
            if warm is not None:
                assert warm.penetration == pytest.approx(cold.penetration, abs=1e-12)
                assert np.allclose(warm.proxy, cold.proxy, atol=1e-9)
                prev = warm
            else:
                prev = None

    def test_stale_previous_triangle_tolerated(self, square):
        ghost = ContactState(triangle=99, bary=np.array([1.0, 0.0, 0.0]),
                             proxy=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]),
                             penetration=0.0)
        c = resolve_contact(square, [0.5, 0.5, -0.001], previous=ghost)
        assert c is not None and c.penetration == pytest.approx(0.001, abs=1e-15)

    @given(st.integers(0, 300))
    @settings(max_examples=60, deadline=None)
    def test_warm_start_never_changes_answer(self, seed):
        rng = np.random.default_rng(seed)
        p1 = rng.uniform(-1.2, 1.2, size=3)
        p2 = p1 + rng.uniform(-0.05, 0.05, size=3)
        prev = resolve_contact(OCTA, p1)
        warm = resolve_contact(OCTA, p2, previous=prev)
        cold = resolve_contact(OCTA, p2)
        assert (warm is None) == (cold is None)
        if warm is not None:
            assert warm.penetration == pytest.approx(cold.penetration, abs=1e-12)


def tool(p, v=(0, 0, 0), t=0.0):
    return ToolState(t=t, position=np.asarray(p, dtype=float),
                     orientation=np.array([1.0, 0, 0, 0]),
                     velocity=np.asarray(v, dtype=float))


class TestServoStep:
    def test_free_space_zero_force(self, square):
        out = servo_step(square, MaterialRange(), tool([0.5, 0.5, 0.1]))
        assert np.array_equal(out.force, np.zeros(3))
        assert out.contact is None

    def test_pure_spring_exact(self, square):
        # rgb (0.5, 0.5, 0) with k in [0, 500] samples k = 250 exactly
        rng = MaterialRange(k_min=0.0, k_max=500.0, b_min=0.0, b_max=0.0)
        out = servo_step(square, rng, tool([0.5, 0.5, -0.004]))
        assert float(np.linalg.norm(out.force)) == 250.0 * out.contact.penetration

    def test_force_along_normal(self, square):
        out = servo_step(square, MaterialRange(), tool([0.5, 0.5, -0.004]))
        f = out.force
        assert f[0] == 0.0 and f[1] == 0.0 and f[2] > 0.0

    def test_damping_opposes_outgoing_motion(self, square):
        rng = MaterialRange(k_min=200.0, k_max=200.0, b_min=1.0, b_max=1.0)
        pressing = servo_step(square, rng, tool([0.5, 0.5, -0.004], v=[0, 0, -0.05]))
        still = servo_step(square, rng, tool([0.5, 0.5, -0.004]))
        retracting = servo_step(square, rng, tool([0.5, 0.5, -0.004], v=[0, 0, 0.05]))
        fp = np.linalg.norm(pressing.force)
        fs = np.linalg.norm(still.force)
        fr = np.linalg.norm(retracting.force)
        assert fp > fs > fr

    def test_never_pulls_inward(self, square):
        rng = MaterialRange(k_min=10.0, k_max=10.0, b_min=2.0, b_max=2.0)
        out = servo_step(square, rng, tool([0.5, 0.5, -0.001], v=[0, 0, 5.0]))
        assert np.array_equal(out.force, np.zeros(3))

    def test_tangential_velocity_no_damping_effect(self, square):
        rng = MaterialRange(k_min=200.0, k_max=200.0, b_min=1.5, b_max=1.5)
        still = servo_step(square, rng, tool([0.5, 0.5, -0.004]))
        sliding = servo_step(square, rng, tool([0.5, 0.5, -0.004], v=[0.3, -0.2, 0.0]))
        assert np.array_equal(still.force, sliding.force)

    def test_deeper_press_stronger_force(self, liver, healthy_scene):
        _, mesh, rng, _ = healthy_scene
        top = int(np.argmax(mesh.vertices[:, 2]))
        n = mesh.vertex_normals[top]
        shallow = servo_step(mesh, rng, tool(mesh.vertices[top] - 0.002 * n))
        deep = servo_step(mesh, rng, tool(mesh.vertices[top] - 0.006 * n))
        assert np.linalg.norm(deep.force) > np.linalg.norm(shallow.force)

    def test_fixed_step_enforced(self, square):
        from palpa.errors import DomainError
        with pytest.raises(DomainError):
            servo_step(square, MaterialRange(), tool([0, 0, 1]), dt=0.002)

    def test_unsampled_material_rejected(self, square):
        bare = resolve_contact(square, [0.5, 0.5, -0.001])
        with pytest.raises(ValueError):
            compute_force(bare, [0, 0, 0])

    @given(
        depth=st.floats(1e-5, 0.02),
        vz=st.floats(-0.2, 0.2),
        k=st.floats(10.0, 500.0),
        b=st.floats(0.0, 2.0),
    )
    @settings(max_examples=150, deadline=None)
    def test_magnitude_formula(self, depth, vz, k, b):
        rng = MaterialRange(k_min=k, k_max=k, b_min=b, b_max=b)
        out = servo_step(SQUARE, rng, tool([0.5, 0.5, -depth], v=[0, 0, vz]))
        want = max(0.0, k * depth - b * vz)
        assert float(np.linalg.norm(out.force)) == pytest.approx(want, rel=1e-9, abs=1e-12)
