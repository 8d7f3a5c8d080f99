"""Live sessions and the WebSocket service.

The session half checks that incremental pose feeding reproduces the
offline batch loop bit for bit. The service half drives a real socket:
handshake, mesh fetch, state publishing, reports, close codes, and
isolation between concurrent clients.
"""

import json
import threading

import numpy as np
import pytest
from websockets.exceptions import ConnectionClosed
from websockets.sync.client import connect

from palpa import quat
from palpa.assessment import Thresholds, analyze
from palpa.config import default_config, load_config
from palpa.deformation import KernelParams, gauss_kernel
from palpa.gestures import press_cycle_waypoints, simulate
from palpa.presets import load_scene
from palpa.recorder import load_trace, replay
from palpa.server import (CLOSE_BAD_MESSAGE, CLOSE_BAD_VERSION, ORGAN_TINT,
                          PROTOCOL_VERSION, PalpationService)
from palpa.session import Session
from palpa.timeline import run_ticks


def press_poses(mesh, depth=0.0065, count=3):
    top = int(np.argmax(mesh.vertices[:, 2]))
    w = press_cycle_waypoints(mesh.vertices[top], mesh.vertex_normals[top],
                              depth=depth, count=count, period=1.0)
    return simulate(w)


@pytest.fixture(scope="module")
def scene():
    return load_scene("healthy")


class TestSession:
    def test_matches_batch_loop_bitwise(self, scene):
        # core invariant: incremental feeding equals one-shot replay
        _, mesh, rng, kernel = scene
        poses = press_poses(mesh)
        session = Session(mesh, rng, kernel)
        live = []
        for p in poses:
            live.extend(session.feed(p))
        _, batch = run_ticks(mesh, rng, poses)
        assert len(live) == len(batch)
        for r, out in zip(live, batch):
            assert np.array_equal(r.output.force, out.force)

    def test_tick_grid_complete(self, scene):
        _, mesh, rng, kernel = scene
        poses = press_poses(mesh, count=1)
        session = Session(mesh, rng, kernel)
        ticks = []
        for p in poses:
            ticks.extend(r.tick for r in session.feed(p))
        assert ticks == list(range(len(ticks)))

    def test_stale_pose_ignored(self, scene):
        _, mesh, rng, kernel = scene
        session = Session(mesh, rng, kernel)
        p0 = press_poses(mesh)[0]
        assert len(session.feed(p0)) == 1
        stale = p0
        assert session.feed(stale) == []
        assert session.last_tick == 0

    def test_records_100hz_samples(self, scene):
        _, mesh, rng, kernel = scene
        poses = press_poses(mesh, count=1)  # 101 poses over 1 s
        session = Session(mesh, rng, kernel)
        for p in poses:
            session.feed(p)
        assert len(session.samples) == 101
        ts = [s.t for s in session.samples]
        assert np.allclose(np.diff(ts), 0.01, atol=1e-9)

    def test_trace_replays_identically(self, scene, tmp_path):
        from palpa.recorder import save_trace
        _, mesh, rng, kernel = scene
        session = Session(mesh, rng, kernel, mesh_name="liver_3k", preset="healthy")
        for p in press_poses(mesh):
            session.feed(p)
        path = tmp_path / "live.jsonl"
        save_trace(session.trace(), path)
        back = load_trace(path)
        outputs = replay(back, mesh, rng)
        for i, s in enumerate(back.samples):
            assert np.array_equal(outputs[i * 10].force, s.force)

    def test_assess_live_equals_assess_replayed(self, scene):
        # record through the session, then through replay; same report
        _, mesh, rng, kernel = scene
        session = Session(mesh, rng, kernel)
        for p in press_poses(mesh):
            session.feed(p)
        live_report = analyze(session.trace())
        from palpa.recorder import record, replay_full
        states, outs = replay_full(session.trace(), mesh, rng)
        redone = record(zip(states, outs), session.trace().header)
        replay_report = analyze(redone)
        assert live_report == replay_report

    def test_completed_taps_excludes_open_press(self, scene):
        _, mesh, rng, kernel = scene
        poses = press_poses(mesh, count=2)
        session = Session(mesh, rng, kernel)
        mid = len(poses) * 3 // 4  # inside the second press
        for p in poses[:mid]:
            session.feed(p)
        n_mid = len(session.completed_taps())
        for p in poses[mid:]:
            session.feed(p)
        n_end = len(session.completed_taps())
        assert n_mid == 1
        assert n_end == 2

    def test_new_taps_incremental(self, scene):
        _, mesh, rng, kernel = scene
        session = Session(mesh, rng, kernel)
        seen = 0
        for p in press_poses(mesh, count=3):
            session.feed(p)
            fresh = session.new_taps()
            seen += len(fresh)
        assert seen == len(session.completed_taps()) == 3

    def test_deformation_sparse_field(self, scene):
        _, mesh, rng, kernel = scene
        session = Session(mesh, rng, kernel)
        for p in press_poses(mesh, count=1)[:60]:
            session.feed(p)
        field = session.deformation()
        assert field
        contact = session.last_result.output.contact
        for i, vec in field.items():
            d = float(np.linalg.norm(mesh.vertices[i] - contact.proxy))
            want = contact.penetration * gauss_kernel(d, kernel.a, kernel.w)
            assert np.linalg.norm(vec) == pytest.approx(want, rel=1e-9)


class ServiceClient:
    def __init__(self, port):
        self.ws = connect(f"ws://127.0.0.1:{port}", open_timeout=5)

    def send(self, msg):
        self.ws.send(json.dumps(msg))

    def recv(self):
        return json.loads(self.ws.recv(timeout=5))

    def until(self, want):
        while True:
            msg = self.recv()
            if msg["type"] == want:
                return msg

    def rpc(self, msg, want):
        self.send(msg)
        return self.until(want)

    def close(self):
        self.ws.close()


@pytest.fixture()
def service(tmp_path):
    svc = PalpationService(default_config(), out_dir=str(tmp_path), port=0)
    svc.start()
    yield svc
    svc.stop()


class TestService:
    def test_handshake(self, service):
        c = ServiceClient(service.port)
        w = c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        assert set(w["presets"]) >= {"healthy", "hepatic", "cirrhosis", "cyst"}
        assert w["band"] == {"low": 2.1, "high": 2.5}
        c.close()

    def test_version_mismatch_closes_4001(self, service):
        c = ServiceClient(service.port)
        c.send({"type": "hello", "version": 99})
        with pytest.raises(ConnectionClosed) as err:
            while True:
                c.recv()
        assert err.value.rcvd.code == CLOSE_BAD_VERSION

    def test_malformed_message_closes_4002(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        c.ws.send("this is not json")
        with pytest.raises(ConnectionClosed) as err:
            while True:
                c.recv()
        assert err.value.rcvd.code == CLOSE_BAD_MESSAGE

    def test_malformed_pose_closes_4002(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        c.rpc({"type": "start", "preset": "healthy"}, "started")
        c.send({"type": "pose", "t": 0.0, "p": [0.0, "wat"]})
        with pytest.raises(ConnectionClosed) as err:
            while True:
                c.recv()
        assert err.value.rcvd.code == CLOSE_BAD_MESSAGE

    def test_unknown_type_is_recoverable(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        err = c.rpc({"type": "dance"}, "error")
        assert err["code"] == "unknown-type"
        assert c.rpc({"type": "start"}, "started")  # connection still usable
        c.close()

    def test_unknown_preset_is_recoverable(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        err = c.rpc({"type": "start", "preset": "spleen"}, "error")
        assert err["code"] == "unknown-preset"
        c.close()

    def test_pose_before_start_is_recoverable(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        err = c.rpc({"type": "pose", "t": 0.0, "p": [0, 0, 0]}, "error")
        assert err["code"] == "not-started"
        c.close()

    def test_mesh_payload_and_tint(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        c.rpc({"type": "start", "preset": "cyst"}, "started")
        m = c.rpc({"type": "get_mesh"}, "mesh")
        n = len(m["vertices"]) // 3
        assert len(m["normals"]) == 3 * n
        assert len(m["visual_rgb"]) == 3 * n
        assert max(m["triangles"]) < n
        # material-independent tint: one color repeated for every vertex
        tint = np.array(m["visual_rgb"]).reshape(-1, 3)
        assert np.all(tint == np.asarray(ORGAN_TINT))
        c.close()

    def test_cyst_mesh_identical_to_healthy_mesh(self, service):
        # nothing in the rendered inputs may hint at the hidden soft spot
        payloads = {}
        for preset in ("healthy", "cyst"):
            c = ServiceClient(service.port)
            c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
            c.rpc({"type": "start", "preset": preset}, "started")
            m = c.rpc({"type": "get_mesh"}, "mesh")
            payloads[preset] = (m["vertices"], m["triangles"], m["normals"],
                                m["visual_rgb"])
            c.close()
        assert payloads["healthy"] == payloads["cyst"]

    def press_session(self, service, preset="calibration", depth=0.010,
                      poses=101):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        c.rpc({"type": "start", "preset": preset}, "started")
        m = c.rpc({"type": "get_mesh"}, "mesh")
        verts = np.array(m["vertices"]).reshape(-1, 3)
        norms = np.array(m["normals"]).reshape(-1, 3)
        top = int(np.argmax(verts[:, 2]))
        p0, n = verts[top], norms[top]
        states = []
        for i in range(poses):
            t = i * 0.01
            d = depth * min(1.0, 2.0 * t)
            c.send({"type": "pose", "t": t,
                    "p": (p0 - n * d).tolist(), "q": [1, 0, 0, 0]})
            msg = c.recv()
            while msg["type"] not in ("state", "tick"):
                msg = c.recv()
            if msg["type"] == "state":
                states.append(msg)
        return c, states

    def test_states_published_and_gauge_consistent(self, service):
        c, states = self.press_session(service)
        assert len(states) >= 30  # 60 Hz publishing over 1 s of poses
        cfg = default_config()
        for s in states:
            m = float(np.linalg.norm(s["force"]))
            assert s["magnitude"] == pytest.approx(m, rel=1e-12)
            if m < cfg.assessment.band_low:
                assert s["gauge"] == "below"
            elif m > cfg.assessment.band_high:
                assert s["gauge"] == "above"
            else:
                assert s["gauge"] == "in-band"
            assert (s["contact"] is None) == (s["deform"] is None)
        deepest = states[-1]
        assert deepest["contact"] is not None
        assert deepest["deform"]["dx"] == deepest["contact"]["penetration"]
        c.close()

    def test_gauge_crosses_band(self, service):
        # calibration at 10 mm peaks at 2.5 N: below -> in-band on the way down
        c, states = self.press_session(service)
        gauges = [s["gauge"] for s in states]
        assert gauges[0] == "below"
        assert "in-band" in gauges
        c.close()

    def test_end_report_and_stored_trace(self, service, tmp_path):
        c, states = self.press_session(service)
        rep = c.rpc({"type": "end"}, "report")
        assert rep["samples"] == 101
        assert rep["report"]["label"] in ("expert", "novice", "indeterminate")
        assert rep["trace_path"]
        stored = load_trace(rep["trace_path"])
        assert len(stored.samples) == 101
        c.close()

    def test_service_trace_replays_bit_identical(self, service):
        # record over the socket, then replay offline: same forces
        c, states = self.press_session(service)
        rep = c.rpc({"type": "end"}, "report")
        c.close()
        trace = load_trace(rep["trace_path"])
        _, mesh, rng, _ = load_scene(trace.header.preset)
        outputs = replay(trace, mesh, trace.header.material_range)
        for i, s in enumerate(trace.samples):
            assert np.array_equal(outputs[i * 10].force, s.force), f"sample {i}"

    def test_concurrent_clients_isolated(self, service):
        # two sessions with different presets pressed identically must keep
        # their own forces; a soft cyst press reads lower than healthy
        results = {}
        def run(preset):
            c, states = self.press_session(service, preset=preset, depth=0.007)
            rep = c.rpc({"type": "end"}, "report")
            c.close()
            trace = load_trace(rep["trace_path"])
            results[preset] = max(float(np.linalg.norm(s.force))
                                  for s in trace.samples)
        a = threading.Thread(target=run, args=("healthy",))
        b = threading.Thread(target=run, args=("cyst",))
        a.start(); b.start(); a.join(); b.join()
        assert results["cyst"] < results["healthy"]

    def test_idle_republish_keeps_stream_alive(self, service):
        c, states = self.press_session(service, poses=40)
        # stop sending poses; the latest state keeps arriving anyway
        again = c.until("state")
        assert again["tick"] == states[-1]["tick"]
        c.close()

    def test_stale_pose_acked_not_published(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        c.rpc({"type": "start", "preset": "healthy"}, "started")
        c.send({"type": "pose", "t": 0.0, "p": [0, 0, 1], "q": [1, 0, 0, 0]})
        first = c.recv()
        assert first["type"] == "state"
        c.send({"type": "pose", "t": 0.0001, "p": [0, 0, 1], "q": [1, 0, 0, 0]})
        second = c.recv()
        assert second["type"] == "tick" and second.get("stale")
        c.close()

    def test_end_without_session_recoverable(self, service):
        c = ServiceClient(service.port)
        c.rpc({"type": "hello", "version": PROTOCOL_VERSION}, "welcome")
        err = c.rpc({"type": "end"}, "error")
        assert err["code"] == "not-started"
        c.close()
