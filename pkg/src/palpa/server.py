"""WebSocket service exposing sessions to remote UIs.

One JSON text message per line of conversation; the client drives:

    -> {"type": "hello", "version": 1}
    <- {"type": "welcome", "version": 1, "presets": [...], "band": {...}}
    -> {"type": "start", "preset": "healthy"}
    <- {"type": "started", "preset": ..., "mesh": ..., "band": {...}}
    -> {"type": "get_mesh"}
    <- {"type": "mesh", "vertices": [...], "triangles": [...],
        "normals": [...], "visual_rgb": [...]}
    -> {"type": "pose", "t": ..., "p": [x, y, z], "q": [...], "v": [...]}
    <- {"type": "state", ...}   (rate-limited) or {"type": "tick", ...}
    -> {"type": "end"}
    <- {"type": "report", "report": {...}, "cones": [...], "trace_path": ...}

State messages carry the force vector and magnitude, a gauge reading
(below / in-band / above the target force band), the contact point with
its normal and depth (or null in free space), a five-number deformation
query (point, normal, dx, a, w) from which clients evaluate the bump
kernel themselves, and any cones finished since the previous state.

The mesh message carries a uniform visual tint instead of the material
channels, so nothing about hidden pathology can leak into rendering. Close
codes: 4001 protocol version mismatch, 4002 malformed message. Recoverable
mistakes (unknown preset, pose before start) come back as error messages
on the open socket. While a session is idle the latest state is re-sent a
few times a second so gauges stay live.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import numpy as np

from websockets.exceptions import ConnectionClosed
from websockets.sync.server import serve

from . import quat
from .assessment import report_dict
from .config import AppConfig, default_config
from .errors import PalpaError, UnknownPreset
from .forcemap import cone_from_samples, save_cones
from .haptics import ToolState
from .presets import list_presets, load_scene
from .recorder import save_trace
from .session import Session

PROTOCOL_VERSION = 1
CLOSE_BAD_VERSION = 4001
CLOSE_BAD_MESSAGE = 4002
IDLE_REPUBLISH_HZ = 5.0

# flat vertex tint for every preset; deliberately not derived from materials
ORGAN_TINT = (0.47, 0.20, 0.14)


def _cone_dict(c) -> dict:
    return {"apex": c.apex.tolist(), "axis": c.axis.tolist(),
            "height": c.height, "radius": c.radius,
            "peak_force": c.peak_force, "t_peak": c.t_peak}


class _Connection:
    """State and message handling for one client."""

    def __init__(self, ws, service: "PalpationService"):
        self.ws = ws
        self.service = service
        self.session: Session | None = None
        self.preset_name = ""
        self.greeted = False
        self.last_pose: ToolState | None = None
        self.last_publish_slot = -1
        self.last_state_json: str | None = None
        self.send_lock = threading.Lock()
        self.closed = threading.Event()

    def send(self, payload: dict):
        with self.send_lock:
            self.ws.send(json.dumps(payload, separators=(",", ":")))

    def send_raw(self, text: str):
        with self.send_lock:
            self.ws.send(text)

    def error(self, code: str, detail: str):
        self.send({"type": "error", "code": code, "detail": detail})

    def run(self):
        keeper = threading.Thread(target=self._keepalive, daemon=True)
        keeper.start()
        try:
            while True:
                try:
                    raw = self.ws.recv()
                except ConnectionClosed:
                    return
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("message must be an object with a type")
                except (json.JSONDecodeError, UnicodeDecodeError, ValueError) as exc:
                    self.ws.close(CLOSE_BAD_MESSAGE, f"malformed message: {exc}")
                    return
                try:
                    if not self._dispatch(msg):
                        return
                except ConnectionClosed:
                    return
        finally:
            self.closed.set()

    def _keepalive(self):
        interval = 1.0 / IDLE_REPUBLISH_HZ
        while not self.closed.wait(interval):
            text = self.last_state_json
            if text is None:
                continue
            try:
                self.send_raw(text)
            except ConnectionClosed:
                return

    def _dispatch(self, msg: dict) -> bool:
        kind = msg["type"]
        if kind == "hello":
            version = msg.get("version")
            if version != PROTOCOL_VERSION:
                self.ws.close(CLOSE_BAD_VERSION,
                              f"protocol version {version!r}, need {PROTOCOL_VERSION}")
                return False
            self.greeted = True
            band = self.service.band_dict()
            self.send({"type": "welcome", "version": PROTOCOL_VERSION,
                       "presets": self.service.preset_names(), "band": band})
            return True
        if kind == "start":
            return self._handle_start(msg)
        if kind == "get_mesh":
            return self._handle_get_mesh()
        if kind == "pose":
            return self._handle_pose(msg)
        if kind == "end":
            return self._handle_end()
        self.error("unknown-type", f"no such message type {kind!r}")
        return True

    def _handle_start(self, msg) -> bool:
        name = msg.get("preset", self.service.config.service.preset)
        try:
            preset, mesh, rng, kernel = self.service.scene(name)
        except UnknownPreset as exc:
            self.error("unknown-preset", str(exc))
            return True
        except PalpaError as exc:
            self.error("asset-error", str(exc))
            return True
        cfg = self.service.config
        self.session = Session(mesh, rng, kernel, mesh_name=preset.mesh_name,
                               preset=name, thresholds=cfg.assessment)
        self.preset_name = name
        self.last_pose = None
        self.last_publish_slot = -1
        self.last_state_json = None
        self.send({"type": "started", "preset": name, "mesh": preset.mesh_name,
                   "band": self.service.band_dict(),
                   "publish_hz": cfg.service.publish_hz})
        return True

    def _handle_get_mesh(self) -> bool:
        if self.session is None:
            self.error("not-started", "start a session before get_mesh")
            return True
        mesh = self.session.mesh
        tint = list(ORGAN_TINT) * mesh.n_vertices
        self.send({"type": "mesh", "name": mesh.name,
                   "vertices": mesh.vertices.ravel().tolist(),
                   "triangles": mesh.triangles.ravel().tolist(),
                   "normals": mesh.vertex_normals.ravel().tolist(),
                   "visual_rgb": tint})
        return True

    def _handle_pose(self, msg) -> bool:
        if self.session is None:
            self.error("not-started", "start a session before sending poses")
            return True
        try:
            t = float(msg["t"])
            p = np.asarray([float(x) for x in msg["p"]], dtype=np.float64)
            if p.shape != (3,):
                raise ValueError("p must have 3 numbers")
            if "q" in msg and msg["q"] is not None:
                q = quat.normalize(np.asarray([float(x) for x in msg["q"]]))
            else:
                q = quat.IDENTITY.copy()
            if "v" in msg and msg["v"] is not None:
                v = np.asarray([float(x) for x in msg["v"]], dtype=np.float64)
                if v.shape != (3,):
                    raise ValueError("v must have 3 numbers")
            elif self.last_pose is not None and t > self.last_pose.t:
                v = (p - self.last_pose.position) / (t - self.last_pose.t)
            else:
                v = np.zeros(3)
        except (KeyError, TypeError, ValueError) as exc:
            self.ws.close(CLOSE_BAD_MESSAGE, f"bad pose: {exc}")
            return False
        tool = ToolState(t=t, position=p, orientation=q, velocity=v)
        ticks = self.session.feed(tool)
        self.last_pose = tool
        if not ticks:
            self.send({"type": "tick", "tick": self.session.last_tick, "stale": True})
            return True
        last = ticks[-1]
        hz = self.service.config.service.publish_hz
        slot = int(last.tick * hz) // 1000
        if slot > self.last_publish_slot:
            self.last_publish_slot = slot
            self._publish_state(last)
        else:
            self.send({"type": "tick", "tick": last.tick})
        return True

    def _publish_state(self, result):
        session = self.session
        out = result.output
        contact = out.contact
        cones = [cone_from_samples(session.samples, a, b,
                                   self.service.config.forcemap)
                 for a, b in session.new_taps()]
        magnitude = float(np.linalg.norm(out.force))
        thresholds = self.service.config.assessment
        if magnitude < thresholds.band_low:
            gauge = "below"
        elif magnitude > thresholds.band_high:
            gauge = "above"
        else:
            gauge = "in-band"
        contact_obj = None
        deform = None
        if contact is not None:
            kernel = session.kernel
            contact_obj = {"point": contact.proxy.tolist(),
                           "normal": contact.normal.tolist(),
                           "penetration": contact.penetration}
            # clients displace vertices themselves from these five numbers,
            # so state messages stay O(1) in mesh size
            deform = {"point": contact.proxy.tolist(),
                      "normal": contact.normal.tolist(),
                      "dx": contact.penetration,
                      "a": kernel.a, "w": kernel.w}
        state = {
            "type": "state",
            "tick": result.tick,
            "t": result.tool.t,
            "force": out.force.tolist(),
            "magnitude": magnitude,
            "contact": contact_obj,
            "gauge": gauge,
            "deform": deform,
            "cones_new": [_cone_dict(c) for c in cones],
        }
        text = json.dumps(state, separators=(",", ":"))
        self.last_state_json = text
        self.send_raw(text)

    def _handle_end(self) -> bool:
        if self.session is None:
            self.error("not-started", "no session to end")
            return True
        session = self.session
        trace = session.trace()
        report = session.report()
        cones = [cone_from_samples(trace.samples, a, b, self.service.config.forcemap)
                 for a, b in session.completed_taps()]
        trace_path = self.service.store_trace(trace)
        self.send({"type": "report",
                   "samples": len(trace.samples),
                   "report": report_dict(report),
                   "cones": [_cone_dict(c) for c in cones],
                   "trace_path": str(trace_path) if trace_path else None})
        self.session = None
        self.last_state_json = None
        return True


class PalpationService:
    """Owns the listening socket; one _Connection per client, each threaded."""

    def __init__(self, config: AppConfig | None = None, asset_root=None,
                 out_dir=None, host: str | None = None, port: int | None = None):
        self.config = config if config is not None else default_config()
        self.asset_root = asset_root
        self.out_dir = Path(out_dir) if out_dir else None
        self.host = host if host is not None else self.config.service.host
        self.port = port if port is not None else self.config.service.port
        self._server = None
        self._trace_counter = 0
        self._lock = threading.Lock()

    def preset_names(self) -> list[str]:
        return list_presets(self.asset_root)

    def band_dict(self) -> dict:
        t = self.config.assessment
        return {"low": t.band_low, "high": t.band_high}

    def scene(self, name: str):
        return load_scene(name, self.asset_root)

    def store_trace(self, trace):
        if self.out_dir is None:
            return None
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with self._lock:
            self._trace_counter += 1
            n = self._trace_counter
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = self.out_dir / f"session-{stamp}-{n:03d}.jsonl"
        save_trace(trace, path)
        return path

    def _handler(self, ws):
        _Connection(ws, self).run()

    def start(self):
        self._server = serve(self._handler, self.host, self.port)
        self.port = self._server.socket.getsockname()[1]
        thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        thread.start()
        return self

    def serve_forever(self):
        self._server = serve(self._handler, self.host, self.port)
        self.port = self._server.socket.getsockname()[1]
        print(f"listening on ws://{self.host}:{self.port}", flush=True)
        try:
            self._server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self._server.shutdown()

    def stop(self):
        if self._server is not None:
            self._server.shutdown()
            self._server = None


def run_service(config=None, asset_root=None, out_dir=None,
                host=None, port=None) -> PalpationService:
    """Start a service in the background; returns it with .port resolved."""
    return PalpationService(config, asset_root, out_dir, host, port).start()
