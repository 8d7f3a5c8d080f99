"""Drive the engine over its socket protocol, exactly like a remote UI would.

The service speaks JSON over a websocket: hello/welcome handshake, start a
preset, stream poses at 100 Hz, receive rate-limited state messages (force,
contact, a deformation recipe for client-side rendering), and finally an
assessment report. This script is a complete minimal client: it presses
three times on the healthy preset and prints the gauge as it moves through
the 2.1 to 2.5 N working band.
"""

import json

import numpy as np
from websockets.sync.client import connect

from palpa.config import default_config
from palpa.gestures import press_cycle_waypoints
from palpa.presets import load_scene
from palpa.server import PalpationService
from palpa.timeline import waypoint_poses


def recv_until(ws, kind):
    while True:
        msg = json.loads(ws.recv(timeout=5))
        if msg["type"] == kind:
            return msg
        if msg["type"] == "error":
            raise RuntimeError(msg)


def main():
    service = PalpationService(default_config(), out_dir=".", port=0)
    service.start()
    print(f"service listening on port {service.port}")

    _, mesh, _, _ = load_scene("healthy")
    top = int(np.argmax(mesh.vertices[:, 2]))
    n = mesh.vertex_normals[top] / np.linalg.norm(mesh.vertex_normals[top])
    poses = waypoint_poses(press_cycle_waypoints(
        mesh.vertices[top], n, depth=0.0071, period=1.6, count=3))

    with connect(f"ws://127.0.0.1:{service.port}") as ws:
        ws.send(json.dumps({"type": "hello", "version": 1}))
        welcome = recv_until(ws, "welcome")
        print(f"presets on offer: {', '.join(welcome['presets'])}")

        ws.send(json.dumps({"type": "start", "preset": "healthy"}))
        recv_until(ws, "started")

        gauge_seen = []
        for pose in poses:
            ws.send(json.dumps({"type": "pose", "t": pose.t,
                                "p": pose.position.tolist(),
                                "q": pose.orientation.tolist(),
                                "v": pose.velocity.tolist()}))
            msg = json.loads(ws.recv(timeout=5))
            if msg["type"] == "state" and (not gauge_seen or gauge_seen[-1][1] != msg["gauge"]):
                gauge_seen.append((msg["t"], msg["gauge"]))

        ws.send(json.dumps({"type": "end"}))
        report = recv_until(ws, "report")

    print("gauge transitions:")
    for t, gauge in gauge_seen:
        print(f"  t={t:5.2f} s  {gauge}")
    r = report["report"]
    print(f"report: {r['label']} ({r['tap_count']} taps, "
          f"band fraction {r['band_fraction']:.2f})")
    print(f"trace stored at {report['trace_path']}")
    service.stop()


if __name__ == "__main__":
    main()
