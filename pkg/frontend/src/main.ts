/**
 * Trainer application wiring.
 *
 * Single UI thread: socket messages land in a queue and are drained once per
 * animation frame; pose emission runs on its own fixed timer so the service
 * tick grid is fed at a steady rate regardless of render load. The UI never
 * computes forces; it draws what the service says.
 */

import { gaugeView, ZONE_COLORS } from "./gauge";
import { PointerRig, POSE_RATE_HZ } from "./pointer";
import {
  type Band,
  type ReportMessage,
  type ServerMessage,
  type StateMessage,
  TrainerClient,
} from "./protocol";
import { OrganScene } from "./scene";

const canvas = document.getElementById("viewport") as HTMLCanvasElement;
const gaugeFill = document.getElementById("gauge-fill") as HTMLDivElement;
const gaugeBand = document.getElementById("gauge-band") as HTMLDivElement;
const gaugeLabel = document.getElementById("gauge-label") as HTMLDivElement;
const presetSelect = document.getElementById("preset") as HTMLSelectElement;
const connectButton = document.getElementById("connect") as HTMLButtonElement;
const endButton = document.getElementById("end") as HTMLButtonElement;
const depthLabel = document.getElementById("depth") as HTMLDivElement;
const statusLabel = document.getElementById("status") as HTMLDivElement;
const reportPanel = document.getElementById("report") as HTMLDivElement;

const scene = new OrganScene(canvas);
const rig = new PointerRig();
const queue: ServerMessage[] = [];

let client: TrainerClient | null = null;
let band: Band = { low: 2.1, high: 2.5 };
let lastState: StateMessage | null = null;
let poseTimer: number | null = null;

function status(text: string): void {
  statusLabel.textContent = text;
}

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? "ws://127.0.0.1:8765";
}

function connect(): void {
  const socket = new WebSocket(serviceUrl());
  client = new TrainerClient(socket as unknown as ConstructorParameters<typeof TrainerClient>[0]);
  client.onMessage = (msg) => queue.push(msg);
  client.onClose = (code, reason) => {
    stopPoses();
    status(`disconnected (${code}${reason ? `: ${reason}` : ""})`);
    connectButton.disabled = false;
    endButton.disabled = true;
  };
  socket.onopen = () => {
    client?.hello();
    status("connected, waiting for welcome");
  };
  connectButton.disabled = true;
}

function startSession(preset: string): void {
  reportPanel.style.display = "none";
  scene.clearCones();
  client?.start(preset);
}

function startPoses(): void {
  stopPoses();
  poseTimer = window.setInterval(() => {
    const pose = rig.buildPose(performance.now());
    if (pose && client) client.pose(pose);
  }, 1000 / POSE_RATE_HZ);
}

function stopPoses(): void {
  if (poseTimer !== null) {
    window.clearInterval(poseTimer);
    poseTimer = null;
  }
}

function showReport(msg: ReportMessage): void {
  const r = msg.report;
  const fmt = (x: number | null) => (x === null ? "n/a" : x.toFixed(3));
  reportPanel.innerHTML = `
    <h2>session report: ${r.label}</h2>
    <p>${r.tap_count} taps over ${msg.samples} samples</p>
    <ul>
      <li>peak-force spread (CV): ${fmt(r.force_cv)}</li>
      <li>lateral-speed spread (CV): ${fmt(r.speed_cv)}</li>
      <li>fraction of taps in the ${band.low.toFixed(1)}&ndash;${band.high.toFixed(1)} N band: ${fmt(r.band_fraction)}</li>
    </ul>
    <p>${msg.cones.length} presses on the force map${msg.trace_path ? `; trace stored as ${msg.trace_path}` : ""}</p>`;
  reportPanel.style.display = "block";
}

function handle(msg: ServerMessage): void {
  switch (msg.type) {
    case "welcome": {
      band = msg.band;
      presetSelect.innerHTML = "";
      for (const name of msg.presets) {
        const option = document.createElement("option");
        option.value = name;
        option.textContent = name;
        presetSelect.appendChild(option);
      }
      presetSelect.value = msg.presets.includes("healthy") ? "healthy" : msg.presets[0];
      status("pick a preset; scroll to press, watch the gauge");
      startSession(presetSelect.value);
      break;
    }
    case "started":
      band = msg.band;
      client?.requestMesh();
      endButton.disabled = false;
      break;
    case "mesh":
      scene.loadMesh(msg);
      startPoses();
      status(`palpating ${msg.name}; find the band between ${band.low} and ${band.high} N`);
      break;
    case "state":
      lastState = msg;
      break;
    case "report":
      stopPoses();
      rig.releaseDepth();
      showReport(msg);
      lastState = null;
      break;
    case "error":
      status(`service error: ${msg.code} (${msg.detail})`);
      break;
    case "tick":
      break;
  }
}

function drawGauge(state: StateMessage | null): void {
  const magnitude = state?.magnitude ?? 0;
  const zone = state?.gauge ?? "below";
  const view = gaugeView(magnitude, band, zone);
  gaugeFill.style.height = `${view.fill * 100}%`;
  gaugeFill.style.background = view.color;
  gaugeBand.style.bottom = `${view.bandLow * 100}%`;
  gaugeBand.style.height = `${(view.bandHigh - view.bandLow) * 100}%`;
  gaugeLabel.textContent = `${magnitude.toFixed(2)} N`;
  gaugeLabel.style.color = ZONE_COLORS[zone];
}

function frame(): void {
  let state: StateMessage | null = null;
  while (queue.length > 0) {
    const msg = queue.shift()!;
    handle(msg);
    if (msg.type === "state") state = msg;
  }
  if (state) scene.applyState(state);
  drawGauge(lastState);
  depthLabel.textContent = `press depth ${(rig.depthMeters * 1000).toFixed(1)} mm`;
  scene.render();
  requestAnimationFrame(frame);
}

connectButton.addEventListener("click", connect);
endButton.addEventListener("click", () => {
  endButton.disabled = true;
  stopPoses();
  client?.end();
});
presetSelect.addEventListener("change", () => startSession(presetSelect.value));

canvas.addEventListener("pointermove", (ev) => {
  const { hit, rayDir } = scene.pick(ev.clientX, ev.clientY);
  rig.setAim({ hit: hit ? hit.point : null, rayDir });
});
canvas.addEventListener(
  "wheel",
  (ev) => {
    ev.preventDefault();
    rig.addWheel(ev.deltaY);
  },
  { passive: false },
);

function fit(): void {
  const rect = canvas.parentElement!.getBoundingClientRect();
  scene.resize(rect.width, rect.height);
}
window.addEventListener("resize", fit);
fit();
status("not connected");
requestAnimationFrame(frame);
