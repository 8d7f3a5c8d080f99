/**
 * Wire types for the palpation service protocol, plus a small client.
 *
 * The trainer never computes forces; everything haptic arrives in these
 * messages and the client's only jobs are to stream poses and render what it
 * is told. See ../../docs/protocol.md for the authoritative description.
 */

export const PROTOCOL_VERSION = 1;

export interface Band {
  low: number;
  high: number;
}

export interface WelcomeMessage {
  type: "welcome";
  version: number;
  presets: string[];
  band: Band;
}

export interface StartedMessage {
  type: "started";
  preset: string;
  mesh: string;
  band: Band;
}

export interface MeshMessage {
  type: "mesh";
  name: string;
  vertices: number[];
  triangles: number[];
  normals: number[];
  visual_rgb: number[];
}

export interface ContactInfo {
  point: [number, number, number];
  normal: [number, number, number];
  penetration: number;
}

export interface ConeInfo {
  apex: [number, number, number];
  axis: [number, number, number];
  height: number;
  radius: number;
  peak_force: number;
  t_peak: number;
}

export type Gauge = "below" | "in-band" | "above";

export interface StateMessage {
  type: "state";
  tick: number;
  t: number;
  force: [number, number, number];
  magnitude: number;
  contact: ContactInfo | null;
  gauge: Gauge;
  deform: {
    point: [number, number, number];
    normal: [number, number, number];
    dx: number;
    a: number;
    w: number;
  } | null;
  cones_new: ConeInfo[];
}

export interface TickMessage {
  type: "tick";
  tick: number;
  stale?: boolean;
}

export interface ReportMessage {
  type: "report";
  samples: number;
  report: {
    label: string;
    tap_count: number;
    force_cv: number | null;
    speed_cv: number | null;
    band_fraction: number | null;
    taps: unknown[];
  };
  cones: ConeInfo[];
  trace_path: string | null;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage =
  | WelcomeMessage
  | StartedMessage
  | MeshMessage
  | StateMessage
  | TickMessage
  | ReportMessage
  | ErrorMessage;

export interface PoseInput {
  t: number;
  p: [number, number, number];
  q?: [number, number, number, number] | null;
  v?: [number, number, number] | null;
}

/** Parse one frame; returns null for anything that is not a known message. */
export function parseServerMessage(data: unknown): ServerMessage | null {
  let text: string;
  if (typeof data === "string") {
    text = data;
  } else if (data instanceof ArrayBuffer) {
    text = new TextDecoder().decode(data);
  } else if (ArrayBuffer.isView(data)) {
    // node websocket libraries deliver text frames as byte buffers
    text = new TextDecoder().decode(data as Uint8Array);
  } else {
    return null;
  }
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (
    type === "welcome" || type === "started" || type === "mesh" ||
    type === "state" || type === "tick" || type === "report" ||
    type === "error"
  ) {
    return obj as ServerMessage;
  }
  return null;
}

/** Minimal socket interface so the client runs on browser and node sockets. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: { code: number; reason: string }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onopen: ((ev: unknown) => void) | null;
}

export type MessageHandler = (msg: ServerMessage) => void;

/**
 * Thin protocol client: handshake, start, pose streaming, end.
 *
 * Messages are delivered in arrival order to the handler; the caller owns
 * all state. Note the server repeats the last state as a keepalive, so
 * handlers must not assume one reply per request.
 */
export class TrainerClient {
  private socket: SocketLike;
  onMessage: MessageHandler | null = null;
  onClose: ((code: number, reason: string) => void) | null = null;

  constructor(socket: SocketLike) {
    this.socket = socket;
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      if (msg && this.onMessage) this.onMessage(msg);
    };
    socket.onclose = (ev) => {
      if (this.onClose) this.onClose(ev.code, ev.reason);
    };
  }

  hello(): void {
    this.send({ type: "hello", version: PROTOCOL_VERSION });
  }

  start(preset: string): void {
    this.send({ type: "start", preset });
  }

  requestMesh(): void {
    this.send({ type: "get_mesh" });
  }

  pose(pose: PoseInput): void {
    this.send({ type: "pose", ...pose });
  }

  end(): void {
    this.send({ type: "end" });
  }

  close(): void {
    this.socket.close();
  }

  private send(obj: Record<string, unknown>): void {
    this.socket.send(JSON.stringify(obj));
  }
}
