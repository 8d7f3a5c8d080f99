/**
 * Mouse-and-wheel stand-in for a tracked instrument.
 *
 * The pointer aims a ray at the organ; the wheel sets how deep the virtual
 * fingertip presses along that ray (0 to 20 mm, since no force can be felt
 * through a mouse). Poses are emitted on a fixed timer at or above 60 Hz so
 * the service's tick grid stays densely fed, and the tool orientation is the
 * quaternion that turns the instrument's own forward axis onto the view ray.
 */

import type { PoseInput } from "./protocol";
import type { Vec3 } from "./raycast";

export const MAX_DEPTH = 0.020;
export const POSE_RATE_HZ = 90;

/** Shortest-arc unit quaternion (w, x, y, z) taking `from` onto `to`. */
export function quatBetween(from: Vec3, to: Vec3): [number, number, number, number] {
  const cx = from[1] * to[2] - from[2] * to[1];
  const cy = from[2] * to[0] - from[0] * to[2];
  const cz = from[0] * to[1] - from[1] * to[0];
  const dot = from[0] * to[0] + from[1] * to[1] + from[2] * to[2];
  let w = 1 + dot;
  let x = cx, y = cy, z = cz;
  if (w < 1e-12) {
    // antiparallel: rotate half a turn around any axis normal to `from`
    if (Math.abs(from[0]) < 0.9) {
      w = 0; x = 0; y = -from[2]; z = from[1];
    } else {
      w = 0; x = -from[1]; y = from[0]; z = 0;
    }
  }
  const n = Math.sqrt(w * w + x * x + y * y + z * z);
  return [w / n, x / n, y / n, z / n];
}

/** The instrument models a stylus pointing down its own -z axis. */
export const TOOL_FORWARD: Vec3 = [0, 0, -1];

export interface AimState {
  /** Surface point under the pointer, if any. */
  hit: Vec3 | null;
  /** Unit view-ray direction at the pointer. */
  rayDir: Vec3;
}

export class PointerRig {
  private depth = 0;
  private aim: AimState = { hit: null, rayDir: [0, 0, -1] };
  private t0: number | null = null;

  /** Wheel input; deltaY in browser wheel units (pixels). */
  addWheel(deltaY: number): void {
    this.depth = Math.min(MAX_DEPTH, Math.max(0, this.depth - deltaY * 1e-5));
  }

  setAim(aim: AimState): void {
    this.aim = aim;
  }

  get depthMeters(): number {
    return this.depth;
  }

  releaseDepth(): void {
    this.depth = 0;
  }

  /**
   * Pose for the current aim at wall-clock `nowMs`. Returns null before the
   * pointer has touched the organ. Session time starts at the first pose.
   */
  buildPose(nowMs: number): PoseInput | null {
    if (this.aim.hit === null) return null;
    if (this.t0 === null) this.t0 = nowMs;
    const { hit, rayDir } = this.aim;
    const d = this.depth;
    return {
      t: (nowMs - this.t0) / 1000,
      p: [
        hit[0] + rayDir[0] * d,
        hit[1] + rayDir[1] * d,
        hit[2] + rayDir[2] * d,
      ],
      q: quatBetween(TOOL_FORWARD, rayDir),
      v: null, // the service derives velocity from consecutive poses
    };
  }
}
