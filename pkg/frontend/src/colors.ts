/**
 * Vertex color buffer construction.
 *
 * The organ's rendered color comes exclusively from the service's
 * `visual_rgb` payload, which is a constant tint for every preset. Material
 * properties (stiffness, damping) are deliberately never an input here: a
 * soft lesion must be findable by feel alone, so nothing in this module may
 * read or infer the material map. Keep it that way.
 */

import type { MeshMessage } from "./protocol";

/** Flat rgb triplets for the mesh's color attribute. */
export function colorBufferFrom(mesh: Pick<MeshMessage, "vertices" | "visual_rgb">): Float32Array {
  const vertexCount = mesh.vertices.length / 3;
  if (!mesh.visual_rgb || mesh.visual_rgb.length !== vertexCount * 3) {
    throw new Error(
      `visual_rgb must carry ${vertexCount * 3} values, got ${mesh.visual_rgb?.length ?? 0}`,
    );
  }
  return Float32Array.from(mesh.visual_rgb);
}

/** True when every vertex carries the same color (the expected organ tint). */
export function isUniformColor(buffer: Float32Array): boolean {
  for (let i = 3; i < buffer.length; i += 3) {
    if (
      buffer[i] !== buffer[0] ||
      buffer[i + 1] !== buffer[1] ||
      buffer[i + 2] !== buffer[2]
    ) {
      return false;
    }
  }
  return buffer.length >= 3;
}
