/**
 * Ray/mesh intersection for pointer aiming.
 *
 * A straightforward Moeller-Trumbore scan over the organ's triangles. The
 * organ is a single ~3K-triangle mesh, so at pointer-event rates a linear
 * scan is comfortably cheap and spares us any client-side spatial index.
 */

export type Vec3 = [number, number, number];

export interface RayHit {
  /** Intersection point. */
  point: Vec3;
  /** Ray parameter (distance along the unit direction). */
  distance: number;
  triangle: number;
}

const EPS = 1e-12;

export function intersectMesh(
  origin: Vec3,
  dir: Vec3,
  vertices: ArrayLike<number>,
  triangles: ArrayLike<number>,
): RayHit | null {
  let best: RayHit | null = null;
  for (let t = 0; t < triangles.length; t += 3) {
    const ia = triangles[t] * 3;
    const ib = triangles[t + 1] * 3;
    const ic = triangles[t + 2] * 3;
    const ax = vertices[ia], ay = vertices[ia + 1], az = vertices[ia + 2];
    const e1x = vertices[ib] - ax, e1y = vertices[ib + 1] - ay, e1z = vertices[ib + 2] - az;
    const e2x = vertices[ic] - ax, e2y = vertices[ic + 1] - ay, e2z = vertices[ic + 2] - az;

    // p = dir x e2
    const px = dir[1] * e2z - dir[2] * e2y;
    const py = dir[2] * e2x - dir[0] * e2z;
    const pz = dir[0] * e2y - dir[1] * e2x;
    const det = e1x * px + e1y * py + e1z * pz;
    if (det > -EPS && det < EPS) continue;
    const inv = 1.0 / det;

    const sx = origin[0] - ax, sy = origin[1] - ay, sz = origin[2] - az;
    const u = (sx * px + sy * py + sz * pz) * inv;
    if (u < 0 || u > 1) continue;

    // q = s x e1
    const qx = sy * e1z - sz * e1y;
    const qy = sz * e1x - sx * e1z;
    const qz = sx * e1y - sy * e1x;
    const v = (dir[0] * qx + dir[1] * qy + dir[2] * qz) * inv;
    if (v < 0 || u + v > 1) continue;

    const dist = (e2x * qx + e2y * qy + e2z * qz) * inv;
    if (dist <= EPS) continue;
    if (best === null || dist < best.distance) {
      best = {
        point: [
          origin[0] + dir[0] * dist,
          origin[1] + dir[1] * dist,
          origin[2] + dir[2] * dist,
        ],
        distance: dist,
        triangle: t / 3,
      };
    }
  }
  return best;
}
