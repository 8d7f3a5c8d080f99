/**
 * Client-side dent kernel.
 *
 * The service never streams displaced vertices; each state message carries a
 * five-number recipe (contact point, normal, depth, amplitude, width) and the
 * client moves its own copy of the mesh. This file must stay numerically
 * interchangeable with the engine's kernel: both sides are pinned to the
 * shared golden vectors in shared/kernel_golden.json within 1e-6.
 */

export interface DeformRecipe {
  point: [number, number, number];
  normal: [number, number, number];
  dx: number;
  a: number;
  w: number;
}

/** Gaussian falloff a * exp(-d^2 / w^2); exactly a at d = 0. */
export function gaussKernel(d: number, a: number, w: number): number {
  if (w <= 0) throw new RangeError(`kernel width must be positive, got ${w}`);
  if (d < 0) throw new RangeError(`lateral distance must be >= 0, got ${d}`);
  return a * Math.exp(-(d * d) / (w * w));
}

/**
 * Displace `base` vertex positions into `out` for one contact.
 *
 * Every vertex moves along -normal by dx * kernel(distance to the contact
 * point). Arrays are flat xyz triplets; `out` may alias `base` only if a
 * fresh copy of the base positions is acceptable to lose.
 */
export function displaceVertices(
  base: Float32Array,
  out: Float32Array,
  recipe: DeformRecipe,
): void {
  const [px, py, pz] = recipe.point;
  const [nx, ny, nz] = recipe.normal;
  const { dx, a, w } = recipe;
  for (let i = 0; i < base.length; i += 3) {
    const ddx = base[i] - px;
    const ddy = base[i + 1] - py;
    const ddz = base[i + 2] - pz;
    const d = Math.sqrt(ddx * ddx + ddy * ddy + ddz * ddz);
    const mag = dx * gaussKernel(d, a, w);
    out[i] = base[i] - nx * mag;
    out[i + 1] = base[i + 1] - ny * mag;
    out[i + 2] = base[i + 2] - nz * mag;
  }
}
