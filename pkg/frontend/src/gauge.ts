/**
 * Force gauge model: a vertical bar with the working band marked on it.
 *
 * The zone ("below" / "in-band" / "above") arrives from the service in each
 * state message; this module only turns (magnitude, band, zone) into drawing
 * quantities. It never derives the zone from the magnitude itself: the
 * service is authoritative and the two must not be able to disagree.
 */

import type { Band, Gauge } from "./protocol";

export interface GaugeView {
  /** 0..1 fill fraction of the bar. */
  fill: number;
  /** 0..1 positions of the band edges on the bar. */
  bandLow: number;
  bandHigh: number;
  zone: Gauge;
  color: string;
}

export const ZONE_COLORS: Record<Gauge, string> = {
  "below": "#7f8ea3",
  "in-band": "#2fa866",
  "above": "#d64545",
};

/** Top of the bar sits comfortably above the band so overshoot is visible. */
export function gaugeSpan(band: Band): number {
  return band.high * 1.6;
}

export function gaugeView(magnitude: number, band: Band, zone: Gauge): GaugeView {
  const span = gaugeSpan(band);
  const clamp = (x: number) => Math.min(1, Math.max(0, x));
  return {
    fill: clamp(magnitude / span),
    bandLow: clamp(band.low / span),
    bandHigh: clamp(band.high / span),
    zone,
    color: ZONE_COLORS[zone],
  };
}
