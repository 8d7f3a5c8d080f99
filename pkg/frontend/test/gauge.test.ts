import { describe, expect, it } from "vitest";
import { gaugeSpan, gaugeView, ZONE_COLORS } from "../src/gauge";

const BAND = { low: 2.1, high: 2.5 };

describe("force gauge view model", () => {
  it("places the band edges proportionally on the bar", () => {
    const view = gaugeView(0, BAND, "below");
    const span = gaugeSpan(BAND);
    expect(view.bandLow).toBeCloseTo(2.1 / span, 12);
    expect(view.bandHigh).toBeCloseTo(2.5 / span, 12);
    expect(view.fill).toBe(0);
  });

  it("fills with magnitude and saturates at the top", () => {
    expect(gaugeView(2.0, BAND, "below").fill).toBeCloseTo(0.5, 12);
    expect(gaugeView(99, BAND, "above").fill).toBe(1);
    expect(gaugeView(-1, BAND, "below").fill).toBe(0);
  });

  it("uses the service's zone verdict verbatim, never its own", () => {
    // 2.3 N is numerically inside the band, but if the service says
    // "below" (e.g. different thresholds server-side), the UI must follow
    const view = gaugeView(2.3, BAND, "below");
    expect(view.zone).toBe("below");
    expect(view.color).toBe(ZONE_COLORS.below);
  });

  it("distinguishes all three zones by color", () => {
    const colors = new Set([
      gaugeView(1, BAND, "below").color,
      gaugeView(2.3, BAND, "in-band").color,
      gaugeView(3, BAND, "above").color,
    ]);
    expect(colors.size).toBe(3);
  });
});
