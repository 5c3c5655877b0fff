import { describe, expect, it } from "vitest";
import { COLOR_BLIND_PALETTE, DEFAULT_PALETTE, paint, togglePalette } from "../src/palette.js";
import type { VerdictColor } from "../src/types.js";

describe("togglePalette", () => {
  it("swaps between the two palettes", () => {
    expect(togglePalette(DEFAULT_PALETTE)).toBe(COLOR_BLIND_PALETTE);
    expect(togglePalette(COLOR_BLIND_PALETTE)).toBe(DEFAULT_PALETTE);
  });
});

describe("paint", () => {
  const verdicts: VerdictColor[] = ["blue", "yellow", "red", "error"];

  it("maps each semantic color to the palette entry of the same name", () => {
    for (const palette of [DEFAULT_PALETTE, COLOR_BLIND_PALETTE]) {
      for (const color of verdicts) {
        expect(paint(color, palette, false).fill).toBe(palette[color]);
      }
    }
  });

  it("keeps the three verdict classes distinguishable in both palettes", () => {
    for (const palette of [DEFAULT_PALETTE, COLOR_BLIND_PALETTE]) {
      const fills = new Set([palette.blue, palette.yellow, palette.red]);
      expect(fills.size).toBe(3);
    }
  });

  it("uses the unknown fill when no verdict exists yet", () => {
    expect(paint(null, DEFAULT_PALETTE, false).fill).toBe(DEFAULT_PALETTE.unknown);
  });

  it("dims stale results without changing the hue", () => {
    const fresh = paint("red", DEFAULT_PALETTE, false);
    const stale = paint("red", DEFAULT_PALETTE, true);
    expect(stale.fill).toBe(fresh.fill);
    expect(fresh.opacity).toBe(1.0);
    expect(stale.opacity).toBeLessThan(1.0);
  });
});
