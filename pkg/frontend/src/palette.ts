// Verdict color encodings.  The semantic color names (blue/yellow/red)
// come from the service and never change; palettes only decide the hex
// values used to paint them.  The alternate palette keeps the three
// classes distinguishable for the common red-green deficiencies
// (Okabe-Ito hues).

import type { VerdictColor } from "./types.js";

export interface Palette {
  name: string;
  blue: string;
  yellow: string;
  red: string;
  error: string;
  unknown: string;
}

export const DEFAULT_PALETTE: Palette = {
  name: "default",
  blue: "#2c7bb6",
  yellow: "#ffcf33",
  red: "#d7191c",
  error: "#9e9e9e",
  unknown: "#e0e0e0",
};

export const COLOR_BLIND_PALETTE: Palette = {
  name: "color-blind",
  blue: "#0072b2",
  yellow: "#f0e442",
  red: "#d55e00",
  error: "#999999",
  unknown: "#e0e0e0",
};

export function togglePalette(current: Palette): Palette {
  return current.name === "default" ? COLOR_BLIND_PALETTE : DEFAULT_PALETTE;
}

export interface PaintStyle {
  fill: string;
  opacity: number;
}

// stale results (a newer heatmap job is still running) stay visible but
// dimmed so the engineer can tell the colors are about to change
export function paint(
  color: VerdictColor | null,
  palette: Palette,
  stale: boolean,
): PaintStyle {
  const fill = color === null ? palette.unknown : palette[color];
  return { fill, opacity: stale ? 0.45 : 1.0 };
}
