// Bundled emotion illustrations (inline SVG, no external assets).

import type { EmotionLabel } from "./types.js";

function face(color: string, mouth: string, extra = ""): string {
  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100">` +
    `<circle cx="50" cy="50" r="45" fill="${color}" stroke="#333" stroke-width="3"/>` +
    `<circle cx="35" cy="40" r="5" fill="#333"/><circle cx="65" cy="40" r="5" fill="#333"/>` +
    mouth +
    extra +
    `</svg>`;
  return `data:image/svg+xml,${encodeURIComponent(svg)}`;
}

export const EMOTION_IMAGES: Record<EmotionLabel, string> = {
  HAPPY: face("#ffd54f", `<path d="M30 60 Q50 80 70 60" stroke="#333" stroke-width="4" fill="none"/>`),
  RELAXED: face(
    "#90caf9",
    `<path d="M32 65 Q50 72 68 65" stroke="#333" stroke-width="4" fill="none"/>`,
    `<path d="M28 32 Q35 28 42 32 M58 32 Q65 28 72 32" stroke="#333" stroke-width="2" fill="none"/>`,
  ),
  SAD: face("#b0bec5", `<path d="M30 70 Q50 55 70 70" stroke="#333" stroke-width="4" fill="none"/>`),
};
