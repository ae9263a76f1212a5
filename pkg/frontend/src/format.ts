// Display formatting: class names, confidence percentages, m:ss times.

import type { EmotionLabel, PredictionEvent } from "./types.js";

const DISPLAY_NAMES: Record<EmotionLabel, string> = {
  HAPPY: "HAPPINESS",
  RELAXED: "RELAXATION",
  SAD: "SADNESS",
};

export function displayName(label: EmotionLabel): string {
  return DISPLAY_NAMES[label];
}

export function formatPercent(confidence: number): string {
  return `${Math.round(confidence * 100)}%`;
}

export function formatTime(tSeconds: number): string {
  const total = Math.round(tSeconds);
  const minutes = Math.floor(total / 60);
  const seconds = total % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

/** One observation line, e.g. "HAPPINESS 78% 3:00". */
export function formatHistoryRow(p: PredictionEvent): string {
  return `${displayName(p.label)} ${formatPercent(p.confidence)} ${formatTime(p.t_end_s)}`;
}
