// Console view state and its pure reducer.
//
// Every number on screen comes from the service; the console computes
// nothing itself.  The reducer is a pure function, so replaying a recorded
// event stream reproduces the same final state (and reconnects are safe:
// snapshots reset, predictions dedupe by window index).

import type { FramePoint, PredictionEvent, QualityColor, SessionState, StreamEvent } from "./types.js";
import { CHANNELS } from "./types.js";

export const CHART_CAPACITY = 400; // points kept per channel strip

export interface ViewState {
  sessionState: SessionState;
  stopReason: string;
  quality: QualityColor[]; // one color per channel, canonical order
  history: PredictionEvent[]; // append-only, ordered by window_index
  current: PredictionEvent | null;
  chart: Array<Array<{ t: number; v: number }>>; // per channel
}

export function initialViewState(): ViewState {
  return {
    sessionState: "IDLE",
    stopReason: "",
    quality: CHANNELS.map(() => "BLACK" as QualityColor),
    history: [],
    current: null,
    chart: CHANNELS.map(() => []),
  };
}

function qualityToGrid(channels: Record<string, QualityColor>): QualityColor[] {
  return CHANNELS.map((name) => channels[name] ?? "BLACK");
}

function insertPrediction(history: PredictionEvent[], p: PredictionEvent): PredictionEvent[] {
  if (history.some((h) => h.window_index === p.window_index)) {
    return history; // duplicate from a reconnect snapshot
  }
  const next = [...history, p];
  next.sort((a, b) => a.window_index - b.window_index);
  return next;
}

function appendFrames(
  chart: ViewState["chart"],
  frames: FramePoint[],
): ViewState["chart"] {
  return chart.map((points, channel) => {
    const added = frames.map((f) => ({ t: f.timestamp_ms / 1000, v: f.values[channel] }));
    const merged = [...points, ...added];
    return merged.length > CHART_CAPACITY ? merged.slice(merged.length - CHART_CAPACITY) : merged;
  });
}

export function applyEvent(state: ViewState, event: StreamEvent): ViewState {
  switch (event.type) {
    case "snapshot": {
      let history: PredictionEvent[] = [];
      for (const p of event.predictions) {
        history = insertPrediction(history, p);
      }
      return {
        ...state,
        sessionState: event.state,
        stopReason: event.stop_reason ?? "",
        quality: event.quality ? qualityToGrid(event.quality.channels) : state.quality,
        history,
        current: history.length ? history[history.length - 1] : null,
      };
    }
    case "state":
      return { ...state, sessionState: event.state };
    case "quality":
      return { ...state, quality: qualityToGrid(event.channels) };
    case "prediction": {
      const { type: _, ...prediction } = event;
      const history = insertPrediction(state.history, prediction);
      if (history === state.history) {
        return state;
      }
      return { ...state, history, current: history[history.length - 1] };
    }
    case "frames":
      return { ...state, chart: appendFrames(state.chart, event.frames) };
    default:
      return state;
  }
}

export function applyEvents(state: ViewState, events: StreamEvent[]): ViewState {
  return events.reduce(applyEvent, state);
}

/** Start is allowed only on an all-GREEN grid, unless the operator overrides. */
export function canStart(state: ViewState, override = false): boolean {
  return override || state.quality.every((color) => color === "GREEN");
}
