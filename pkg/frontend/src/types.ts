// Wire types for the session service API and its event stream.

export type SessionState = "IDLE" | "CALIBRATING" | "RUNNING" | "STOPPED";

export type QualityColor = "BLACK" | "RED" | "ORANGE" | "GREEN";

export type EmotionLabel = "HAPPY" | "RELAXED" | "SAD";

export interface PredictionEvent {
  window_index: number;
  t_end_s: number;
  label: EmotionLabel;
  confidence: number;
  sample_count: number;
}

export interface FramePoint {
  timestamp_ms: number;
  values: number[];
}

export type StreamEvent =
  | { type: "snapshot"; state: SessionState; quality: QualityEvent | null; predictions: PredictionEvent[]; stop_reason?: string }
  | ({ type: "state"; state: SessionState; t_s: number })
  | QualityEvent
  | ({ type: "prediction" } & PredictionEvent)
  | { type: "frames"; t_s: number; frames: FramePoint[] };

export interface QualityEvent {
  type: "quality";
  t_s: number;
  channels: Record<string, QualityColor>;
}

export interface SessionResource {
  id: string;
  subject: { code: string; age: number; gender: string; civil_status: string; education: string };
  model_id: string;
  state: SessionState;
  stop_reason: string;
  n_predictions: number;
}

export interface ModelInfo {
  id: string;
  labels: EmotionLabel[];
  n_trees: number | null;
}

export interface VarianceReport {
  channels: string[];
  classes: Array<{ label: EmotionLabel; model: number[]; session: number[]; ratio: Array<number | null> }>;
}

export const CHANNELS = [
  "AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
] as const;
