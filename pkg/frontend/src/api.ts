// Thin REST client over the session service.

import type { ModelInfo, SessionResource, VarianceReport } from "./types.js";

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const err = body?.error ?? { code: "http-error", message: response.statusText };
    throw new ApiError(err.code, err.message, response.status);
  }
  return body as T;
}

export interface CreateSessionInput {
  subject: { code: string; age: number; gender: string; civil_status: string; education: string };
  source: { type: "synthetic" | "replay"; label?: string; path?: string; seed?: number };
  model_id: string;
  config?: { calibration_s?: number; window_s?: number; session_s?: number; rate_hz?: number };
  pace?: "real" | "fast";
}

export const api = {
  listSessions: () => request<SessionResource[]>("/api/sessions"),
  getSession: (id: string) => request<SessionResource>(`/api/sessions/${id}`),
  createSession: (input: CreateSessionInput) =>
    request<SessionResource>("/api/sessions", { method: "POST", body: JSON.stringify(input) }),
  startSession: (id: string) => request<SessionResource>(`/api/sessions/${id}/start`, { method: "POST" }),
  stopSession: (id: string) => request<SessionResource>(`/api/sessions/${id}/stop`, { method: "POST" }),
  listModels: () => request<ModelInfo[]>("/api/models"),
  varianceReport: (id: string) => request<VarianceReport>(`/api/sessions/${id}/variance-report`),
};

export function eventsUrl(sessionId: string): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/api/sessions/${sessionId}/events`;
}
