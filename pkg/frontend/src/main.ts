// Wiring: subject form -> create/start session -> live panel -> report view.

import { api, ApiError, eventsUrl } from "./api.js";
import { StripCharts } from "./charts.js";
import { applyEvent, initialViewState, type ViewState } from "./state.js";
import { EventStream } from "./stream.js";
import { render, renderVariance, type Dom } from "./render.js";
import type { EmotionLabel, StreamEvent } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const dom: Dom = {
  stateBadge: el("state-badge"),
  qualityGrid: el("quality-grid"),
  emotionImage: el<HTMLImageElement>("emotion-image"),
  emotionLabel: el("emotion-label"),
  confidence: el("confidence"),
  historyBody: el("history-body"),
  startButton: el<HTMLButtonElement>("start-button"),
  stopButton: el<HTMLButtonElement>("stop-button"),
  reportButton: el<HTMLButtonElement>("report-button"),
  overrideToggle: el<HTMLInputElement>("override-toggle"),
};
const errorBanner = el("error-banner");
const charts = new StripCharts(el("charts"));

let state: ViewState = initialViewState();
let sessionId: string | null = null;
let stream: EventStream | null = null;
let started = false;

function onEvent(event: StreamEvent): void {
  state = applyEvent(state, event);
  render(dom, state, started);
  if (event.type === "frames") {
    charts.draw(state);
  }
}

function showError(message: string): void {
  errorBanner.textContent = message;
  errorBanner.hidden = false;
}

function clearError(): void {
  errorBanner.hidden = true;
}

async function refreshModels(): Promise<void> {
  const select = el<HTMLSelectElement>("model-select");
  const models = await api.listModels();
  select.replaceChildren(
    ...models.map((m) => {
      const option = document.createElement("option");
      option.value = m.id;
      option.textContent = `${m.id} (${m.n_trees ?? "?"} trees)`;
      return option;
    }),
  );
}

async function createAndWatch(): Promise<void> {
  clearError();
  const form = {
    code: el<HTMLInputElement>("subject-code").value.trim(),
    age: Number(el<HTMLInputElement>("subject-age").value),
    gender: el<HTMLInputElement>("subject-gender").value,
    civil_status: el<HTMLInputElement>("subject-civil").value,
    education: el<HTMLInputElement>("subject-education").value,
  };
  const label = el<HTMLSelectElement>("emotion-select").value as EmotionLabel;
  try {
    const session = await api.createSession({
      subject: form,
      source: { type: "synthetic", label, seed: Math.floor(Math.random() * 1e9) },
      model_id: el<HTMLSelectElement>("model-select").value,
      pace: "real",
    });
    sessionId = session.id;
    state = initialViewState();
    dom.historyBody.replaceChildren();
    stream = new EventStream(eventsUrl(session.id), onEvent, (connected) => {
      el("connection").dataset.connected = String(connected);
    });
    stream.connect();
    el<HTMLButtonElement>("create-button").disabled = true;
    render(dom, state, started);
  } catch (e) {
    showError(e instanceof ApiError ? `${e.code}: ${e.message}` : String(e));
  }
}

async function start(): Promise<void> {
  if (!sessionId) {
    return;
  }
  try {
    await api.startSession(sessionId);
    started = true;
    render(dom, state, started);
  } catch (e) {
    showError(e instanceof ApiError ? `${e.code}: ${e.message}` : String(e));
  }
}

async function stop(): Promise<void> {
  if (!sessionId) {
    return;
  }
  try {
    await api.stopSession(sessionId);
  } catch (e) {
    showError(e instanceof ApiError ? `${e.code}: ${e.message}` : String(e));
  }
}

async function showReport(): Promise<void> {
  if (!sessionId) {
    return;
  }
  try {
    const report = await api.varianceReport(sessionId);
    const present = new Set(report.classes.map((c) => c.label));
    const missing = (["HAPPY", "RELAXED", "SAD"] as EmotionLabel[]).filter((l) => !present.has(l));
    renderVariance(el("variance-view"), report, missing);
    el("variance-panel").hidden = false;
  } catch (e) {
    const view = el("variance-view");
    view.replaceChildren();
    const note = document.createElement("p");
    note.className = "notice";
    note.textContent = e instanceof ApiError ? e.message : "report unavailable";
    view.append(note);
    el("variance-panel").hidden = false;
  }
}

el("create-button").addEventListener("click", () => void createAndWatch());
dom.startButton.addEventListener("click", () => void start());
dom.stopButton.addEventListener("click", () => void stop());
dom.reportButton.addEventListener("click", () => void showReport());
dom.overrideToggle.addEventListener("change", () => render(dom, state, started));

render(dom, state, started);
void refreshModels().catch((e) => showError(String(e)));
