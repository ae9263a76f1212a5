// DOM rendering: a thin projection of ViewState onto the page.

import { EMOTION_IMAGES } from "./assets.js";
import { displayName, formatHistoryRow, formatPercent } from "./format.js";
import type { ViewState } from "./state.js";
import { canStart } from "./state.js";
import type { VarianceReport } from "./types.js";
import { CHANNELS } from "./types.js";

export interface Dom {
  stateBadge: HTMLElement;
  qualityGrid: HTMLElement;
  emotionImage: HTMLImageElement;
  emotionLabel: HTMLElement;
  confidence: HTMLElement;
  historyBody: HTMLElement;
  startButton: HTMLButtonElement;
  stopButton: HTMLButtonElement;
  reportButton: HTMLButtonElement;
  overrideToggle: HTMLInputElement;
}

export function renderQualityGrid(container: HTMLElement, state: ViewState): void {
  if (container.childElementCount !== CHANNELS.length) {
    container.replaceChildren(
      ...CHANNELS.map((name) => {
        const cell = document.createElement("div");
        cell.className = "quality-cell";
        cell.dataset.channel = name;
        const tag = document.createElement("span");
        tag.textContent = name;
        cell.append(tag);
        return cell;
      }),
    );
  }
  state.quality.forEach((color, i) => {
    const cell = container.children[i] as HTMLElement;
    cell.dataset.color = color;
  });
}

export function renderHistory(tbody: HTMLElement, state: ViewState): void {
  // append-only: rows are keyed by window_index and never rewritten
  const existing = tbody.childElementCount;
  for (let i = existing; i < state.history.length; i++) {
    const p = state.history[i];
    const row = document.createElement("tr");
    row.dataset.window = String(p.window_index);
    const cells = [String(p.window_index), displayName(p.label), formatPercent(p.confidence), formatHistoryRow(p).split(" ")[2]];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      row.append(td);
    }
    tbody.append(row);
  }
}

export function render(dom: Dom, state: ViewState, started: boolean): void {
  dom.stateBadge.textContent = state.sessionState;
  dom.stateBadge.dataset.state = state.sessionState;

  renderQualityGrid(dom.qualityGrid, state);
  renderHistory(dom.historyBody, state);

  if (state.current) {
    dom.emotionImage.src = EMOTION_IMAGES[state.current.label];
    dom.emotionImage.hidden = false;
    dom.emotionLabel.textContent = displayName(state.current.label);
    dom.confidence.textContent = formatPercent(state.current.confidence);
  }

  const stopped = state.sessionState === "STOPPED";
  dom.startButton.disabled = started || stopped || !canStart(state, dom.overrideToggle.checked);
  dom.stopButton.disabled = !started || stopped;
  dom.reportButton.hidden = !stopped;
}

export function renderVariance(container: HTMLElement, report: VarianceReport, missing: string[]): void {
  container.replaceChildren();
  if (missing.length) {
    const note = document.createElement("p");
    note.className = "notice";
    note.textContent = `no session data for: ${missing.join(", ")}`;
    container.append(note);
  }
  for (const cls of report.classes) {
    const block = document.createElement("div");
    block.className = "variance-class";
    const title = document.createElement("h3");
    title.textContent = displayName(cls.label);
    block.append(title);
    const peak = Math.max(...cls.model, ...cls.session, 1);
    report.channels.forEach((channel, i) => {
      const row = document.createElement("div");
      row.className = "variance-row";
      const tag = document.createElement("span");
      tag.textContent = channel;
      const model = document.createElement("div");
      model.className = "bar model";
      model.style.width = `${(cls.model[i] / peak) * 100}%`;
      model.title = `model ${cls.model[i].toFixed(0)}`;
      const session = document.createElement("div");
      session.className = "bar session";
      session.style.width = `${(cls.session[i] / peak) * 100}%`;
      session.title = `session ${cls.session[i].toFixed(0)}`;
      row.append(tag, model, session);
      block.append(row);
    });
    container.append(block);
  }
}
