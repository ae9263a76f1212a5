// Minimal per-channel strip charts on a shared canvas grid.

import type { ViewState } from "./state.js";
import { CHANNELS } from "./types.js";

export class StripCharts {
  private contexts: CanvasRenderingContext2D[] = [];

  constructor(container: HTMLElement) {
    for (const name of CHANNELS) {
      const wrap = document.createElement("div");
      wrap.className = "strip";
      const label = document.createElement("span");
      label.textContent = name;
      const canvas = document.createElement("canvas");
      canvas.width = 220;
      canvas.height = 36;
      wrap.append(label, canvas);
      container.append(wrap);
      const ctx = canvas.getContext("2d");
      if (ctx) {
        this.contexts.push(ctx);
      }
    }
  }

  draw(state: ViewState): void {
    state.chart.forEach((points, channel) => {
      const ctx = this.contexts[channel];
      if (!ctx) {
        return;
      }
      const { width, height } = ctx.canvas;
      ctx.clearRect(0, 0, width, height);
      if (points.length < 2) {
        return;
      }
      let lo = Infinity;
      let hi = -Infinity;
      for (const p of points) {
        lo = Math.min(lo, p.v);
        hi = Math.max(hi, p.v);
      }
      const span = hi - lo || 1;
      ctx.strokeStyle = "#2e7d32";
      ctx.lineWidth = 1;
      ctx.beginPath();
      points.forEach((p, i) => {
        const x = (i / (points.length - 1)) * width;
        const y = height - ((p.v - lo) / span) * (height - 4) - 2;
        if (i === 0) {
          ctx.moveTo(x, y);
        } else {
          ctx.lineTo(x, y);
        }
      });
      ctx.stroke();
    });
  }
}
