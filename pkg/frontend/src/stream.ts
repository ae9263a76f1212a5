// Event stream subscription with exponential-backoff reconnection.
//
// Each (re)connection starts with a server snapshot, so the reducer's
// dedupe-by-window-index keeps history rows unique across reconnects.

import type { StreamEvent } from "./types.js";

export class EventStream {
  private ws: WebSocket | null = null;
  private attempts = 0;
  private closed = false;

  constructor(
    private url: string,
    private onEvent: (event: StreamEvent) => void,
    private onStatus: (connected: boolean) => void = () => {},
  ) {}

  connect(): void {
    if (this.closed) {
      return;
    }
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.attempts = 0;
      this.onStatus(true);
    };
    this.ws.onmessage = (msg) => {
      this.onEvent(JSON.parse(msg.data as string) as StreamEvent);
    };
    this.ws.onclose = () => {
      this.onStatus(false);
      this.scheduleReconnect();
    };
    this.ws.onerror = () => {
      this.ws?.close();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) {
      return;
    }
    const delay = Math.min(500 * 2 ** this.attempts, 30_000);
    this.attempts += 1;
    setTimeout(() => this.connect(), delay);
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
