import type { Frame } from "./types.js";

type FrameHandler = (frame: Frame) => void;

// browser WebSocket and the "ws" package expose the same onmessage shape,
// so the factory keeps this file runnable in both
export type WsLike = {
  onopen: ((ev?: any) => void) | null;
  onmessage: ((ev: { data: any }) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onerror: ((ev?: any) => void) | null;
  send(data: string): void;
  close(): void;
};
export type WsFactory = (url: string) => WsLike;

/**
 * One realtime connection per tab. Tracks the per-connection sequence the
 * server promises to keep gapless; a gap means frames were lost somewhere,
 * so the owner gets told to reload its state from the GET endpoints.
 */
export class RtSocket {
  private ws: WsLike | null = null;
  private handlers = new Set<FrameHandler>();
  private topics = new Set<string>();
  private attempts = 0;
  private stopped = false;
  private isOpen = false;
  lastSeq = 0;
  onResync: (() => void) | null = null;

  constructor(
    private url: string,
    private wsFactory: WsFactory = (u) => new WebSocket(u) as any,
  ) {}

  connect() {
    this.stopped = false;
    const ws = this.wsFactory(this.url);
    this.ws = ws;

    ws.onopen = () => {
      this.attempts = 0;
      this.lastSeq = 0; // seq is per connection
      this.isOpen = true;
      for (const topic of this.topics) {
        ws.send(JSON.stringify({ op: "subscribe", topic }));
      }
    };

    ws.onmessage = (ev) => {
      const text = typeof ev.data === "string" ? ev.data : ev.data.toString();
      let frame: Frame;
      try {
        frame = JSON.parse(text);
      } catch {
        return;
      }
      if (typeof frame.seq === "number") {
        if (this.lastSeq && frame.seq !== this.lastSeq + 1 && this.onResync) {
          this.onResync();
        }
        this.lastSeq = frame.seq;
      }
      for (const h of this.handlers) h(frame);
    };

    ws.onerror = () => {};
    ws.onclose = () => {
      this.isOpen = false;
      if (!this.stopped) this.reconnect();
    };
  }

  private reconnect() {
    const delay = Math.min(500 * 2 ** this.attempts, 15000);
    this.attempts++;
    setTimeout(() => {
      if (this.stopped) return;
      this.connect();
      // frames may have been missed while down
      if (this.onResync) this.onResync();
    }, delay);
  }

  close() {
    this.stopped = true;
    this.ws?.close();
  }

  onFrame(fn: FrameHandler): () => void {
    this.handlers.add(fn);
    return () => this.handlers.delete(fn);
  }

  subscribe(topic: string) {
    if (this.topics.has(topic)) return;
    this.topics.add(topic);
    // not open yet: onopen replays the whole set
    if (this.isOpen) this.ws?.send(JSON.stringify({ op: "subscribe", topic }));
  }

  unsubscribe(topic: string) {
    if (!this.topics.delete(topic)) return;
    if (this.isOpen) this.ws?.send(JSON.stringify({ op: "unsubscribe", topic }));
  }

  subscribed(topic: string): boolean {
    return this.topics.has(topic);
  }
}
