// Events-stream subscription with backoff reconnect. The server's first
// message on every (re)connect is a snapshot carrying the pending command
// set, so a reconnect is also the resync path.

import type { EventRecord, SnapshotRecord } from "./types.js";

export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WsFactory = (url: string) => WebSocketLike;

export interface StreamHandlers {
  onSnapshot: (snapshot: SnapshotRecord) => void;
  onEvent: (record: EventRecord) => void;
  onStatus: (
    status: "connecting" | "connected" | "reconnecting" | "error",
    detail: string,
  ) => void;
}

export interface StreamOptions {
  baseUrl: string; // http(s)://host:port
  sessionId: string;
  handlers: StreamHandlers;
  wsFactory?: WsFactory;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  scheduler?: (fn: () => void, ms: number) => unknown;
}

export function eventsUrl(baseUrl: string, sessionId: string): string {
  const ws = baseUrl.replace(/^http/, "ws").replace(/\/$/, "");
  return `${ws}/v1/sessions/${sessionId}/events`;
}

export class EventStream {
  private socket: WebSocketLike | null = null;
  private closed = false;
  private backoffMs: number;
  readonly url: string;

  constructor(private readonly opts: StreamOptions) {
    this.url = eventsUrl(opts.baseUrl, opts.sessionId);
    this.backoffMs = opts.initialBackoffMs ?? 500;
  }

  private factory(): WsFactory {
    if (this.opts.wsFactory) return this.opts.wsFactory;
    return (url) => new WebSocket(url) as unknown as WebSocketLike;
  }

  open(): void {
    if (this.closed) return;
    this.opts.handlers.onStatus(
      this.socket === null ? "connecting" : "reconnecting", "");
    const socket = this.factory()(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = this.opts.initialBackoffMs ?? 500;
      this.opts.handlers.onStatus("connected", "");
    };
    socket.onmessage = (ev) => {
      let record: any;
      try {
        record = JSON.parse(String(ev.data));
      } catch {
        return; // non-JSON frames are ignored
      }
      if (record.type === "snapshot") {
        this.opts.handlers.onSnapshot(record as SnapshotRecord);
      } else {
        this.opts.handlers.onEvent(record as EventRecord);
      }
    };
    socket.onerror = () => {
      this.opts.handlers.onStatus("error", "socket error");
    };
    socket.onclose = () => {
      if (this.closed) return;
      this.opts.handlers.onStatus("reconnecting",
        `retrying in ${this.backoffMs} ms`);
      const schedule = this.opts.scheduler ?? setTimeout;
      const delay = this.backoffMs;
      this.backoffMs = Math.min(
        this.backoffMs * 2, this.opts.maxBackoffMs ?? 8000);
      schedule(() => this.open(), delay);
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }
}
