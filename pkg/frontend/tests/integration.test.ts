// End-to-end console test against a real service instance: spawns the
// pipeline service, generates a landmark fixture with its CLI, streams
// frames over the real WebSocket endpoints, and drives the console state
// through the same reducer/api/connection code the browser uses.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createServer } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { createSession, health, resolveCommand } from "../src/api.js";
import { EventStream, type WebSocketLike } from "../src/connect.js";
import {
  applyEvent,
  applySnapshot,
  initialState,
  isReadOnly,
  withStatus,
} from "../src/state.js";
import type { ConsoleState, SnapshotRecord } from "../src/types.js";

const PYTHON = process.env.PYTHON ?? "python3";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const port = address.port;
      server.close(() => resolve(port));
    });
  });
}

function wsFactory(url: string): WebSocketLike {
  return new WebSocket(url) as unknown as WebSocketLike;
}

async function waitFor(predicate: () => boolean, ms = 15000, step = 25) {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((r) => setTimeout(r, step));
  }
  throw new Error("condition not met in time");
}

function restampedLines(path: string, startUs: number): string[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line, i) => {
      const record = JSON.parse(line);
      record.t_us = startUs + i * 33_334;
      return JSON.stringify(record);
    });
}

interface Harness {
  state: ConsoleState;
  stream: EventStream;
  close(): void;
}

function attachConsole(baseUrl: string, sessionId: string): Harness {
  const harness: Harness = {
    state: initialState(sessionId),
    stream: null as unknown as EventStream,
    close() { this.stream.close(); },
  };
  harness.stream = new EventStream({
    baseUrl,
    sessionId,
    wsFactory,
    handlers: {
      onSnapshot: (snapshot: SnapshotRecord) => {
        harness.state = applySnapshot(harness.state, snapshot);
      },
      onEvent: (record) => {
        harness.state = applyEvent(harness.state, record, Date.now());
      },
      onStatus: (status, detail) => {
        harness.state = withStatus(harness.state, status, detail);
      },
    },
  });
  harness.stream.open();
  return harness;
}

async function serverPendingIds(baseUrl: string, sessionId: string): Promise<string[]> {
  // a fresh events socket's first message is the authoritative snapshot
  const url = baseUrl.replace(/^http/, "ws") + `/v1/sessions/${sessionId}/events`;
  const socket = new WebSocket(url);
  try {
    const snapshot: SnapshotRecord = await new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("snapshot timeout")), 10000);
      socket.once("message", (data) => {
        clearTimeout(timer);
        resolve(JSON.parse(String(data)));
      });
      socket.once("error", reject);
    });
    return snapshot.payload.pending.map((p) => p.cmd_id);
  } finally {
    socket.close();
  }
}

function sendFrames(baseUrl: string, sessionId: string, lines: string[]): Promise<void> {
  const url = baseUrl.replace(/^http/, "ws") + `/v1/sessions/${sessionId}/frames`;
  const socket = new WebSocket(url);
  return new Promise((resolve, reject) => {
    socket.on("open", () => {
      for (const line of lines) socket.send(line);
      socket.close();
      resolve();
    });
    socket.on("error", reject);
  });
}

describe("operator console against a live service", () => {
  let service: ChildProcess;
  let baseUrl: string;
  let palmLines: string[];
  let vulcanLines: string[];

  beforeAll(async () => {
    const workDir = mkdtempSync(join(tmpdir(), "console-it-"));

    const corpus = spawnSync(PYTHON, [
      "-m", "gesturepipe.cli", "gen-corpus", join(workDir, "corpus"),
      "--per-class", "1", "--noise-sigma", "0", "--seed", "1",
    ], { encoding: "utf-8" });
    expect(corpus.status).toBe(0);
    palmLines = restampedLines(
      join(workDir, "corpus", "open_palm", "0000.ndjson"), 0);
    vulcanLines = restampedLines(
      join(workDir, "corpus", "vulcan_salute", "0000.ndjson"), 10_000_000);

    const port = await freePort();
    baseUrl = `http://127.0.0.1:${port}`;
    const cfgPath = join(workDir, "config.json");
    writeFileSync(cfgPath, JSON.stringify({ serve: { host: "127.0.0.1", port } }));
    service = spawn(PYTHON, ["-m", "gesturepipe.cli", "--config", cfgPath, "serve"],
      { stdio: ["ignore", "pipe", "pipe"] });
    await waitFor(() => service.exitCode === null, 1000).catch(() => {});
    const deadline = Date.now() + 20000;
    let up = false;
    while (Date.now() < deadline && !up) {
      up = await health({ baseUrl });
      if (!up) await new Promise((r) => setTimeout(r, 200));
    }
    expect(up).toBe(true);
  }, 60000);

  afterAll(() => {
    service?.kill("SIGTERM");
  });

  it("mirrors the server pending queue and survives confirm/override round-trips", async () => {
    const created = await createSession({ baseUrl }, "confirm");
    const console_ = attachConsole(baseUrl, created.id);
    try {
      await waitFor(() => console_.state.mode === "confirm");
      expect(isReadOnly(console_.state)).toBe(false);

      await sendFrames(baseUrl, created.id, palmLines);
      await waitFor(() => console_.state.pending.length >= 1);

      // quiescent: UI pending equals the server's pending set
      let serverIds = await serverPendingIds(baseUrl, created.id);
      expect(console_.state.pending.map((c) => c.cmdId)).toEqual(serverIds);
      expect(console_.state.lastInterpretation?.name).toBe("open palm");

      // confirm round-trip
      const first = console_.state.pending[0];
      const confirmResult = await resolveCommand(
        { baseUrl }, created.id, first.cmdId, "confirm");
      expect(confirmResult.ok).toBe(true);
      await waitFor(() =>
        console_.state.dispatched.some((e) => e.payload.cmd_id === first.cmdId));
      expect(console_.state.pending.map((c) => c.cmdId)).not.toContain(first.cmdId);

      // double-confirm surfaces unknown-command-id, state stays consistent
      const again = await resolveCommand(
        { baseUrl }, created.id, first.cmdId, "confirm");
      expect(again.ok).toBe(false);
      expect(again.status).toBe(404);
      expect(again.detail).toContain("unknown command id");

      // new gesture -> new pending -> override round-trip
      await sendFrames(baseUrl, created.id, vulcanLines);
      await waitFor(() => console_.state.pending.length >= 1);
      const second = console_.state.pending[0];
      const overrideResult = await resolveCommand(
        { baseUrl }, created.id, second.cmdId, "override", { type: "stop" });
      expect(overrideResult.ok).toBe(true);
      await waitFor(() => console_.state.dispatched.some(
        (e) => e.payload.cmd_id === second.cmdId
          && e.payload.command?.type === "stop"));

      // quiescent again: server agrees nothing is pending
      serverIds = await serverPendingIds(baseUrl, created.id);
      expect(serverIds).toEqual([]);
      expect(console_.state.pending).toEqual([]);

      // the whole observed stream stayed gapless
      expect(console_.state.needsResync).toBe(false);
    } finally {
      console_.close();
    }
  }, 60000);

  it("renders auto-dispatch sessions read-only and still tracks dispatches", async () => {
    const created = await createSession({ baseUrl }, "auto");
    const console_ = attachConsole(baseUrl, created.id);
    try {
      await waitFor(() => console_.state.mode === "auto");
      expect(isReadOnly(console_.state)).toBe(true);

      await sendFrames(baseUrl, created.id, palmLines);
      await waitFor(() => console_.state.dispatched.length >= 1);
      expect(console_.state.pending).toEqual([]);
      expect(console_.state.needsResync).toBe(false);
    } finally {
      console_.close();
    }
  }, 60000);

  it("reports reconnecting status when the socket drops and resyncs after", async () => {
    const created = await createSession({ baseUrl }, "confirm");
    const statuses: string[] = [];
    const harness = initialStateHarness(created.id, statuses);
    try {
      await waitFor(() => harness.state.mode === "confirm");
      // force-drop the underlying socket; the stream must recover by itself
      harness.sockets[0].close();
      await waitFor(() => statuses.includes("reconnecting"));
      await waitFor(() => harness.state.mode === "confirm"
        && statuses.at(-1) === "connected");
    } finally {
      harness.stream.close();
    }
  }, 60000);

  function initialStateHarness(sessionId: string, statuses: string[]) {
    const sockets: WebSocket[] = [];
    const harness = {
      state: initialState(sessionId),
      sockets,
      stream: null as unknown as EventStream,
    };
    harness.stream = new EventStream({
      baseUrl,
      sessionId,
      initialBackoffMs: 100,
      wsFactory: (url) => {
        const socket = new WebSocket(url);
        sockets.push(socket);
        return socket as unknown as WebSocketLike;
      },
      handlers: {
        onSnapshot: (snapshot) => {
          harness.state = applySnapshot(harness.state, snapshot);
        },
        onEvent: (record) => {
          harness.state = applyEvent(harness.state, record, Date.now());
        },
        onStatus: (status) => {
          statuses.push(status);
        },
      },
    });
    harness.stream.open();
    return harness;
  }
});
