// Browser bootstrap: connects to a session, draws the hand view, keeps the
// command cards in sync, and turns operator clicks into resolve calls.
// Everything stateful lives in the reducer; this file only wires DOM.

import { createSession, resolveCommand } from "./api.js";
import { EventStream } from "./connect.js";
import { sceneForState } from "./skeleton.js";
import {
  applyEvent,
  applySnapshot,
  initialState,
  isReadOnly,
  isStale,
  removePending,
  restorePending,
  withStatus,
} from "./state.js";
import type { ConsoleState, PendingCommand } from "./types.js";

let state: ConsoleState = initialState("");
let stream: EventStream | null = null;
let mirror = true;

const $ = (id: string) => document.getElementById(id)!;

function baseUrl(): string {
  const field = ($("service-input") as HTMLInputElement).value.trim();
  return (field || window.location.origin).replace(/\/$/, "");
}

function toast(message: string) {
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  $("toasts").appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

function setState(next: ConsoleState) {
  state = next;
  renderPanels();
}

async function connectClicked() {
  const requested = ($("session-input") as HTMLInputElement).value.trim();
  let sessionId = requested;
  if (!sessionId) {
    const mode = ($("mode-select") as HTMLSelectElement).value as
      | "confirm" | "auto";
    const created = await createSession({ baseUrl: baseUrl() }, mode);
    sessionId = created.id;
    ($("session-input") as HTMLInputElement).value = sessionId;
  }
  stream?.close();
  setState(initialState(sessionId));
  stream = new EventStream({
    baseUrl: baseUrl(),
    sessionId,
    handlers: {
      onSnapshot: (snapshot) => setState(applySnapshot(state, snapshot)),
      onEvent: (record) => setState(applyEvent(state, record, Date.now())),
      onStatus: (status, detail) => setState(withStatus(state, status, detail)),
    },
  });
  stream.open();
}

async function act(cmd: PendingCommand, verdict: "confirm" | "override" | "reject") {
  // optimistic removal, rolled back if the service refuses
  const [optimistic, removed] = removePending(state, cmd.cmdId);
  if (!removed) return;
  setState(optimistic);
  let command: Record<string, unknown> | undefined;
  if (verdict === "override") {
    const raw = prompt('Replacement command JSON (e.g. {"type":"stop"})');
    if (raw === null) {
      setState(restorePending(state, removed));
      return;
    }
    try {
      command = JSON.parse(raw);
    } catch {
      toast("override: not valid JSON");
      setState(restorePending(state, removed));
      return;
    }
  }
  const result = await resolveCommand({ baseUrl: baseUrl() }, state.sessionId,
    cmd.cmdId, verdict, command);
  if (!result.ok) {
    toast(`${verdict} failed: ${result.detail}`);
    if (result.status !== 404) {
      // 404 = unknown command id: the server no longer has it either
      setState(restorePending(state, removed));
    }
  }
}

function commandLabel(cmd: PendingCommand): string {
  const commands = cmd.decision.commands ?? [];
  const names = commands.map((c) => JSON.stringify(c)).join(", ");
  return `${cmd.cmdId}: ${cmd.task ?? ""} -> ${names}`;
}

function renderPanels() {
  $("status-pill").textContent = state.status +
    (state.statusDetail ? ` (${state.statusDetail})` : "");
  $("status-pill").dataset.status = state.status;
  $("banner").style.display = isReadOnly(state) ? "block" : "none";

  const interp = state.lastInterpretation;
  $("interpretation").textContent = interp
    ? `${interp.name} -> ${interp.task}${interp.backend === "Cache" ? " (cached)" : ""}`
    : "no interpretation yet";

  const pendingRoot = $("pending");
  pendingRoot.replaceChildren();
  for (const cmd of state.pending) {
    const card = document.createElement("div");
    card.className = "card";
    const label = document.createElement("span");
    label.textContent = commandLabel(cmd);
    card.appendChild(label);
    if (!isReadOnly(state)) {
      for (const verdict of ["confirm", "override", "reject"] as const) {
        const button = document.createElement("button");
        button.textContent = verdict;
        button.onclick = () => void act(cmd, verdict);
        card.appendChild(button);
      }
    }
    pendingRoot.appendChild(card);
  }

  const log = $("event-log");
  log.replaceChildren(...state.events.slice(-12).reverse().map((record) => {
    const row = document.createElement("div");
    row.textContent = `#${record.seq} ${record.type}`;
    return row;
  }));
  $("dispatched-count").textContent = String(state.dispatched.length);
  $("rejected-count").textContent = String(state.rejected.length);
}

function drawLoop() {
  const canvas = $("hand-canvas") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const scene = sceneForState(state, { mirror, nowMs: Date.now() });
  if (scene) {
    ctx.globalAlpha = scene.dimmed ? 0.25 : 1.0;
    ctx.strokeStyle = "#9fb4c7";
    ctx.lineWidth = 2;
    for (const [x1, y1, x2, y2] of scene.bones) {
      ctx.beginPath();
      ctx.moveTo(x1 * width, y1 * height);
      ctx.lineTo(x2 * width, y2 * height);
      ctx.stroke();
    }
    for (const group of scene.groups) {
      ctx.strokeStyle = group.color;
      ctx.lineWidth = 6;
      ctx.beginPath();
      for (const [x, y] of group.tips) {
        ctx.moveTo(x * width + 9, y * height);
        ctx.arc(x * width, y * height, 9, 0, Math.PI * 2);
      }
      ctx.stroke();
    }
    ctx.fillStyle = "#e8eef4";
    for (const [x, y] of scene.joints) {
      ctx.beginPath();
      ctx.arc(x * width, y * height, 3, 0, Math.PI * 2);
      ctx.fill();
    }
    ctx.strokeStyle = "#59cd90";
    ctx.lineWidth = 2;
    for (const arrow of scene.arrows.concat(scene.trajectory ? [scene.trajectory] : [])) {
      ctx.beginPath();
      ctx.moveTo(arrow.from[0] * width, arrow.from[1] * height);
      ctx.lineTo(arrow.to[0] * width, arrow.to[1] * height);
      ctx.stroke();
    }
    ctx.globalAlpha = 1.0;
  }
  requestAnimationFrame(drawLoop);
}

export function boot() {
  $("connect-btn").addEventListener("click", () => void connectClicked());
  $("mirror-toggle").addEventListener("change", (ev) => {
    mirror = (ev.target as HTMLInputElement).checked;
  });
  if (isStale(state, Date.now())) {
    // initial render shows the empty, dimmed view
  }
  renderPanels();
  requestAnimationFrame(drawLoop);
}

boot();
