// Console state reducer. Pure functions over an ordered event stream: the
// pending queue mirrors the server (snapshot seeds it, events move commands
// through pending -> dispatched/rejected) and a sequence gap flips
// needsResync so the connection layer knows to resubscribe.

import type {
  ConsoleState,
  ConnectionStatus,
  EventRecord,
  PendingCommand,
  SnapshotRecord,
} from "./types.js";

export const EVENT_LOG_CAP = 500;
export const STALE_AFTER_MS = 2000;

export function initialState(sessionId: string): ConsoleState {
  return {
    sessionId,
    mode: null,
    status: "idle",
    statusDetail: "",
    lastSeq: null,
    needsResync: false,
    skeleton: null,
    features: null,
    lastInterpretation: null,
    events: [],
    pending: [],
    dispatched: [],
    rejected: [],
  };
}

export function withStatus(
  state: ConsoleState,
  status: ConnectionStatus,
  detail = "",
): ConsoleState {
  return { ...state, status, statusDetail: detail };
}

export function applySnapshot(
  state: ConsoleState,
  snapshot: SnapshotRecord,
): ConsoleState {
  return {
    ...state,
    mode: snapshot.payload.mode,
    lastSeq: snapshot.seq,
    needsResync: false,
    pending: snapshot.payload.pending.map((p, i) => ({
      cmdId: p.cmd_id,
      decision: p.decision,
      seq: snapshot.seq - snapshot.payload.pending.length + i,
    })),
  };
}

function pushCapped<T>(log: T[], item: T, cap = EVENT_LOG_CAP): T[] {
  const out = log.length >= cap ? log.slice(log.length - cap + 1) : log.slice();
  out.push(item);
  return out;
}

export function applyEvent(
  state: ConsoleState,
  record: EventRecord,
  nowMs: number,
): ConsoleState {
  let next: ConsoleState = {
    ...state,
    events: pushCapped(state.events, record),
    lastSeq: record.seq,
  };
  if (state.lastSeq !== null && record.seq !== state.lastSeq + 1) {
    next.needsResync = true;
  }

  const p = record.payload;
  switch (record.type) {
    case "FrameAccepted":
      next.skeleton = {
        pts: p.pts as number[][],
        tUs: p.t_us as number,
        hand: p.hand as string,
        receivedAtMs: nowMs,
      };
      break;
    case "KeyframeEmitted":
      next.features = p as any;
      break;
    case "InterpretationReady":
      next.lastInterpretation = {
        name: p.name, meaning: p.meaning, task: p.task, backend: p.backend,
      };
      break;
    case "CacheHit":
      next.lastInterpretation = { name: p.name, task: p.task, backend: "Cache" };
      break;
    case "CommandPending":
      next.pending = [
        ...state.pending,
        { cmdId: p.cmd_id, decision: p.decision, task: p.task, seq: record.seq },
      ];
      break;
    case "CommandDispatched":
      if (p.cmd_id) {
        next.pending = state.pending.filter((c) => c.cmdId !== p.cmd_id);
      }
      next.dispatched = pushCapped(state.dispatched, record);
      break;
    case "CommandRejected":
      if (p.cmd_id) {
        next.pending = state.pending.filter((c) => c.cmdId !== p.cmd_id);
      }
      next.rejected = pushCapped(state.rejected, record);
      break;
    default:
      break; // FrameRejected / Error: log only
  }
  return next;
}

// Optimistic UI for operator actions: remove immediately, restore on error.

export function removePending(
  state: ConsoleState,
  cmdId: string,
): [ConsoleState, PendingCommand | null] {
  const entry = state.pending.find((c) => c.cmdId === cmdId) ?? null;
  if (!entry) return [state, null];
  return [
    { ...state, pending: state.pending.filter((c) => c.cmdId !== cmdId) },
    entry,
  ];
}

export function restorePending(
  state: ConsoleState,
  entry: PendingCommand,
): ConsoleState {
  if (state.pending.some((c) => c.cmdId === entry.cmdId)) return state;
  const pending = [...state.pending, entry].sort((a, b) => a.seq - b.seq);
  return { ...state, pending };
}

export function isStale(state: ConsoleState, nowMs: number): boolean {
  return (
    state.skeleton === null ||
    nowMs - state.skeleton.receivedAtMs > STALE_AFTER_MS
  );
}

export function isReadOnly(state: ConsoleState): boolean {
  return state.mode === "auto";
}
