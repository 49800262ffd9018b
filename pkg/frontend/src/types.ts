// Wire schema of the session service, mirrored for the console.

export interface EventRecord {
  session: string;
  seq: number;
  type: string;
  payload: Record<string, any>;
}

export interface SnapshotRecord {
  session: string;
  type: "snapshot";
  seq: number;
  payload: {
    mode: "confirm" | "auto";
    pending: Array<{ cmd_id: string; decision: DecisionSummary }>;
  };
}

export interface DecisionSummary {
  kind: "classified" | "explained" | "rejected";
  commands?: Array<Record<string, any>>;
  matched_task?: string;
  reason?: string;
}

export interface FingerInfo {
  finger: string;
  extended: boolean;
  direction: string | null;
}

export interface SegmentInfo {
  direction: string | null;
  magnitude: "Still" | "Small" | "Medium" | "Large";
  displacement: number;
  duration_us: number;
}

export interface KeyframeSummary {
  t_us: number;
  reason: string;
  hand: string;
  fingers: FingerInfo[];
  groups: string[][];
  center: [number, number];
  hand_size: number;
  segment: SegmentInfo | null;
}

export interface SkeletonSnapshot {
  pts: number[][];
  tUs: number;
  hand: string;
  receivedAtMs: number;
}

export interface PendingCommand {
  cmdId: string;
  decision: DecisionSummary;
  task?: string;
  seq: number;
}

export interface InterpretationSummary {
  name: string;
  meaning?: string;
  task: string;
  backend?: string;
}

export type ConnectionStatus =
  | "idle"
  | "connecting"
  | "connected"
  | "reconnecting"
  | "error";

export interface ConsoleState {
  sessionId: string;
  mode: "confirm" | "auto" | null;
  status: ConnectionStatus;
  statusDetail: string;
  lastSeq: number | null;
  needsResync: boolean;
  skeleton: SkeletonSnapshot | null;
  features: KeyframeSummary | null;
  lastInterpretation: InterpretationSummary | null;
  events: EventRecord[];
  pending: PendingCommand[];
  dispatched: EventRecord[];
  rejected: EventRecord[];
}
