/** Shapes served by the control-room HTTP API. The panel renders these
 * verbatim; it never recomputes control logic client-side. */

export interface LampTile {
  state: 0 | 1;
  level: number;
  fault: boolean;
}

export interface LastFrame {
  t: number;
  seq: number;
  date: string;
  time: string;
  volt: string;
  amp: number;
  temp: number;
  sun: number;
}

export interface OpenFault {
  lamp: number;
  fault_kind: string;
  onset: number;
}

export interface NodeEntry {
  frames: number;
  gaps: number;
  open_faults: OpenFault[];
  last?: LastFrame;
  lamps?: LampTile[];
  override?: string | null;
  rated_watts?: string;
}

export interface Snapshot {
  snapshot_time: number | null;
  aggregate: {
    total_watts: string;
    frames: number;
    gaps: number;
    open_faults: number;
  };
  nodes: Record<string, NodeEntry>;
}

export interface LogRow {
  kind: string;
  node: string;
  t: number;
  seq?: number;
  date?: string;
  time?: string;
  volt?: string;
  amp?: number;
  temp?: number;
  sun?: number;
  lamps?: [number, number][];
  // fault records
  lamp?: number;
  fault_kind?: string;
  onset?: number;
  cleared?: number | null;
  // transitions
  what?: string;
}

export interface LogPage {
  rows: LogRow[];
  total: number;
  offset: number;
}

export interface Audit {
  seq: number;
  issuer: string;
  received: string;
  result: string;
  command: {
    node: string;
    lamp: number | "ALL";
    action: string;
    state: string | null;
    brightness: number | null;
    expiry_s: number | null;
  };
}

export interface EnergyReport {
  from: number;
  to: number;
  tariff: string;
  kwh: string;
  cost_tk: string;
}

/** One event from GET /api/stream. */
export interface StreamEvent {
  event: string;
  node?: string;
  t?: number;
  sun?: number;
  volt?: string;
  amp?: number;
  temp?: number;
  lamps?: [number, number][];
  override?: string | null;
  lamp?: number;
  fault_kind?: string;
  onset?: number;
  cleared?: number;
  seq?: number;
  result?: string;
  status?: string;
  missed?: number;
}

export interface OverrideForm {
  node: string;
  lamp: number | "ALL";
  state: "on" | "off";
  brightness: number;
  expiry_s: number;
}

export type CommandPhase = "idle" | "pending" | "confirmed" | "failed";

export interface PendingCommand {
  phase: CommandPhase;
  detail: string;
}
