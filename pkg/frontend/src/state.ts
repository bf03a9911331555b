/** Dashboard store: the latest snapshot patched by stream deltas.
 *
 * Deltas only touch what the event carries; anything the server alone
 * can compute (aggregate watts, gap totals) refreshes on the next full
 * snapshot fetch. Reconnects always refetch, so drift cannot stick.
 */

import type {
  PendingCommand,
  Snapshot,
  StreamEvent,
} from "./types.js";

export const STALE_AFTER_MS = 10_000;

export interface FaultAlert {
  node: string;
  lamp: number;
  kind: string;
  onset: number;
  cleared?: number;
}

export interface DashboardState {
  snapshot: Snapshot | null;
  connection: "live" | "polling" | "down";
  lastActivityMs: number;
  alerts: FaultAlert[];
  pending: PendingCommand;
}

export function initialState(nowMs = Date.now()): DashboardState {
  return {
    snapshot: null,
    connection: "down",
    lastActivityMs: nowMs,
    alerts: [],
    pending: { phase: "idle", detail: "" },
  };
}

export function setSnapshot(state: DashboardState, snapshot: Snapshot, nowMs: number): void {
  state.snapshot = snapshot;
  state.lastActivityMs = nowMs;
  state.alerts = openFaultAlerts(snapshot);
}

function openFaultAlerts(snapshot: Snapshot): FaultAlert[] {
  const alerts: FaultAlert[] = [];
  for (const [node, entry] of Object.entries(snapshot.nodes)) {
    for (const fault of entry.open_faults) {
      alerts.push({ node, lamp: fault.lamp, kind: fault.fault_kind, onset: fault.onset });
    }
  }
  return alerts;
}

export function isStale(state: DashboardState, nowMs: number): boolean {
  return nowMs - state.lastActivityMs > STALE_AFTER_MS;
}

/** Apply one SSE delta. Returns true when something visible changed. */
export function applyEvent(state: DashboardState, ev: StreamEvent, nowMs: number): boolean {
  state.lastActivityMs = nowMs;
  const snap = state.snapshot;
  if (!snap) return false;

  switch (ev.event) {
    case "frame": {
      if (!ev.node) return false;
      const entry = (snap.nodes[ev.node] ??= { frames: 0, gaps: 0, open_faults: [] });
      const faulted = new Set(entry.open_faults.map((f) => f.lamp));
      entry.frames += 1;
      snap.aggregate.frames += 1;
      if (ev.t !== undefined) {
        snap.snapshot_time = Math.max(snap.snapshot_time ?? 0, ev.t);
        entry.last = {
          t: ev.t,
          seq: entry.last?.seq ?? 0,
          date: entry.last?.date ?? "",
          time: entry.last?.time ?? "",
          volt: ev.volt ?? entry.last?.volt ?? "",
          amp: ev.amp ?? entry.last?.amp ?? 0,
          temp: ev.temp ?? entry.last?.temp ?? 0,
          sun: ev.sun ?? entry.last?.sun ?? 0,
        };
      }
      if (ev.lamps) {
        entry.lamps = ev.lamps.map(([state_bit, level], i) => ({
          state: state_bit === 1 ? 1 : 0,
          level,
          fault: faulted.has(i),
        }));
      }
      entry.override = ev.override ?? null;
      return true;
    }
    case "fault_open": {
      if (!ev.node || ev.lamp === undefined) return false;
      const entry = (snap.nodes[ev.node] ??= { frames: 0, gaps: 0, open_faults: [] });
      entry.open_faults.push({
        lamp: ev.lamp,
        fault_kind: ev.fault_kind ?? "lamp_dark",
        onset: ev.onset ?? 0,
      });
      snap.aggregate.open_faults += 1;
      if (entry.lamps && entry.lamps[ev.lamp]) entry.lamps[ev.lamp].fault = true;
      state.alerts.push({
        node: ev.node,
        lamp: ev.lamp,
        kind: ev.fault_kind ?? "lamp_dark",
        onset: ev.onset ?? 0,
      });
      return true;
    }
    case "fault_clear": {
      if (!ev.node || ev.lamp === undefined) return false;
      const entry = snap.nodes[ev.node];
      if (!entry) return false;
      entry.open_faults = entry.open_faults.filter((f) => f.lamp !== ev.lamp);
      snap.aggregate.open_faults = Math.max(0, snap.aggregate.open_faults - 1);
      if (entry.lamps && entry.lamps[ev.lamp]) entry.lamps[ev.lamp].fault = false;
      state.alerts = state.alerts.map((a) =>
        a.node === ev.node && a.lamp === ev.lamp && a.cleared === undefined
          ? { ...a, cleared: ev.cleared ?? 0 }
          : a,
      );
      return true;
    }
    case "gap": {
      if (ev.node && snap.nodes[ev.node]) {
        snap.nodes[ev.node].gaps += ev.missed ?? 1;
        snap.aggregate.gaps += ev.missed ?? 1;
      }
      return true;
    }
    case "audit": {
      if (state.pending.phase === "pending") {
        state.pending =
          ev.result === "acked"
            ? { phase: "confirmed", detail: "acknowledged by node" }
            : { phase: "failed", detail: ev.result ?? "failed" };
      }
      return true;
    }
    default:
      return false;
  }
}

/** Client-side guard before any request goes out. */
export function validateOverride(brightness: number, expiry_s: number): string | null {
  if (!Number.isInteger(brightness) || brightness < 0 || brightness > 100) {
    return "brightness must be an integer between 0 and 100";
  }
  if (!Number.isInteger(expiry_s) || expiry_s <= 0) {
    return "expiry must be a positive number of seconds";
  }
  return null;
}

export function beginCommand(state: DashboardState, detail: string): void {
  state.pending = { phase: "pending", detail };
}

export function resolveCommand(state: DashboardState, result: string): void {
  state.pending =
    result === "acked"
      ? { phase: "confirmed", detail: "acknowledged by node" }
      : { phase: "failed", detail: result };
}

export function failCommand(state: DashboardState, detail: string): void {
  state.pending = { phase: "failed", detail };
}
