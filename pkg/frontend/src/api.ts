/** Thin fetch wrappers over the control-room API. */

import type { Audit, EnergyReport, LogPage, OverrideForm, Snapshot } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(base: string, path: string): Promise<T> {
  const resp = await fetch(base + path);
  if (!resp.ok) {
    const body = await resp.text();
    throw new ApiError(resp.status, `${path}: ${resp.status} ${body}`);
  }
  return (await resp.json()) as T;
}

export function getSnapshot(base = ""): Promise<Snapshot> {
  return getJson<Snapshot>(base, "/api/snapshot");
}

export interface LogQuery {
  node?: string;
  from?: number;
  to?: number;
  kinds?: string;
  offset?: number;
  limit?: number;
}

export function getLog(query: LogQuery = {}, base = ""): Promise<LogPage> {
  const params = new URLSearchParams();
  for (const [key, value] of Object.entries(query)) {
    if (value !== undefined) params.set(key, String(value));
  }
  const qs = params.toString();
  return getJson<LogPage>(base, "/api/log" + (qs ? `?${qs}` : ""));
}

export interface FaultRecordOut {
  node: string;
  lamp: number;
  fault_kind: string;
  onset: number;
  cleared: number | null;
}

export function getFaults(openOnly: boolean, base = ""): Promise<{ faults: FaultRecordOut[] }> {
  return getJson(base, `/api/faults?open=${openOnly ? "1" : "0"}`);
}

export function getEnergy(
  from: number,
  to: number,
  tariff = "7.70",
  base = "",
): Promise<EnergyReport> {
  return getJson<EnergyReport>(base, `/api/energy?from=${from}&to=${to}&tariff=${tariff}`);
}

export async function postCommand(
  form: OverrideForm | { node: string; action: "clear_override" | "request_snapshot" },
  base = "",
): Promise<Audit> {
  const body =
    "brightness" in form
      ? { ...form, action: "set_override" }
      : form;
  const resp = await fetch(base + "/api/command", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, payload.error ?? `command failed (${resp.status})`);
  }
  return payload.audit as Audit;
}
