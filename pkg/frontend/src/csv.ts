/** CSV export of the log table, column-for-column the admin-panel
 * shape, so a download re-parses under the wire protocol's row codec. */

import type { LogRow } from "./types.js";

export function csvHeader(lampCount: number): string[] {
  return ["Date", "Time", "Volt", "Amp", "Temp", "Sun"].concat(
    Array.from({ length: lampCount }, (_, i) => `Light ${String(i + 1).padStart(2, "0")}`),
  );
}

export function logRowsToCsv(rows: LogRow[]): string {
  const telemetry = rows.filter((r) => r.kind === "telemetry");
  const lampCount = telemetry.length > 0 ? (telemetry[0].lamps ?? []).length : 6;
  const lines = [csvHeader(lampCount).join(",")];
  for (const row of telemetry) {
    const cells = (row.lamps ?? []).map(([bit, level]) => `${bit}@${level}`);
    lines.push(
      [
        row.date ?? "",
        row.time ?? "",
        row.volt ?? "",
        String(row.amp ?? 0),
        String(row.temp ?? 0),
        String(row.sun ?? 0),
        ...cells,
      ].join(","),
    );
  }
  return lines.join("\n") + "\n";
}

/** Parse our own CSV back into field arrays (fields never contain
 * commas by construction). */
export function parseCsv(text: string): string[][] {
  return text
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}
