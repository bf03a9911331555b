import { describe, expect, it } from "vitest";

import { csvHeader, logRowsToCsv, parseCsv } from "../src/csv.js";
import type { LogRow } from "../src/types.js";

const row: LogRow = {
  kind: "telemetry",
  node: "N01",
  t: 8,
  date: "13/02/2022",
  time: "01:47:30pm",
  volt: "5.00",
  amp: 117,
  temp: 21,
  sun: 32,
  lamps: [[1, 43], [1, 49], [1, 45], [1, 36], [1, 52], [1, 53]],
};

describe("csv export", () => {
  it("matches the admin-panel column order exactly", () => {
    expect(csvHeader(6)).toEqual([
      "Date", "Time", "Volt", "Amp", "Temp", "Sun",
      "Light 01", "Light 02", "Light 03", "Light 04", "Light 05", "Light 06",
    ]);
  });

  it("writes one line per telemetry row with wire cells", () => {
    const text = logRowsToCsv([row, { kind: "fault", node: "N01", t: 9 }]);
    const lines = text.split("\n").filter(Boolean);
    expect(lines).toHaveLength(2); // header + telemetry only
    expect(lines[1]).toBe("13/02/2022,01:47:30pm,5.00,117,21,32,1@43,1@49,1@45,1@36,1@52,1@53");
  });

  it("round-trips through parseCsv", () => {
    const text = logRowsToCsv([row]);
    const parsed = parseCsv(text);
    expect(parsed[0]).toEqual(csvHeader(6));
    expect(parsed[1][2]).toBe("5.00");
    expect(parsed[1][6]).toBe("1@43");
  });
});
