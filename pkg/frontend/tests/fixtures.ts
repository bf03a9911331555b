import type { Snapshot } from "../src/types.js";

export function sampleSnapshot(): Snapshot {
  return {
    snapshot_time: 7230,
    aggregate: { total_watts: "0.15", frames: 241, gaps: 0, open_faults: 1 },
    nodes: {
      N01: {
        frames: 241,
        gaps: 0,
        open_faults: [{ lamp: 3, fault_kind: "lamp_dark", onset: 7203 }],
        rated_watts: "0.05",
        override: null,
        last: {
          t: 7230,
          seq: 241,
          date: "13/02/2022",
          time: "10:00:30pm",
          volt: "5.00",
          amp: 125,
          temp: 21,
          sun: 0,
        },
        lamps: [
          { state: 1, level: 50, fault: false },
          { state: 1, level: 50, fault: false },
          { state: 1, level: 50, fault: false },
          { state: 1, level: 50, fault: true },
          { state: 1, level: 50, fault: false },
          { state: 1, level: 50, fault: false },
        ],
      },
    },
  };
}

export function daylightSnapshot(): Snapshot {
  const snap = sampleSnapshot();
  snap.nodes.N01.open_faults = [];
  snap.aggregate.open_faults = 0;
  snap.nodes.N01.last!.sun = 66;
  snap.nodes.N01.lamps = [36, 45, 57, 34, 58, 51].map((level) => ({
    state: 0 as const,
    level,
    fault: false,
  }));
  return snap;
}
