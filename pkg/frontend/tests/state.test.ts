import { describe, expect, it } from "vitest";

import {
  applyEvent,
  beginCommand,
  failCommand,
  initialState,
  isStale,
  resolveCommand,
  setSnapshot,
  validateOverride,
} from "../src/state.js";
import { sampleSnapshot } from "./fixtures.js";

function liveState() {
  const state = initialState(0);
  setSnapshot(state, sampleSnapshot(), 0);
  return state;
}

describe("frame deltas", () => {
  it("patch tiles, readouts and counters", () => {
    const state = liveState();
    const changed = applyEvent(
      state,
      {
        event: "frame",
        node: "N01",
        t: 7260,
        sun: 0,
        volt: "5.00",
        amp: 155,
        temp: 21,
        lamps: [[1, 100], [1, 100], [1, 100], [1, 100], [1, 100], [1, 100]],
        override: "ALL:on:100:7800",
      },
      100,
    );
    expect(changed).toBe(true);
    const node = state.snapshot!.nodes.N01;
    expect(node.lamps!.every((l) => l.state === 1 && l.level === 100)).toBe(true);
    expect(node.lamps![3].fault).toBe(true); // open fault survives frames
    expect(node.override).toBe("ALL:on:100:7800");
    expect(node.frames).toBe(242);
    expect(state.snapshot!.aggregate.frames).toBe(242);
    expect(state.snapshot!.snapshot_time).toBe(7260);
  });

  it("create an entry for a new node", () => {
    const state = liveState();
    applyEvent(
      state,
      { event: "frame", node: "N02", t: 10, sun: 5, lamps: [[1, 50]] },
      100,
    );
    expect(state.snapshot!.nodes.N02.lamps).toHaveLength(1);
  });
});

describe("fault deltas", () => {
  it("open then clear round-trips the banner and tile badge", () => {
    const state = liveState();
    applyEvent(
      state,
      { event: "fault_open", node: "N01", lamp: 1, fault_kind: "lamp_dark", onset: 7300 },
      100,
    );
    expect(state.snapshot!.nodes.N01.lamps![1].fault).toBe(true);
    expect(state.alerts.filter((a) => a.cleared === undefined)).toHaveLength(2);

    applyEvent(
      state,
      { event: "fault_clear", node: "N01", lamp: 1, fault_kind: "lamp_dark", cleared: 7400 },
      200,
    );
    expect(state.snapshot!.nodes.N01.lamps![1].fault).toBe(false);
    expect(state.alerts.filter((a) => a.cleared === undefined)).toHaveLength(1);
  });
});

describe("staleness", () => {
  it("activity resets the stale clock", () => {
    const state = liveState();
    expect(isStale(state, 10_001)).toBe(true);
    applyEvent(state, { event: "frame", node: "N01", t: 1, lamps: [] }, 10_001);
    expect(isStale(state, 15_000)).toBe(false);
  });
});

describe("override form validation", () => {
  it("blocks brightness 150 before any request", () => {
    expect(validateOverride(150, 600)).toMatch(/brightness/);
  });
  it("blocks non-positive expiry", () => {
    expect(validateOverride(100, 0)).toMatch(/expiry/);
  });
  it("accepts the defaults", () => {
    expect(validateOverride(100, 600)).toBeNull();
  });
});

describe("command lifecycle", () => {
  it("pending then confirmed on acked audit", () => {
    const state = liveState();
    beginCommand(state, "override sent");
    expect(state.pending.phase).toBe("pending");
    resolveCommand(state, "acked");
    expect(state.pending.phase).toBe("confirmed");
  });

  it("timed-out audit surfaces as failed", () => {
    const state = liveState();
    beginCommand(state, "override sent");
    resolveCommand(state, "timed_out");
    expect(state.pending.phase).toBe("failed");
    expect(state.pending.detail).toBe("timed_out");
  });

  it("audit stream events resolve a pending command too", () => {
    const state = liveState();
    beginCommand(state, "override sent");
    applyEvent(state, { event: "audit", seq: 9, result: "acked" }, 50);
    expect(state.pending.phase).toBe("confirmed");
  });

  it("network failure keeps a retry affordance", () => {
    const state = liveState();
    beginCommand(state, "override sent");
    failCommand(state, "fetch failed — retry?");
    expect(state.pending.phase).toBe("failed");
    expect(state.pending.detail).toContain("retry");
  });
});
