/** Live updates: SSE subscription with a polling fallback.
 *
 * On (re)connect the full snapshot is refetched before deltas apply;
 * the stream is delta-based, so patching a stale snapshot would drift.
 */

import type { StreamEvent } from "./types.js";

export interface StreamHandlers {
  onConnect: () => void | Promise<void>;
  onEvent: (ev: StreamEvent) => void;
  onDown: () => void;
}

const EVENT_NAMES = [
  "frame",
  "fault_open",
  "fault_clear",
  "gap",
  "command",
  "ack",
  "audit",
];

export interface StreamHandle {
  close: () => void;
}

export function subscribe(base: string, handlers: StreamHandlers): StreamHandle {
  let source: EventSource | null = null;
  let pollTimer: ReturnType<typeof setInterval> | null = null;
  let closed = false;

  const stopPolling = () => {
    if (pollTimer !== null) {
      clearInterval(pollTimer);
      pollTimer = null;
    }
  };

  const startPolling = () => {
    if (pollTimer !== null || closed) return;
    handlers.onDown();
    // polling fallback: full snapshot refresh on an interval
    pollTimer = setInterval(() => void handlers.onConnect(), 3000);
  };

  const open = () => {
    if (closed) return;
    source = new EventSource(base + "/api/stream");
    source.onopen = () => {
      stopPolling();
      void handlers.onConnect();
    };
    source.onerror = () => {
      startPolling();
    };
    for (const name of EVENT_NAMES) {
      source.addEventListener(name, (raw) => {
        try {
          handlers.onEvent(JSON.parse((raw as MessageEvent).data) as StreamEvent);
        } catch {
          // malformed event payloads are dropped, never fatal
        }
      });
    }
  };

  open();
  return {
    close: () => {
      closed = true;
      stopPolling();
      source?.close();
    },
  };
}
