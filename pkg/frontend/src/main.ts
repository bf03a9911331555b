/** Browser wiring: one store, one stream subscription, re-render on
 * change. All writes go through POST /api/command. */

import { getLog, getSnapshot, postCommand } from "./api.js";
import {
  applyEvent,
  beginCommand,
  failCommand,
  initialState,
  resolveCommand,
  validateOverride,
} from "./state.js";
import { subscribe } from "./stream.js";
import { logRowsToCsv } from "./csv.js";
import { renderApp, renderLogTable } from "./view.js";
import type { LogRow } from "./types.js";

const state = initialState();
let logRows: LogRow[] = [];

const root = document.getElementById("app")!;

function render(): void {
  root.innerHTML = renderApp(state, Date.now());
  const logDiv = document.getElementById("log-table");
  if (logDiv) {
    logDiv.innerHTML =
      renderLogTable(logRows) +
      '<p><button id="load-log">Refresh log</button> <button id="download-csv">Download CSV</button></p>';
  }
  bind();
}

async function refreshSnapshot(): Promise<void> {
  try {
    const snap = await getSnapshot();
    state.snapshot = snap;
    state.connection = "live";
    state.lastActivityMs = Date.now();
    state.alerts = [];
    for (const [node, entry] of Object.entries(snap.nodes)) {
      for (const f of entry.open_faults) {
        state.alerts.push({ node, lamp: f.lamp, kind: f.fault_kind, onset: f.onset });
      }
    }
  } catch {
    state.connection = "down";
  }
  render();
}

async function refreshLog(): Promise<void> {
  try {
    const page = await getLog({ kinds: "telemetry", limit: 200 });
    logRows = page.rows;
  } catch {
    logRows = [];
  }
  render();
}

function bind(): void {
  const form = document.getElementById("override-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    const brightness = Number(data.get("brightness"));
    const expiry = Number(data.get("expiry_s"));
    const problem = validateOverride(brightness, expiry);
    if (problem) {
      failCommand(state, problem);
      render();
      return;
    }
    const lampRaw = String(data.get("lamp"));
    beginCommand(state, "override sent");
    render();
    postCommand({
      node: String(data.get("node")),
      lamp: lampRaw === "ALL" ? "ALL" : Number(lampRaw),
      state: data.get("state") === "off" ? "off" : "on",
      brightness,
      expiry_s: expiry,
    })
      .then((audit) => resolveCommand(state, audit.result))
      .catch((err) => failCommand(state, `${err} — retry?`))
      .finally(render);
  });

  document.getElementById("clear-override")?.addEventListener("click", () => {
    const node = (document.querySelector("#override-form [name=node]") as HTMLSelectElement)
      ?.value;
    if (!node) return;
    beginCommand(state, "clear sent");
    render();
    postCommand({ node, action: "clear_override" })
      .then((audit) => resolveCommand(state, audit.result))
      .catch((err) => failCommand(state, `${err} — retry?`))
      .finally(render);
  });

  document.getElementById("load-log")?.addEventListener("click", () => void refreshLog());
  document.getElementById("download-csv")?.addEventListener("click", () => {
    const blob = new Blob([logRowsToCsv(logRows)], { type: "text/csv" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "streetlight-log.csv";
    a.click();
    URL.revokeObjectURL(a.href);
  });
}

subscribe("", {
  onConnect: async () => {
    state.connection = "live";
    await refreshSnapshot();
  },
  onEvent: (ev) => {
    if (applyEvent(state, ev, Date.now())) render();
  },
  onDown: () => {
    state.connection = "polling";
    render();
  },
});

// stale badge ticks over even with no traffic
setInterval(render, 2000);
void refreshSnapshot().then(() => refreshLog());
