/** HTML renderers. Pure string builders over the store, so every view
 * is unit-testable without a browser. Lamp tiles show the exact wire
 * cell text (state@brightness). */

import type { DashboardState } from "./state.js";
import { isStale } from "./state.js";
import type { LogRow, NodeEntry, Snapshot } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderApp(state: DashboardState, nowMs: number): string {
  const snap = state.snapshot;
  return `
    <header class="topbar">
      <h1>Streetlight Control Room</h1>
      ${renderConnection(state, nowMs)}
    </header>
    ${renderFaultBanner(state)}
    <main>
      ${snap ? renderFleet(snap) : '<p class="empty">loading…</p>'}
      <section class="panel" id="override-panel">
        <h2>Emergency control</h2>
        ${renderOverrideForm(state)}
      </section>
      <section class="panel" id="log-panel">
        <h2>Historical data</h2>
        <div id="log-table"></div>
      </section>
    </main>`;
}

export function renderConnection(state: DashboardState, nowMs: number): string {
  const stale = isStale(state, nowMs);
  const label = stale ? "stale" : state.connection;
  const cls = stale ? "stale" : state.connection === "live" ? "live" : "warn";
  return `<span class="conn ${cls}" data-testid="conn">${label}</span>`;
}

export function renderFleet(snap: Snapshot): string {
  const nodes = Object.keys(snap.nodes).sort();
  if (nodes.length === 0) {
    return '<p class="empty" data-testid="no-nodes">No nodes have reported yet.</p>';
  }
  const cards = nodes.map((id) => renderNodeCard(id, snap.nodes[id])).join("\n");
  return `
    <section class="panel">
      <h2>Fleet</h2>
      <p class="aggregate">frames ${snap.aggregate.frames} ·
        gaps ${snap.aggregate.gaps} ·
        load ${escapeHtml(snap.aggregate.total_watts)} W ·
        open faults ${snap.aggregate.open_faults}</p>
      <div class="cards">${cards}</div>
    </section>`;
}

export function renderNodeCard(nodeId: string, entry: NodeEntry): string {
  const last = entry.last;
  const tiles = (entry.lamps ?? [])
    .map(
      (lamp, i) => `
      <div class="tile ${lamp.state ? "on" : "off"} ${lamp.fault ? "fault" : ""}"
           data-testid="tile-${nodeId}-${i}">
        <span class="tile-name">Light ${String(i + 1).padStart(2, "0")}</span>
        <span class="tile-cell">${lamp.state}@${lamp.level}</span>
        ${lamp.fault ? '<span class="badge">damaged</span>' : ""}
      </div>`,
    )
    .join("");
  const override = entry.override
    ? `<p class="override" data-testid="override-${nodeId}">override ${escapeHtml(entry.override)}</p>`
    : "";
  return `
    <article class="card" data-testid="node-${nodeId}">
      <h3>${escapeHtml(nodeId)}</h3>
      ${last ? renderSunGauge(last.sun) : ""}
      ${last ? renderReadouts(last.volt, last.amp, last.temp, last.t) : ""}
      <div class="tiles">${tiles}</div>
      ${override}
    </article>`;
}

export function renderSunGauge(sunPct: number): string {
  const clamped = Math.max(0, Math.min(100, sunPct));
  return `
    <div class="gauge" data-testid="sun-gauge" data-sun="${clamped}">
      <div class="gauge-fill" style="width:${clamped}%"></div>
      <span class="gauge-label">sun ${clamped}%</span>
    </div>`;
}

export function renderReadouts(volt: string, amp: number, temp: number, t: number): string {
  return `
    <dl class="readouts">
      <div><dt>volt</dt><dd data-testid="volt">${escapeHtml(volt)}</dd></div>
      <div><dt>amp</dt><dd data-testid="amp">${amp} mA</dd></div>
      <div><dt>temp</dt><dd data-testid="temp">${temp} °C</dd></div>
      <div><dt>sim t</dt><dd data-testid="simt">${t} s</dd></div>
    </dl>`;
}

export function renderFaultBanner(state: DashboardState): string {
  const open = state.alerts.filter((a) => a.cleared === undefined);
  if (open.length === 0) return '<div id="fault-banner" class="banner ok">no active faults</div>';
  const items = open
    .map(
      (a) =>
        `<li data-testid="fault-${a.node}-${a.lamp}">
          ${escapeHtml(a.node)} Light ${String(a.lamp + 1).padStart(2, "0")}:
          ${escapeHtml(a.kind)} since t=${a.onset}</li>`,
    )
    .join("");
  return `<div id="fault-banner" class="banner alert"><strong>${open.length} fault(s)</strong><ul>${items}</ul></div>`;
}

export function renderOverrideForm(state: DashboardState): string {
  const nodes = state.snapshot ? Object.keys(state.snapshot.nodes).sort() : [];
  const options = nodes.map((n) => `<option value="${escapeHtml(n)}">${escapeHtml(n)}</option>`).join("");
  const pending = state.pending;
  const status =
    pending.phase === "idle"
      ? ""
      : `<span class="cmd ${pending.phase}" data-testid="cmd-status">${pending.phase}: ${escapeHtml(pending.detail)}</span>`;
  return `
    <form id="override-form">
      <label>node <select name="node">${options}</select></label>
      <label>lamp <select name="lamp">
        <option value="ALL">ALL</option>
        ${[0, 1, 2, 3, 4, 5].map((i) => `<option value="${i}">${i + 1}</option>`).join("")}
      </select></label>
      <label>state <select name="state"><option>on</option><option>off</option></select></label>
      <label>brightness <input name="brightness" type="number" min="0" max="100" value="100"></label>
      <label>expiry (s) <input name="expiry_s" type="number" min="1" value="600"></label>
      <button type="submit" ${pending.phase === "pending" ? "disabled" : ""}>Send</button>
      <button type="button" id="clear-override">Clear override</button>
      ${status}
    </form>`;
}

/** Fig-8-shaped log table; cells use the exact wire encoding. */
export function renderLogTable(rows: LogRow[], lampCount = 6): string {
  const header =
    ["Date", "Time", "Volt", "Amp", "Temp", "Sun"]
      .concat(Array.from({ length: lampCount }, (_, i) => `Light ${String(i + 1).padStart(2, "0")}`))
      .map((h) => `<th>${h}</th>`)
      .join("");
  const body = rows
    .filter((r) => r.kind === "telemetry")
    .map((r) => {
      const cells = (r.lamps ?? [])
        .map(([bit, level]) => `<td class="cell">${bit}@${level}</td>`)
        .join("");
      return `<tr>
        <td>${escapeHtml(r.date ?? "")}</td><td>${escapeHtml(r.time ?? "")}</td>
        <td>${escapeHtml(r.volt ?? "")}</td><td>${r.amp ?? ""}</td>
        <td>${r.temp ?? ""}</td><td>${r.sun ?? ""}</td>${cells}</tr>`;
    })
    .join("");
  return `<table class="log"><thead><tr>${header}</tr></thead><tbody>${body}</tbody></table>`;
}
