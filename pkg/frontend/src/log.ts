/**
 * Side panel: connection banner, clarification banner, command history.
 */

import type { UiState } from "./state.js";
import type { CommandWire } from "./wire.js";

export function describeCommand(cmd: CommandWire): string {
  const parts = [cmd.kind.replace("_", " ")];
  if (cmd.monitors && cmd.monitors.length) parts.push(`monitors ${cmd.monitors.join(", ")}`);
  if (cmd.device) parts.push(`to ${cmd.device}`);
  if (cmd.seconds !== undefined && cmd.seconds !== null) parts.push(`${cmd.seconds}s`);
  return parts.join(" · ");
}

export function renderPanel(panel: HTMLElement, ui: UiState): void {
  panel.textContent = "";

  if (ui.connection !== "open") {
    const banner = document.createElement("div");
    banner.className = "banner banner-connection";
    banner.textContent = ui.connection === "connecting" ? "connecting…" : "connection lost, retrying";
    panel.appendChild(banner);
  }

  if (ui.clarification !== null) {
    const banner = document.createElement("div");
    banner.className = "banner banner-clarification";
    banner.textContent = `need more input: ${ui.clarification}`;
    panel.appendChild(banner);
  }

  for (const err of ui.errors.slice(0, 3)) {
    const banner = document.createElement("div");
    banner.className = "banner banner-error";
    banner.textContent = err;
    panel.appendChild(banner);
  }

  const list = document.createElement("ol");
  list.className = "command-log";
  for (const entry of ui.commands) {
    const item = document.createElement("li");
    item.textContent = describeCommand(entry.command);
    if (entry.rejected) {
      item.classList.add("command-rejected");
      item.textContent += ` (rejected: ${entry.rejected})`;
    }
    list.appendChild(item);
  }
  panel.appendChild(list);
}
