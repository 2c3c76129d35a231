/**
 * Browser entry point: wires the session controller to the DOM.
 *
 * All decision logic lives in the imported modules; this file only renders
 * view models and forwards events.
 */

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { LocalStorageStore, OfflineQueue } from "./queue.js";
import { renderTask, type CandidateRow, type FieldCell } from "./render.js";
import type { SessionStats } from "./types.js";

// --- tiny DOM helpers -------------------------------------------------------

function $(selector: string): HTMLElement {
  const node = document.querySelector(selector);
  if (!(node instanceof HTMLElement)) {
    throw new Error(`missing element: ${selector}`);
  }
  return node;
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

// --- session setup -----------------------------------------------------------

function sessionName(): string {
  const params = new URLSearchParams(window.location.search);
  const fromUrl = params.get("session");
  if (fromUrl) {
    return fromUrl;
  }
  const stored = window.localStorage.getItem("hhlink.session");
  if (stored) {
    return stored;
  }
  const fresh = `reviewer-${Math.random().toString(36).slice(2, 10)}`;
  window.localStorage.setItem("hhlink.session", fresh);
  return fresh;
}

const api = new ApiClient("");
const queue = new OfflineQueue(new LocalStorageStore(window.localStorage));
const controller = new SessionController(api, queue, sessionName());

// --- rendering ---------------------------------------------------------------

function spanNodes(spans: { text: string; changed: boolean }[]): DocumentFragment {
  const frag = document.createDocumentFragment();
  for (const span of spans) {
    const node = el("span", span.changed ? "diff-changed" : "", span.text);
    frag.appendChild(node);
  }
  return frag;
}

function fieldCellNode(cell: FieldCell): HTMLElement {
  const td = el("td", cell.exact ? "field exact" : "field differs");
  td.appendChild(spanNodes(cell.candidateSpans));
  if (!cell.exact) {
    td.appendChild(el("span", "field-dist", String(cell.distance)));
  }
  return td;
}

function candidateNode(row: CandidateRow, index: number): HTMLElement {
  const tr = el("tr", `candidate ${row.verdict}${row.focused ? " focused" : ""}`);
  tr.dataset["index"] = String(index);

  const marker = el("td", "marker");
  marker.textContent = row.verdict === "accepted" ? "✓" : row.verdict === "rejected" ? "✗" : "·";
  tr.appendChild(marker);

  tr.appendChild(el("td", "badge", String(row.badge)));
  tr.appendChild(el("td", "pid", row.profileId));
  for (const cell of row.cells) {
    tr.appendChild(fieldCellNode(cell));
  }

  const actions = el("td", "actions");
  for (const [label, cls] of [
    ["accept", "accept"],
    ["reject", "reject"],
    ["undo", "undo"],
  ] as const) {
    const btn = el("button", cls, label) as HTMLButtonElement;
    btn.type = "button";
    btn.dataset["action"] = cls;
    btn.dataset["index"] = String(index);
    actions.appendChild(btn);
  }
  tr.appendChild(actions);
  return tr;
}

function renderStats(stats: SessionStats | null): void {
  const node = $("#stats");
  if (stats === null) {
    node.textContent = "";
    return;
  }
  const rate = stats.accept_rate === null ? "n/a" : stats.accept_rate.toFixed(2);
  node.textContent =
    `${stats.adjudicated}/${stats.profiles} adjudicated · ` +
    `${stats.clusters} clusters · accept rate ${rate}`;
}

function renderBanner(): void {
  const banner = $("#banner");
  banner.className = "";
  banner.textContent = "";
  if (controller.phase === "offline") {
    banner.className = "banner offline";
    banner.textContent =
      controller.pendingCount > 0
        ? `offline — ${controller.pendingCount} decision(s) queued locally. `
        : "offline — the service is unreachable. ";
    const retry = el("button", "retry", "retry") as HTMLButtonElement;
    retry.type = "button";
    retry.addEventListener("click", () => void reconnect());
    banner.appendChild(retry);
  } else if (controller.lastError !== null) {
    banner.className = "banner error";
    banner.textContent = controller.lastError;
  }
}

function render(): void {
  renderBanner();
  const main = $("#task");
  main.textContent = "";

  if (controller.phase === "loading") {
    main.appendChild(el("p", "status", "loading…"));
    return;
  }
  if (controller.phase === "exhausted") {
    main.appendChild(el("p", "status", "all profiles adjudicated — nothing left to review"));
    return;
  }
  if (controller.phase === "busy") {
    main.appendChild(el("p", "status", "every remaining profile is leased to another reviewer"));
    return;
  }
  const review = controller.review;
  if (review === null) {
    return;
  }

  const view = renderTask(review);

  const anchor = el("div", "anchor");
  anchor.appendChild(el("h2", "", `anchor ${view.anchorId}`));
  const anchorRow = el("div", "anchor-fields");
  for (const field of view.anchorFields) {
    const cell = el("span", "anchor-field");
    cell.appendChild(el("label", "", field.name));
    cell.appendChild(el("b", "", field.text));
    anchorRow.appendChild(cell);
  }
  anchor.appendChild(anchorRow);
  anchor.appendChild(el("p", "remaining", `${view.remaining} profiles remaining`));
  main.appendChild(anchor);

  const table = el("table", "candidates");
  const head = el("tr", "head");
  for (const col of ["", "dist", "profile", "first", "last", "day", "month", "year", ""]) {
    head.appendChild(el("th", "", col));
  }
  table.appendChild(head);
  view.rows.forEach((row, i) => table.appendChild(candidateNode(row, i)));
  main.appendChild(table);

  const controls = el("div", "controls");
  const acceptAll = el("button", "", "accept all") as HTMLButtonElement;
  const rejectAll = el("button", "", "reject all") as HTMLButtonElement;
  const submit = el("button", "submit", "submit decision") as HTMLButtonElement;
  acceptAll.type = rejectAll.type = submit.type = "button";
  submit.disabled = !view.allDecided;
  acceptAll.addEventListener("click", () => {
    review.acceptAll();
    render();
  });
  rejectAll.addEventListener("click", () => {
    review.rejectAll();
    render();
  });
  submit.addEventListener("click", () => void submitCurrent());
  controls.appendChild(acceptAll);
  controls.appendChild(rejectAll);
  controls.appendChild(submit);
  controls.appendChild(el("span", "hint", "keys: y accept · n reject · u undo · enter submit"));
  main.appendChild(controls);
}

// --- actions -----------------------------------------------------------------

async function refreshStats(): Promise<void> {
  try {
    renderStats(await api.stats());
  } catch {
    renderStats(null);
  }
}

async function submitCurrent(): Promise<void> {
  const outcome = await controller.submit();
  if (outcome === "submitted") {
    void refreshStats();
  }
  render();
}

async function reconnect(): Promise<void> {
  await controller.reconnect();
  void refreshStats();
  render();
}

function onKey(event: KeyboardEvent): void {
  const review = controller.review;
  if (review === null || event.altKey || event.ctrlKey || event.metaKey) {
    return;
  }
  const result = review.handleKey(event.key);
  if (result === "submit") {
    event.preventDefault();
    void submitCurrent();
  } else if (result !== "ignored") {
    event.preventDefault();
    render();
  }
}

function onTableClick(event: Event): void {
  const target = event.target;
  if (!(target instanceof HTMLButtonElement) || target.dataset["action"] === undefined) {
    return;
  }
  const review = controller.review;
  if (review === null) {
    return;
  }
  const index = Number(target.dataset["index"]);
  const action = target.dataset["action"];
  if (action === "accept") {
    review.accept(index);
  } else if (action === "reject") {
    review.reject(index);
  } else {
    review.undo(index);
  }
  review.focus = index;
  render();
}

// --- boot --------------------------------------------------------------------

async function main(): Promise<void> {
  $("#session").textContent = controller.session;
  ($("#export") as HTMLAnchorElement).href = "/api/export";
  document.addEventListener("keydown", onKey);
  $("#task").addEventListener("click", onTableClick);
  window.addEventListener("online", () => void reconnect());

  if (queue.length > 0) {
    await controller.reconnect();
  } else {
    await controller.start();
  }
  void refreshStats();
  render();
}

void main();
