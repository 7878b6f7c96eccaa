/** Browser entry: wires the view models to the DOM.
 *
 * Screens: folder list, annotation canvas with hierarchy dropdowns and
 * reference panel, quality-check queue, auto-accepted review gallery, and
 * the model/class dashboards. QC queue and dashboards poll every 5 s.
 */

import { ApiClient, NextImage, Point } from "./api.js";
import { CanvasSession, CloseTooEarly } from "./canvas.js";
import { renderLineChart, seriesFromTimelines } from "./dashboards.js";
import { HeartbeatLoop } from "./heartbeat.js";
import { HierarchySelection } from "./hierarchy.js";
import { HUMAN_COLOR, MACHINE_COLOR, QcQueue } from "./qc.js";

const POLL_MS = 5_000;
const api = new ApiClient("");
const userId = localStorage.getItem("annoforge_user") ?? `annotator-${Date.now() % 10000}`;
localStorage.setItem("annoforge_user", userId);

const app = document.getElementById("app")!;

interface Session {
  next: NextImage;
  canvas: CanvasSession;
  selection: HierarchySelection;
  heartbeat: HeartbeatLoop;
  heartbeatTimer: number;
}

let session: Session | null = null;

function el(tag: string, attrs: Record<string, string> = {}, text = ""): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function nav(active: string): HTMLElement {
  const bar = el("nav", { class: "nav" });
  for (const [name, handler] of [
    ["folders", showFolders],
    ["quality check", showQc],
    ["auto-accepted", showAutoAccepted],
    ["dashboards", showDashboards],
  ] as const) {
    const link = el("a", { class: name === active ? "active" : "", href: "#" }, name);
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void handler();
    });
    bar.appendChild(link);
  }
  return bar;
}

function swap(...children: HTMLElement[]): void {
  app.replaceChildren(...children);
}

async function showFolders(): Promise<void> {
  stopSession();
  const folders = (await api.listFolders()) ?? [];
  const list = el("div", { class: "folders" });
  for (const folder of folders) {
    const row = el("button", { class: "folder-row" },
      `${folder.folder_id} — ${folder.unannotated} to annotate, ` +
      `${folder.annotated} done`);
    row.addEventListener("click", () => void startAnnotating(folder.folder_id));
    list.appendChild(row);
  }
  swap(nav("folders"), el("h2", {}, "Folders"), list);
}

async function startAnnotating(folderId: string): Promise<void> {
  const next = await api.nextImage(folderId, userId);
  if (!next) {
    swap(nav("folders"), el("p", { class: "empty-state" },
      "No images available in this folder (all annotated or leased)."));
    return;
  }
  const canvas = new CanvasSession(next.image.width, next.image.height);
  const selection = new HierarchySelection(next.hierarchy);
  const heartbeat = new HeartbeatLoop(() => api.heartbeat(next.lease.lease_token));
  const heartbeatTimer = window.setInterval(() => heartbeat.tick(), 1_000);
  session = { next, canvas, selection, heartbeat, heartbeatTimer };
  renderAnnotator();
}

function stopSession(): void {
  if (session) {
    session.heartbeat.stop();
    window.clearInterval(session.heartbeatTimer);
    void api.releaseLease(session.next.lease.lease_token);
    session = null;
  }
}

function polygonSvg(points: readonly Point[], color: string, closed: boolean): string {
  const coords = points.map(([x, y]) => `${x},${y}`).join(" ");
  const tag = closed ? "polygon" : "polyline";
  return `<${tag} points="${coords}" fill="${color}22" stroke="${color}" stroke-width="2"/>`;
}

function renderAnnotator(): void {
  if (!session) return;
  const { next, canvas, selection } = session;

  const stage = el("div", { class: "stage" });
  const overlayParts = [
    `<image href="${next.image.url}" width="${next.image.width}" height="${next.image.height}"/>`,
    ...canvas.committedPolygons.map((c) => polygonSvg(c.polygon, HUMAN_COLOR, true)),
  ];
  if (canvas.pending) overlayParts.push(polygonSvg(canvas.pending, HUMAN_COLOR, true));
  if (canvas.inProgress.length) {
    overlayParts.push(polygonSvg(canvas.inProgress, "#888888", false));
  }
  stage.innerHTML =
    `<svg viewBox="0 0 ${next.image.width} ${next.image.height}" class="canvas-svg">` +
    overlayParts.join("") + "</svg>";

  const svg = stage.querySelector("svg")!;
  svg.addEventListener("click", (event) => {
    const rect = svg.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * next.image.width;
    const y = ((event.clientY - rect.top) / rect.height) * next.image.height;
    session!.heartbeat.activity();
    try {
      session!.canvas.click(x, y);
    } catch (err) {
      if (!(err instanceof CloseTooEarly)) throw err;
      setStatus(err.message);
    }
    renderAnnotator();
  });

  const dropdowns = el("div", { class: "dropdowns" });
  selection.levels().forEach((level, index) => {
    const select = el("select") as HTMLSelectElement;
    select.appendChild(el("option", { value: "" }, "choose..."));
    for (const option of level.options) {
      const node = el("option", { value: option.nodeId }, option.name);
      if (option.nodeId === level.selected) node.setAttribute("selected", "selected");
      select.appendChild(node);
    }
    select.addEventListener("change", () => {
      if (select.value) {
        selection.select(index, select.value);
        void refreshReferences();
        renderAnnotator();
      }
    });
    dropdowns.appendChild(select);
  });

  const refPanel = el("div", { class: "references", id: "ref-panel" });

  const submit = el("button", { class: "primary" }, "Submit annotation") as HTMLButtonElement;
  submit.disabled = !(selection.submitEnabled && canvas.pending);
  submit.addEventListener("click", () => void submitCurrent());

  const discard = el("button", {}, "Discard (Esc)");
  discard.addEventListener("click", () => {
    canvas.escape();
    renderAnnotator();
  });

  document.onkeydown = (event) => {
    if (event.key === "Escape") {
      canvas.escape();
      renderAnnotator();
    }
    session?.heartbeat.activity();
  };

  swap(nav("folders"),
    el("h2", {}, `Annotating ${next.image.image_id}`),
    stage,
    el("div", { class: "controls" }),
  );
  const controls = app.querySelector(".controls")!;
  controls.append(dropdowns, refPanel, submit, discard);
  void refreshReferences();
}

async function refreshReferences(): Promise<void> {
  if (!session) return;
  const panel = document.getElementById("ref-panel");
  if (!panel) return;
  const labelId = session.selection.labelId();
  if (!labelId) {
    panel.textContent = "select a leaf class to see references";
    return;
  }
  const refs = (await api.references(labelId)) ?? [];
  if (refs.length === 0) {
    panel.textContent = "no references for this class";
    return;
  }
  panel.replaceChildren(...refs.map((ref) => {
    const figure = el("figure");
    figure.innerHTML = `<img src="${ref.url}" alt=""/>` +
      (ref.caption ? `<figcaption>${ref.caption}</figcaption>` : "");
    return figure;
  }));
}

async function submitCurrent(): Promise<void> {
  if (!session) return;
  const { next, canvas, selection } = session;
  const labelId = selection.labelId();
  if (!labelId || !canvas.pending) return;
  try {
    await api.submitAnnotation(next.image.image_id, next.lease.lease_token,
      canvas.pending, labelId, userId);
  } catch (err) {
    setStatus(String(err));
    return;
  }
  session.heartbeat.stop();  // lease released server-side on submit
  window.clearInterval(session.heartbeatTimer);
  const folderId = next.image.folder_id;
  session = null;
  await startAnnotating(folderId);
}

function setStatus(message: string): void {
  let bar = document.getElementById("status-bar");
  if (!bar) {
    bar = el("div", { id: "status-bar", class: "status" });
    app.prepend(bar);
  }
  bar.textContent = message;
}

let qcTimer: number | null = null;

async function showQc(): Promise<void> {
  stopSession();
  if (qcTimer) window.clearInterval(qcTimer);
  const queue = new QcQueue(api, userId);

  const render = async () => {
    await queue.load();
    const list = el("div", { class: "qc-list" });
    for (const view of queue.views()) {
      const card = el("div", { class: "qc-card" });
      const badge = view.autoAcceptBadge
        ? `<span class="badge">auto-accepted</span>` : "";
      card.innerHTML =
        `<svg viewBox="0 0 200 150" class="thumb">` +
        polygonSvg(view.annotation.polygon.map(([x, y]) => [x * 0.5, y * 0.5]),
          view.color, true) +
        `</svg><div>${view.annotation.label_id} ${badge}</div>`;
      const accept = el("button", {}, "accept");
      accept.addEventListener("click", async () => {
        await queue.accept(view.annotation.annotation_id);
        await render();
      });
      const reject = el("button", {}, "reject");
      reject.addEventListener("click", async () => {
        await queue.reject(view.annotation.annotation_id, "rejected in review");
        await render();
      });
      card.append(accept, reject);
      list.appendChild(card);
    }
    const error = queue.error ? el("p", { class: "error" }, queue.error) : el("span");
    swap(nav("quality check"), el("h2", {}, "Quality check"), error, list);
  };

  await render();
  qcTimer = window.setInterval(() => void render(), POLL_MS);
}

async function showAutoAccepted(): Promise<void> {
  stopSession();
  const queue = new QcQueue(api, userId);
  await queue.load("model");
  const gallery = el("div", { class: "qc-list" });
  for (const view of queue.views()) {
    const card = el("div", { class: "qc-card" });
    card.innerHTML = `<svg viewBox="0 0 200 150" class="thumb">` +
      polygonSvg(view.annotation.polygon.map(([x, y]) => [x * 0.5, y * 0.5]),
        MACHINE_COLOR, true) +
      `</svg><div>${view.annotation.label_id} @ ` +
      `${(view.annotation.confidence * 100).toFixed(0)}%</div>`;
    gallery.appendChild(card);
  }
  swap(nav("auto-accepted"),
    el("h2", {}, "Model output the system is confident about"), gallery);
}

let dashTimer: number | null = null;

async function showDashboards(): Promise<void> {
  stopSession();
  if (dashTimer) window.clearInterval(dashTimer);

  const render = async () => {
    const models = (await api.listModels()) ?? [];
    const timelines = [];
    for (const model of models) {
      try {
        const timeline = await api.modelTimeline(model.model_id);
        if (timeline) timelines.push({ label: model.display_name, timeline });
      } catch {
        // models without metrics yet simply do not chart
      }
    }
    const chart = el("div", { class: "chart-box" });
    chart.innerHTML = renderLineChart(seriesFromTimelines(timelines),
      { title: "mean IoU per training instance" });
    swap(nav("dashboards"), el("h2", {}, "Model performance"), chart);
  };

  await render();
  dashTimer = window.setInterval(() => void render(), POLL_MS);
}

void showFolders();
