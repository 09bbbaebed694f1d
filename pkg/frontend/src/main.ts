import { TuningApi, type ComposeRequest } from "./api.js";
import { cannyEdges, luminance } from "./canny.js";
import { clampWipe, identityTransform, panBy, planCompare, zoomAt, type SavedResult, type ViewTransform } from "./compare.js";
import { PreviewScheduler } from "./scheduler.js";
import {
  CHANNELS,
  allChannelsBound,
  applyPreset,
  clampAlpha,
  clampPhi,
  deserializeState,
  provenanceOf,
  serializeState,
  setChannelParam,
} from "./state.js";
import type { ChannelControlState, ChannelName, ImageResult, PresetTable, StackInfo } from "./types.js";
import { ALGOS } from "./types.js";

const STORAGE_KEY = "speckletk-workbench-state";
const CHANNEL_TITLES: Record<ChannelName, string> = { r: "Red", g: "Green", b: "Blue" };

const api = new TuningApi(new URLSearchParams(location.search).get("service") ?? "");

function $<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let state: ChannelControlState = deserializeState(localStorage.getItem(STORAGE_KEY));
let stacks: StackInfo[] = [];
let presets: PresetTable = {};
let lastPreview: ImageResult | null = null;
let lastFull: { result: ImageResult; provenance: string } | null = null;
const savedResults: SavedResult[] = [];
const savedBitmaps = new Map<string, ImageBitmap>();

// ------------------------------------------------------------------ banner

function showBanner(message: string | null): void {
  const banner = $<HTMLDivElement>("service-banner");
  if (message === null) {
    banner.classList.add("hidden");
  } else {
    banner.textContent = message;
    banner.classList.remove("hidden");
  }
}

// ------------------------------------------------------------------ preview

async function drawResult(canvas: HTMLCanvasElement, result: ImageResult): Promise<ImageBitmap> {
  const bitmap = await createImageBitmap(new Blob([result.data], { type: "image/png" }));
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  if (state.edgeOverlay.enabled) {
    const pixels = ctx.getImageData(0, 0, canvas.width, canvas.height);
    const edges = cannyEdges(luminance(pixels.data), canvas.width, canvas.height, {
      sigma: state.edgeOverlay.sigma,
      highThreshold: state.edgeOverlay.threshold,
      lowRatio: 0.4,
    });
    for (let i = 0; i < edges.length; i++) {
      if (edges[i] === 1) {
        pixels.data[4 * i] = 255;
        pixels.data[4 * i + 1] = 40;
        pixels.data[4 * i + 2] = 40;
      }
    }
    ctx.putImageData(pixels, 0, 0);
  }
  return bitmap;
}

function composeRequest(preview: boolean): ComposeRequest {
  const channels = {} as ComposeRequest["channels"];
  for (const ch of CHANNELS) {
    const p = state[ch];
    channels[ch] = { stack_id: p.stackId!, algo: p.algo, phi: p.phi, alpha: p.alpha };
  }
  return { channels, preview };
}

let requestStartedAt = 0;

const previewScheduler = new PreviewScheduler<ComposeRequest, ImageResult>(
  (req) => {
    requestStartedAt = performance.now();
    return api.compose(req);
  },
  (result) => {
    const total = performance.now() - requestStartedAt;
    lastPreview = result;
    void drawResult($<HTMLCanvasElement>("preview-canvas"), result);
    $<HTMLDivElement>("preview-stats").textContent =
      `${result.width}×${result.height} preview · compute ${result.computeMs.toFixed(1)} ms` +
      ` · end-to-end ${total.toFixed(0)} ms · degenerate terms ${result.degenerateTerms}`;
    showBanner(null);
  },
  (err) => showBanner(`service error: ${String(err)}`),
  150,
);

function schedulePreview(): void {
  const hint = $<HTMLDivElement>("compose-hint");
  const renderBtn = $<HTMLButtonElement>("render-full");
  if (!allChannelsBound(state)) {
    const missing = CHANNELS.filter((ch) => state[ch].stackId === null)
      .map((ch) => CHANNEL_TITLES[ch])
      .join(", ");
    hint.textContent = `compose disabled: bind a stack to ${missing}`;
    hint.classList.remove("hidden");
    renderBtn.disabled = true;
    return;
  }
  hint.classList.add("hidden");
  renderBtn.disabled = false;
  previewScheduler.request(composeRequest(true));
}

// ------------------------------------------------------------------ state

function update(next: ChannelControlState): void {
  state = next;
  localStorage.setItem(STORAGE_KEY, serializeState(state));
  renderControls();
  schedulePreview();
}

// ------------------------------------------------------------------ controls

function stackOptions(select: HTMLSelectElement, selected: string | null): void {
  select.replaceChildren();
  const none = document.createElement("option");
  none.value = "";
  none.textContent = "(unbound)";
  select.append(none);
  for (const s of stacks) {
    const opt = document.createElement("option");
    opt.value = s.id;
    opt.textContent = `${s.label} (${s.width}×${s.height}×${s.frames})`;
    select.append(opt);
  }
  select.value = selected ?? "";
}

function channelPanel(ch: ChannelName): HTMLDivElement {
  const panel = document.createElement("div");
  panel.className = `channel ${ch}`;
  panel.innerHTML = `
    <strong>${CHANNEL_TITLES[ch]}</strong>
    <label>stack <select data-ch="${ch}" data-key="stackId"></select></label>
    <label>algo <select data-ch="${ch}" data-key="algo"></select></label>
    <label>&phi; <input type="range" min="0" max="180" step="0.5" data-ch="${ch}" data-key="phi" />
      <span class="value" data-value="phi"></span></label>
    <label>&alpha; <input type="range" min="0.1" max="4" step="0.01" data-ch="${ch}" data-key="alpha" />
      <span class="value" data-value="alpha"></span></label>
  `;
  const algoSelect = panel.querySelector<HTMLSelectElement>('select[data-key="algo"]')!;
  for (const algo of ALGOS) {
    const opt = document.createElement("option");
    opt.value = algo;
    opt.textContent = algo;
    algoSelect.append(opt);
  }
  panel.addEventListener("input", (ev) => {
    const target = ev.target as HTMLInputElement | HTMLSelectElement;
    const key = target.dataset.key as "phi" | "alpha" | "algo" | "stackId" | undefined;
    if (!key) return;
    let value: string | number | null = target.value;
    if (key === "phi") value = clampPhi(Number(value));
    if (key === "alpha") value = clampAlpha(Number(value));
    if (key === "stackId" && value === "") value = null;
    update(setChannelParam(state, ch, key, value));
  });
  return panel;
}

function renderControls(): void {
  const host = $<HTMLDivElement>("channel-controls");
  if (host.childElementCount === 0) {
    for (const ch of CHANNELS) host.append(channelPanel(ch));
  }
  for (const ch of CHANNELS) {
    const panel = host.querySelector<HTMLDivElement>(`.channel.${ch}`)!;
    stackOptions(panel.querySelector<HTMLSelectElement>('select[data-key="stackId"]')!, state[ch].stackId);
    panel.querySelector<HTMLSelectElement>('select[data-key="algo"]')!.value = state[ch].algo;
    const phi = panel.querySelector<HTMLInputElement>('input[data-key="phi"]')!;
    const alpha = panel.querySelector<HTMLInputElement>('input[data-key="alpha"]')!;
    phi.value = String(state[ch].phi);
    alpha.value = String(state[ch].alpha);
    panel.querySelector<HTMLSpanElement>('[data-value="phi"]')!.textContent = `${state[ch].phi.toFixed(1)}°`;
    panel.querySelector<HTMLSpanElement>('[data-value="alpha"]')!.textContent = state[ch].alpha.toFixed(2);
  }
  $<HTMLInputElement>("linked-toggle").checked = state.linked;
  $<HTMLInputElement>("edge-toggle").checked = state.edgeOverlay.enabled;
  $<HTMLInputElement>("edge-sigma").value = String(state.edgeOverlay.sigma);
  $<HTMLInputElement>("edge-threshold").value = String(state.edgeOverlay.threshold);
}

function renderStackList(): void {
  const list = $<HTMLUListElement>("stack-list");
  list.replaceChildren();
  for (const s of stacks) {
    const li = document.createElement("li");
    li.textContent = `${s.id}: ${s.label} (${s.width}×${s.height}, ${s.frames} frames)`;
    list.append(li);
  }
}

function renderPresetButtons(): void {
  const host = $<HTMLDivElement>("preset-buttons");
  host.replaceChildren();
  for (const name of Object.keys(presets)) {
    const btn = document.createElement("button");
    btn.textContent = name;
    btn.title = CHANNELS.map(
      (ch) => `${ch.toUpperCase()}: ${presets[name][ch].algo}(φ=${presets[name][ch].phi}) α=${presets[name][ch].alpha}`,
    ).join("  ");
    btn.addEventListener("click", () => update(applyPreset(state, presets, name)));
    host.append(btn);
  }
}

// ------------------------------------------------------------------ full render

async function renderFull(): Promise<void> {
  if (!allChannelsBound(state)) return;
  const progress = $<HTMLSpanElement>("full-progress");
  progress.classList.remove("hidden");
  try {
    const result = await api.compose(composeRequest(false));
    const provenance = JSON.stringify(provenanceOf(state), null, 2);
    lastFull = { result, provenance };
    await drawResult($<HTMLCanvasElement>("full-canvas"), result);
    const blobUrl = URL.createObjectURL(new Blob([result.data], { type: "image/png" }));
    const provUrl = URL.createObjectURL(new Blob([provenance], { type: "application/json" }));
    $<HTMLAnchorElement>("download-png").href = blobUrl;
    $<HTMLAnchorElement>("download-provenance").href = provUrl;
    $<HTMLDivElement>("full-stats").textContent =
      `${result.width}×${result.height} full resolution · compute ${result.computeMs.toFixed(1)} ms` +
      ` · cache ${result.cached ? "hit" : "miss"}`;
    $<HTMLDivElement>("full-result").classList.remove("hidden");
    showBanner(null);
  } catch (err) {
    showBanner(`full render failed: ${String(err)}`);
  } finally {
    progress.classList.add("hidden");
  }
}

// ------------------------------------------------------------------ compare

let compareView: ViewTransform = identityTransform();
let comparePair: [SavedResult, SavedResult] | null = null;
let wipePosition = 0.5;

function refreshCompareSelects(): void {
  for (const id of ["compare-a", "compare-b"]) {
    const select = $<HTMLSelectElement>(id);
    const previous = select.value;
    select.replaceChildren();
    for (const r of savedResults) {
      const opt = document.createElement("option");
      opt.value = r.id;
      opt.textContent = r.caption;
      select.append(opt);
    }
    if (previous) select.value = previous;
  }
}

function drawCompare(): void {
  if (!comparePair) return;
  const [a, b] = comparePair;
  const plan = planCompare(a, b);
  const note = $<HTMLDivElement>("compare-note");
  if (plan.note) {
    note.textContent = plan.note;
    note.classList.remove("hidden");
  } else {
    note.classList.add("hidden");
  }
  $<HTMLLabelElement>("wipe-control").classList.toggle("hidden", plan.mode !== "wipe");
  $<HTMLDivElement>("compare-captions").textContent = `A: ${a.caption}\nB: ${b.caption}`;

  const canvas = $<HTMLCanvasElement>("compare-canvas");
  const ctx = canvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const bmA = savedBitmaps.get(a.id)!;
  const bmB = savedBitmaps.get(b.id)!;

  if (plan.mode === "wipe") {
    const split = clampWipe(wipePosition) * canvas.width;
    for (const [bitmap, x0, x1] of [
      [bmA, 0, split],
      [bmB, split, canvas.width],
    ] as const) {
      ctx.save();
      ctx.beginPath();
      ctx.rect(x0, 0, x1 - x0, canvas.height);
      ctx.clip();
      ctx.translate(compareView.offsetX, compareView.offsetY);
      ctx.scale(compareView.scale, compareView.scale);
      ctx.drawImage(bitmap, 0, 0, canvas.width, canvas.height);
      ctx.restore();
    }
    ctx.strokeStyle = "#e8e8e8";
    ctx.beginPath();
    ctx.moveTo(split, 0);
    ctx.lineTo(split, canvas.height);
    ctx.stroke();
  } else {
    const half = canvas.width / 2;
    for (const [bitmap, x0] of [
      [bmA, 0],
      [bmB, half],
    ] as const) {
      ctx.save();
      ctx.beginPath();
      ctx.rect(x0, 0, half, canvas.height);
      ctx.clip();
      ctx.translate(x0 + compareView.offsetX, compareView.offsetY);
      ctx.scale(compareView.scale, compareView.scale);
      ctx.drawImage(bitmap, 0, 0, half, canvas.height);
      ctx.restore();
    }
  }
}

async function saveCurrentResult(): Promise<void> {
  if (!lastFull) return;
  const { result } = lastFull;
  const id = `res${savedResults.length + 1}`;
  const caption = CHANNELS.map(
    (ch) => `${ch.toUpperCase()}=${state[ch].algo}(φ=${state[ch].phi},α=${state[ch].alpha})`,
  ).join(" ");
  const bitmap = await createImageBitmap(new Blob([result.data], { type: "image/png" }));
  savedBitmaps.set(id, bitmap);
  savedResults.push({
    id,
    caption: `${id}: ${caption}`,
    width: result.width,
    height: result.height,
    url: URL.createObjectURL(new Blob([result.data], { type: "image/png" })),
  });
  refreshCompareSelects();
}

function wireCompare(): void {
  $<HTMLButtonElement>("compare-go").addEventListener("click", () => {
    const a = savedResults.find((r) => r.id === $<HTMLSelectElement>("compare-a").value);
    const b = savedResults.find((r) => r.id === $<HTMLSelectElement>("compare-b").value);
    if (!a || !b) return;
    comparePair = [a, b];
    compareView = identityTransform();
    $<HTMLDivElement>("compare-area").classList.remove("hidden");
    drawCompare();
  });
  $<HTMLInputElement>("wipe-slider").addEventListener("input", (ev) => {
    wipePosition = clampWipe(Number((ev.target as HTMLInputElement).value) / 1000);
    drawCompare();
  });
  const canvas = $<HTMLCanvasElement>("compare-canvas");
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = canvas.getBoundingClientRect();
    const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
    compareView = zoomAt(compareView, factor, ev.clientX - rect.left, ev.clientY - rect.top);
    drawCompare();
  });
  let dragging: { x: number; y: number } | null = null;
  canvas.addEventListener("pointerdown", (ev) => {
    dragging = { x: ev.clientX, y: ev.clientY };
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    compareView = panBy(compareView, ev.clientX - dragging.x, ev.clientY - dragging.y);
    dragging = { x: ev.clientX, y: ev.clientY };
    drawCompare();
  });
  canvas.addEventListener("pointerup", () => {
    dragging = null;
  });
}

// ------------------------------------------------------------------ boot

async function refreshStacks(): Promise<void> {
  stacks = await api.listStacks();
  renderStackList();
  renderControls();
}

async function boot(): Promise<void> {
  renderControls();
  wireCompare();

  $<HTMLInputElement>("linked-toggle").addEventListener("change", (ev) => {
    update({ ...state, linked: (ev.target as HTMLInputElement).checked });
  });
  $<HTMLInputElement>("edge-toggle").addEventListener("change", (ev) => {
    update({
      ...state,
      edgeOverlay: { ...state.edgeOverlay, enabled: (ev.target as HTMLInputElement).checked },
    });
  });
  $<HTMLInputElement>("edge-sigma").addEventListener("change", (ev) => {
    const sigma = Number((ev.target as HTMLInputElement).value);
    if (sigma > 0) update({ ...state, edgeOverlay: { ...state.edgeOverlay, sigma } });
  });
  $<HTMLInputElement>("edge-threshold").addEventListener("change", (ev) => {
    const threshold = Number((ev.target as HTMLInputElement).value);
    if (threshold > 0 && threshold <= 1) {
      update({ ...state, edgeOverlay: { ...state.edgeOverlay, threshold } });
    }
  });
  $<HTMLButtonElement>("render-full").addEventListener("click", () => void renderFull());
  $<HTMLButtonElement>("save-result").addEventListener("click", () => void saveCurrentResult());
  $<HTMLInputElement>("stack-upload").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    const form = new FormData();
    form.append("file", file);
    try {
      const resp = await fetch(`${api.baseUrl}/api/stacks`, { method: "POST", body: form });
      if (!resp.ok) throw new Error(await resp.text());
      await refreshStacks();
    } catch (err) {
      showBanner(`upload failed: ${String(err)}`);
    } finally {
      input.value = "";
    }
  });

  try {
    [presets] = await Promise.all([api.presets(), refreshStacks()]);
    renderPresetButtons();
    // bind unbound channels to the first stack so a fresh session previews
    if (stacks.length > 0) {
      let next = state;
      for (const ch of CHANNELS) {
        if (next[ch].stackId === null || !stacks.some((s) => s.id === next[ch].stackId)) {
          next = setChannelParam(next, ch, "stackId", stacks[0].id);
        }
      }
      update(next);
    } else {
      schedulePreview();
    }
    showBanner(null);
  } catch (err) {
    showBanner(`service unreachable: ${String(err)}`);
  }
}

void boot();
