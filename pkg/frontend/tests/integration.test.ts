/**
 * End-to-end workbench loop against a real local tuning service.
 *
 * A paper-scale fixture stack (300x300x256, previewing as 150x150x256) is
 * simulated once; the service is spawned as a child process and the tests
 * drive it exactly the way the UI does: through the API client and the
 * debounced preview scheduler.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { TuningApi, type ComposeRequest } from "../src/api.js";
import { PreviewScheduler } from "../src/scheduler.js";
import { applyPreset, defaultState, setChannelParam } from "../src/state.js";
import type { ChannelControlState, ImageResult, PresetTable } from "../src/types.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;
const PYTHON = process.env.SPECKLETK_PYTHON ?? "python3";

let workDir: string;
let service: ChildProcess | null = null;
let api: TuningApi;
let stackId: string;

function composeRequestFrom(state: ChannelControlState, preview: boolean): ComposeRequest {
  const channels = {} as ComposeRequest["channels"];
  for (const ch of ["r", "g", "b"] as const) {
    channels[ch] = {
      stack_id: state[ch].stackId!,
      algo: state[ch].algo,
      phi: state[ch].phi,
      alpha: state[ch].alpha,
    };
  }
  return { channels, preview };
}

async function waitForService(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/api/stacks`);
      if (resp.ok) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error(`service did not come up on ${BASE}: ${String(lastError)}`);
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "speckletk-it-"));
  const fixture = join(workDir, "fixture.spk");
  const sim = spawnSync(
    PYTHON,
    ["-m", "speckletk.cli", "simulate", "--glyph", "disk", "--frames", "256",
     "--size", "300", "--seed", "42", "--grain", "2", "-o", fixture],
    { stdio: ["ignore", "inherit", "inherit"], timeout: 150_000 },
  );
  if (sim.status !== 0) throw new Error(`fixture simulation failed with ${sim.status}`);

  service = spawn(
    PYTHON,
    ["-m", "speckletk.cli", "serve", "--host", "127.0.0.1", "--port", String(PORT),
     "--stack", fixture],
    { stdio: ["ignore", "ignore", "inherit"] },
  );
  await waitForService(60_000);

  api = new TuningApi(BASE);
  const stacks = await api.listStacks();
  expect(stacks).toHaveLength(1);
  stackId = stacks[0].id;

  // initial app render: builds the preview copy and warms the channel maps
  let state = defaultState();
  for (const ch of ["r", "g", "b"] as const) {
    state = setChannelParam(state, ch, "stackId", stackId);
  }
  await api.compose(composeRequestFrom(state, true));
}, 180_000);

afterAll(() => {
  service?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

function boundState(): ChannelControlState {
  let state = defaultState();
  for (const ch of ["r", "g", "b"] as const) {
    state = setChannelParam(state, ch, "stackId", stackId);
  }
  return state;
}

describe("workbench loop against the live service", () => {
  it("previews at reduced dimensions within the latency budget", async () => {
    // slider change: R channel moves to a fresh angle, others stay cached
    let state = boundState();
    state = setChannelParam(state, "r", "phi", 33.5);

    let displayed: ImageResult | null = null;
    let displayedAt = 0;
    const scheduler = new PreviewScheduler<ComposeRequest, ImageResult>(
      (req) => api.compose(req),
      (value) => {
        displayed = value;
        displayedAt = performance.now();
      },
    );

    const startedAt = performance.now();
    scheduler.request(composeRequestFrom(state, true));
    while (displayed === null && performance.now() - startedAt < 2_000) {
      await new Promise((r) => setTimeout(r, 10));
    }
    expect(displayed).not.toBeNull();
    const elapsed = displayedAt - startedAt;
    const result = displayed as unknown as ImageResult;
    expect(result.width).toBe(150);
    expect(result.height).toBe(150);
    expect(elapsed).toBeLessThanOrEqual(500);
  });

  it("serves the reference presets and they snap the controls", async () => {
    const presets: PresetTable = await api.presets();
    expect(Object.keys(presets).sort()).toEqual(["fig4a", "fig5a", "fig6a", "fig6b"]);
    expect(presets.fig6b.r).toEqual({ algo: "avd", phi: 5, alpha: 2, light: "infrared" });
    expect(presets.fig6b.g).toEqual({ algo: "fujii", phi: 50, alpha: 2, light: "infrared" });
    expect(presets.fig6b.b).toEqual({ algo: "tau", phi: 75, alpha: 2, light: "infrared" });
    expect(presets.fig4a.b).toEqual({ algo: "tau", phi: 80, alpha: 1, light: "blue" });
    expect(presets.fig5a.g).toEqual({ algo: "fujii", phi: 110, alpha: 1, light: "infrared" });
    expect(presets.fig6a.g).toEqual({ algo: "avd", phi: 110, alpha: 1, light: "red" });

    const snapped = applyPreset(boundState(), presets, "fig6b");
    expect(snapped.r).toMatchObject({ algo: "avd", phi: 5, alpha: 2, stackId });
    expect(snapped.g).toMatchObject({ algo: "fujii", phi: 50, alpha: 2, stackId });
    expect(snapped.b).toMatchObject({ algo: "tau", phi: 75, alpha: 2, stackId });
  });

  it("discards stale previews under scripted slider scrubbing", async () => {
    const displayedPhis: number[] = [];
    const scheduler = new PreviewScheduler<number, { phi: number; result: ImageResult }>(
      async (phi) => {
        let state = boundState();
        state = setChannelParam(state, "r", "phi", phi);
        return { phi, result: await api.compose(composeRequestFrom(state, true)) };
      },
      (value) => displayedPhis.push(value.phi),
    );

    // scrub the phi slider: bursts faster than the debounce plus pauses
    const script: Array<{ phi: number; waitMs: number }> = [
      { phi: 10, waitMs: 20 },
      { phi: 20, waitMs: 20 },
      { phi: 30, waitMs: 20 },
      { phi: 40, waitMs: 400 },
      { phi: 55, waitMs: 30 },
      { phi: 70, waitMs: 400 },
      { phi: 90, waitMs: 10 },
      { phi: 110, waitMs: 10 },
      { phi: 125, waitMs: 600 },
    ];
    for (const step of script) {
      scheduler.request(step.phi);
      await new Promise((r) => setTimeout(r, step.waitMs));
    }
    while (scheduler.inFlight > 0) {
      await new Promise((r) => setTimeout(r, 20));
    }

    // the newest parameter set must be what ends up displayed, and nothing
    // older may be painted after something newer
    expect(displayedPhis.length).toBeGreaterThan(0);
    expect(displayedPhis[displayedPhis.length - 1]).toBe(125);
    const order = [10, 20, 30, 40, 55, 70, 90, 110, 125];
    for (let i = 1; i < displayedPhis.length; i++) {
      expect(order.indexOf(displayedPhis[i])).toBeGreaterThan(order.indexOf(displayedPhis[i - 1]));
    }
  });

  it("re-renders unchanged state byte-identically with a cache-hit marker", async () => {
    let state = boundState();
    state = setChannelParam(state, "r", "phi", 5);
    state = setChannelParam(state, "g", "phi", 50);
    state = setChannelParam(state, "g", "algo", "fujii");

    const first = await api.compose(composeRequestFrom(state, false));
    const second = await api.compose(composeRequestFrom(state, false));
    expect(Buffer.from(second.data).equals(Buffer.from(first.data))).toBe(true);
    expect(second.cached).toBe(true);
    expect(second.width).toBe(300);
  }, 60_000);

  it("surfaces parameter errors with the offending field name", async () => {
    const resp = await fetch(`${BASE}/api/compute`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ stack_id: stackId, algo: "avd", phi: 181 }),
    });
    expect(resp.status).toBe(422);
    expect(await resp.text()).toContain("phi");
  });
});
