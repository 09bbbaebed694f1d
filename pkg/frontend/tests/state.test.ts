import { describe, expect, it } from "vitest";

import {
  allChannelsBound,
  applyPreset,
  clampAlpha,
  clampPhi,
  defaultState,
  deserializeState,
  provenanceOf,
  serializeState,
  setChannelParam,
} from "../src/state.js";
import type { PresetTable } from "../src/types.js";

const presetTable: PresetTable = {
  fig6b: {
    r: { algo: "avd", phi: 5, alpha: 2, light: "infrared" },
    g: { algo: "fujii", phi: 50, alpha: 2, light: "infrared" },
    b: { algo: "tau", phi: 75, alpha: 2, light: "infrared" },
  },
};

describe("slider clamps", () => {
  it("keeps phi within [0, 180]", () => {
    expect(clampPhi(-3)).toBe(0);
    expect(clampPhi(181)).toBe(180);
    expect(clampPhi(70)).toBe(70);
    expect(clampPhi(Number.NaN)).toBe(0);
  });

  it("keeps alpha within [0.1, 4]", () => {
    expect(clampAlpha(0)).toBe(0.1);
    expect(clampAlpha(9)).toBe(4);
    expect(clampAlpha(2.5)).toBe(2.5);
  });
});

describe("state round-trip", () => {
  it("serializes and restores the exact control state", () => {
    let state = defaultState();
    state = setChannelParam(state, "r", "stackId", "s1");
    state = setChannelParam(state, "r", "algo", "tau");
    state = setChannelParam(state, "r", "phi", 70);
    state = setChannelParam(state, "g", "alpha", 2.5);
    state = { ...state, linked: true };
    const restored = deserializeState(serializeState(state));
    expect(restored).toEqual(state);
  });

  it("falls back to defaults on malformed input", () => {
    expect(deserializeState(null)).toEqual(defaultState());
    expect(deserializeState("not json")).toEqual(defaultState());
    expect(deserializeState('{"r": {"algo": "nope"}}')).toEqual(defaultState());
  });

  it("clamps out-of-range values while restoring", () => {
    const state = defaultState();
    const raw = JSON.parse(serializeState(state));
    raw.r.phi = 999;
    raw.b.alpha = -1;
    const restored = deserializeState(JSON.stringify(raw));
    expect(restored.r.phi).toBe(180);
    expect(restored.b.alpha).toBe(0.1);
  });
});

describe("channel editing", () => {
  it("linked mode fans phi/alpha to every channel", () => {
    let state = { ...defaultState(), linked: true };
    state = setChannelParam(state, "g", "phi", 42);
    expect(state.r.phi).toBe(42);
    expect(state.g.phi).toBe(42);
    expect(state.b.phi).toBe(42);
  });

  it("unlinked mode edits one channel only", () => {
    let state = defaultState();
    state = setChannelParam(state, "g", "phi", 42);
    expect(state.r.phi).toBe(0);
    expect(state.g.phi).toBe(42);
  });

  it("algo and stack changes never fan out", () => {
    let state = { ...defaultState(), linked: true };
    state = setChannelParam(state, "b", "algo", "gd");
    expect(state.r.algo).toBe("avd");
    expect(state.b.algo).toBe("gd");
  });

  it("tracks binding completeness", () => {
    let state = defaultState();
    expect(allChannelsBound(state)).toBe(false);
    for (const ch of ["r", "g", "b"] as const) {
      state = setChannelParam(state, ch, "stackId", "s1");
    }
    expect(allChannelsBound(state)).toBe(true);
    state = setChannelParam(state, "b", "stackId", null);
    expect(allChannelsBound(state)).toBe(false);
  });
});

describe("presets", () => {
  it("snaps controls to the preset bindings", () => {
    let state = defaultState();
    state = setChannelParam(state, "r", "stackId", "s1");
    const snapped = applyPreset(state, presetTable, "fig6b");
    expect(snapped.r).toMatchObject({ algo: "avd", phi: 5, alpha: 2, stackId: "s1" });
    expect(snapped.g).toMatchObject({ algo: "fujii", phi: 50, alpha: 2 });
    expect(snapped.b).toMatchObject({ algo: "tau", phi: 75, alpha: 2 });
  });

  it("rejects unknown preset names", () => {
    expect(() => applyPreset(defaultState(), presetTable, "fig9z")).toThrow(/unknown preset/);
  });
});

describe("provenance", () => {
  it("captures the per-channel parameters deterministically", () => {
    let state = defaultState();
    state = setChannelParam(state, "r", "stackId", "s1");
    state = setChannelParam(state, "r", "phi", 5);
    const a = JSON.stringify(provenanceOf(state));
    const b = JSON.stringify(provenanceOf(state));
    expect(a).toBe(b);
    expect(JSON.parse(a).channels.r).toEqual({ stack_id: "s1", algo: "avd", phi: 5, alpha: 1 });
  });
});
