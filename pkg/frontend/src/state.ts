import type {
  Algo,
  ChannelControlState,
  ChannelName,
  ChannelParams,
  PresetTable,
} from "./types.js";
import { ALGOS } from "./types.js";

export const PHI_MIN = 0;
export const PHI_MAX = 180;
export const ALPHA_MIN = 0.1;
export const ALPHA_MAX = 4;

export const CHANNELS: readonly ChannelName[] = ["r", "g", "b"];

export function clampPhi(value: number): number {
  if (!Number.isFinite(value)) return PHI_MIN;
  return Math.min(PHI_MAX, Math.max(PHI_MIN, value));
}

export function clampAlpha(value: number): number {
  if (!Number.isFinite(value)) return 1;
  return Math.min(ALPHA_MAX, Math.max(ALPHA_MIN, value));
}

function defaultChannel(): ChannelParams {
  return { stackId: null, algo: "avd", phi: 0, alpha: 1 };
}

export function defaultState(): ChannelControlState {
  return {
    r: defaultChannel(),
    g: defaultChannel(),
    b: defaultChannel(),
    linked: false,
    edgeOverlay: { enabled: false, sigma: 1.4, threshold: 0.7 },
  };
}

export function allChannelsBound(state: ChannelControlState): boolean {
  return CHANNELS.every((ch) => state[ch].stackId !== null);
}

/** Set one channel's parameter, fanning out to all channels when linked. */
export function setChannelParam(
  state: ChannelControlState,
  channel: ChannelName,
  key: "phi" | "alpha" | "algo" | "stackId",
  value: number | string | null,
): ChannelControlState {
  const next = structuredClone(state);
  const targets: ChannelName[] =
    state.linked && (key === "phi" || key === "alpha") ? [...CHANNELS] : [channel];
  for (const ch of targets) {
    if (key === "phi") next[ch].phi = clampPhi(value as number);
    else if (key === "alpha") next[ch].alpha = clampAlpha(value as number);
    else if (key === "algo") next[ch].algo = value as Algo;
    else next[ch].stackId = value as string | null;
  }
  return next;
}

/** Snap the three channels to a named preset's bindings; stack bindings stay. */
export function applyPreset(
  state: ChannelControlState,
  presets: PresetTable,
  name: string,
): ChannelControlState {
  const preset = presets[name];
  if (!preset) throw new Error(`unknown preset ${name}`);
  const next = structuredClone(state);
  for (const ch of CHANNELS) {
    next[ch].algo = preset[ch].algo;
    next[ch].phi = clampPhi(preset[ch].phi);
    next[ch].alpha = clampAlpha(preset[ch].alpha);
  }
  return next;
}

export function serializeState(state: ChannelControlState): string {
  return JSON.stringify(state);
}

function validChannel(raw: unknown): ChannelParams | null {
  if (typeof raw !== "object" || raw === null) return null;
  const c = raw as Record<string, unknown>;
  if (!ALGOS.includes(c.algo as Algo)) return null;
  if (typeof c.phi !== "number" || typeof c.alpha !== "number") return null;
  const stackId = c.stackId === null || typeof c.stackId === "string" ? (c.stackId as string | null) : null;
  return { stackId, algo: c.algo as Algo, phi: clampPhi(c.phi), alpha: clampAlpha(c.alpha) };
}

/** Restore serialized state; anything malformed falls back to the default. */
export function deserializeState(text: string | null): ChannelControlState {
  if (!text) return defaultState();
  try {
    const raw = JSON.parse(text) as Record<string, unknown>;
    const r = validChannel(raw.r);
    const g = validChannel(raw.g);
    const b = validChannel(raw.b);
    if (!r || !g || !b) return defaultState();
    const fallback = defaultState();
    const overlayRaw = (raw.edgeOverlay ?? {}) as Record<string, unknown>;
    return {
      r,
      g,
      b,
      linked: raw.linked === true,
      edgeOverlay: {
        enabled: overlayRaw.enabled === true,
        sigma: typeof overlayRaw.sigma === "number" && overlayRaw.sigma > 0
          ? overlayRaw.sigma
          : fallback.edgeOverlay.sigma,
        threshold:
          typeof overlayRaw.threshold === "number" &&
          overlayRaw.threshold > 0 &&
          overlayRaw.threshold <= 1
            ? overlayRaw.threshold
            : fallback.edgeOverlay.threshold,
      },
    };
  } catch {
    return defaultState();
  }
}

/** Stable provenance payload attached to full-resolution downloads. */
export function provenanceOf(state: ChannelControlState): Record<string, unknown> {
  const channels: Record<string, unknown> = {};
  for (const ch of CHANNELS) {
    channels[ch] = {
      stack_id: state[ch].stackId,
      algo: state[ch].algo,
      phi: state[ch].phi,
      alpha: state[ch].alpha,
    };
  }
  return { channels };
}
