export type Algo = "avd" | "fujii" | "tau" | "gd";

export const ALGOS: readonly Algo[] = ["avd", "fujii", "tau", "gd"];

export interface ChannelParams {
  stackId: string | null;
  algo: Algo;
  phi: number;
  alpha: number;
}

export type ChannelName = "r" | "g" | "b";

export interface ChannelControlState {
  r: ChannelParams;
  g: ChannelParams;
  b: ChannelParams;
  /** when true, phi/alpha slider moves apply to all three channels */
  linked: boolean;
  edgeOverlay: {
    enabled: boolean;
    sigma: number;
    threshold: number;
  };
}

export interface StackInfo {
  id: string;
  width: number;
  height: number;
  frames: number;
  label: string;
  preview: boolean;
}

export interface PresetChannel {
  algo: Algo;
  phi: number;
  alpha: number;
  light: string;
}

export type PresetTable = Record<string, Record<ChannelName, PresetChannel>>;

export interface ImageResult {
  data: ArrayBuffer;
  computeMs: number;
  degenerateTerms: number;
  width: number;
  height: number;
  cached: boolean;
}
