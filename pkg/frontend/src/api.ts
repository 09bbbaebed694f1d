import type {
  Algo,
  ChannelName,
  ImageResult,
  PresetTable,
  StackInfo,
} from "./types.js";

export interface ComputeRequest {
  stack_id: string;
  algo: Algo;
  phi: number;
  alpha: number;
  norm?: string;
  preview: boolean;
}

export interface ComposeChannelRequest {
  stack_id: string;
  algo: Algo;
  phi: number;
  alpha: number;
}

export interface ComposeRequest {
  channels: Record<ChannelName, ComposeChannelRequest>;
  preview: boolean;
}

async function imageResult(resp: Response): Promise<ImageResult> {
  if (!resp.ok) {
    const body = await resp.text();
    throw new Error(`service replied ${resp.status}: ${body}`);
  }
  return {
    data: await resp.arrayBuffer(),
    computeMs: Number(resp.headers.get("X-Compute-Ms") ?? "0"),
    degenerateTerms: Number(resp.headers.get("X-Degenerate-Terms") ?? "0"),
    width: Number(resp.headers.get("X-Map-Width") ?? "0"),
    height: Number(resp.headers.get("X-Map-Height") ?? "0"),
    cached: resp.headers.get("X-Map-Cache") === "hit",
  };
}

/** Thin typed client for the tuning service; the workbench's only network path. */
export class TuningApi {
  constructor(readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`);
    if (!resp.ok) throw new Error(`service replied ${resp.status} for ${path}`);
    return (await resp.json()) as T;
  }

  listStacks(): Promise<StackInfo[]> {
    return this.getJson<StackInfo[]>("/api/stacks");
  }

  presets(): Promise<PresetTable> {
    return this.getJson<PresetTable>("/api/presets");
  }

  async compute(req: ComputeRequest): Promise<ImageResult> {
    const resp = await fetch(`${this.baseUrl}/api/compute`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    return imageResult(resp);
  }

  async compose(req: ComposeRequest): Promise<ImageResult> {
    const resp = await fetch(`${this.baseUrl}/api/compose`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    return imageResult(resp);
  }
}
