/**
 * Typed client for the regsum HTTP API (docs/api.md in the backend repo).
 *
 * Raw response bodies of /merge and /export are preserved verbatim next to
 * the parsed forms: the merged-PDF panel and the export download must pass
 * the server's bytes through untouched.
 */

export interface BinEdgesJson {
  min: number;
  max: number;
  nbins: number;
}

export interface VariableJson {
  name: string;
  unit: string;
}

export interface ConfigJson {
  ndims: number;
  var_ids: number[];
  vars: string[];
  strategy: string;
  max_bins: number;
  condition: { var_id: number; var: string; lo: number; hi: number } | null;
}

export interface MetaJson {
  grid: {
    dims: number[];
    region_counts: number[];
    region_count: number;
    extents: number[][][];
  };
  variables: VariableJson[];
  configs: ConfigJson[];
  timesteps: number[];
  has_particles: boolean;
}

export interface TimelinePointJson {
  timestep: number;
  time: number;
  mean: number | null;
  count: number;
}

export interface ThumbnailJson {
  region: number;
  nbins: number[];
  counts: number[];
  sample_count: number;
  edges: BinEdgesJson[];
}

export interface SliceJson {
  axis: number;
  index: number;
  lod: number;
  horizontal_axis: number;
  vertical_axis: number;
  shape: [number, number];
  thumbnails: ThumbnailJson[][];
}

export interface PdfJson {
  region: number;
  t: number;
  config: number;
  ndims: number;
  var_ids: number[];
  vars: string[];
  edges: BinEdgesJson[];
  counts: number[];
  out_of_range: number;
  invalid: number;
  sample_count: number;
}

export interface MergeStatsJson {
  sample_count: number;
  source_region_count: number;
  axes: { var: string; mean: number | null; variance: number | null }[];
}

export interface MergeJson {
  pdf: {
    ndims: number;
    var_ids: number[];
    edges: BinEdgesJson[];
    counts: number[];
    sample_count: number;
    source_region_count: number;
  };
  stats: MergeStatsJson;
}

export interface MergeResult {
  body: MergeJson;
  /** exact response text, kept for pass-through display/export */
  raw: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const r = await this.fetchFn(this.baseUrl + path);
    if (!r.ok) throw new Error(`${path}: HTTP ${r.status}`);
    return (await r.json()) as T;
  }

  meta(): Promise<MetaJson> {
    return this.getJson("/meta");
  }

  timeline(variable: string): Promise<{ var: string; points: TimelinePointJson[] }> {
    return this.getJson(`/timeline?var=${encodeURIComponent(variable)}`);
  }

  slice(t: number, config: number, axis: number, index: number, lod: number): Promise<SliceJson> {
    return this.getJson(`/slice?t=${t}&config=${config}&axis=${axis}&index=${index}&lod=${lod}`);
  }

  pdf(t: number, config: number, region: number): Promise<PdfJson> {
    return this.getJson(`/pdf?t=${t}&config=${config}&region=${region}`);
  }

  async select(t: number, config: number, predicate: unknown): Promise<number[]> {
    const r = await this.fetchFn(this.baseUrl + "/select", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ t, config, predicate }),
    });
    if (!r.ok) throw new Error(`/select: HTTP ${r.status}`);
    return ((await r.json()) as { regions: number[] }).regions;
  }

  async merge(t: number, config: number, regions: number[]): Promise<MergeResult> {
    const r = await this.fetchFn(this.baseUrl + "/merge", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ t, config, regions }),
    });
    if (!r.ok) throw new Error(`/merge: HTTP ${r.status}`);
    const raw = await r.text();
    return { body: JSON.parse(raw) as MergeJson, raw };
  }

  async exportMerged(
    t: number,
    config: number,
    regions: number[],
    format: "csv" | "json",
  ): Promise<Uint8Array> {
    const params = `t=${t}&config=${config}&regions=${regions.join(",")}&format=${format}`;
    const r = await this.fetchFn(`${this.baseUrl}/export?${params}`);
    if (!r.ok) throw new Error(`/export: HTTP ${r.status}`);
    return new Uint8Array(await r.arrayBuffer());
  }
}
