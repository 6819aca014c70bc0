/**
 * Merged-PDF panel model: holds the server's /merge response verbatim.
 *
 * The panel is a pass-through of server results: displayed statistics come
 * straight from the response (the server computes them exactly from
 * retained sums), and the export button downloads the /export body
 * unmodified.  The UI never recomputes or reformats merged statistics.
 */

import { ApiClient, MergeJson, MergeResult } from "./api.js";
import { BrushedBinStats, brushedBinStats } from "./state.js";

export interface MergePanelModel {
  t: number;
  config: number;
  regions: number[];
  body: MergeJson;
  /** exact /merge response text (pass-through contract) */
  raw: string;
}

export async function loadMergePanel(
  api: ApiClient,
  t: number,
  config: number,
  regions: number[],
): Promise<MergePanelModel> {
  const result: MergeResult = await api.merge(t, config, regions);
  return { t, config, regions, body: result.body, raw: result.raw };
}

/** Stats lines shown in the panel header, straight from the response. */
export function panelStatLines(model: MergePanelModel): string[] {
  const s = model.body.stats;
  const lines = [
    `regions: ${s.source_region_count}`,
    `samples: ${s.sample_count}`,
  ];
  for (const axis of s.axes) {
    if (axis.mean === null || axis.variance === null) {
      lines.push(`${axis.var}: no samples`);
    } else {
      lines.push(`${axis.var}: mean ${axis.mean}, variance ${axis.variance}`);
    }
  }
  return lines;
}

/** Brushing the merged PDF aggregates the brushed bins. */
export function brushedMergedStats(
  model: MergePanelModel,
  axis: number,
  lo: number,
  hi: number,
): BrushedBinStats {
  const pdf = model.body.pdf;
  if (pdf.ndims !== 1) {
    // marginalize 2D counts onto the axis before aggregating
    const [n0] = [pdf.edges[0].nbins];
    const n1 = pdf.edges[1].nbins;
    const marginal = new Array(axis === 0 ? n0 : n1).fill(0);
    for (let flat = 0; flat < pdf.counts.length; flat++) {
      const i0 = flat % n0;
      const i1 = Math.floor(flat / n0);
      marginal[axis === 0 ? i0 : i1] += pdf.counts[flat];
    }
    return brushedBinStats(marginal, pdf.edges[axis], lo, hi);
  }
  return brushedBinStats(pdf.counts, pdf.edges[0], lo, hi);
}

/** Bytes for the download: exactly what GET /export returns. */
export async function exportBytes(
  api: ApiClient,
  model: MergePanelModel,
  format: "csv" | "json",
): Promise<Uint8Array> {
  return api.exportMerged(model.t, model.config, model.regions, format);
}
