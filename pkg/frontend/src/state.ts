/**
 * View state and the brush/range synchronization rules.
 *
 * The hard-won invariants live here, away from the DOM:
 *  - display ranges are always fully populated, never partial;
 *  - the brushed bin interval and the variable-range text controls always
 *    denote the same interval, no matter how brush and text edits
 *    interleave;
 *  - unparsable text marks the control invalid without mutating state.
 *
 * State transitions return new objects so views can compare by reference.
 */

import { BinEdgesJson, MetaJson, PdfJson } from "./api.js";
import { parseNumeric } from "./format.js";

export interface Brush {
  variable: string;
  lo: number;
  hi: number;
}

export interface ViewState {
  timestep: number;
  config: number;
  sliceAxis: number;
  sliceIndex: number;
  zoom: { k: number; x: number; y: number };
  /** per-variable [lo, hi] display range; always populated for every variable */
  displayRanges: Record<string, [number, number]>;
  /** frequency (count) display clamp for the PDF view */
  frequencyRange: [number, number];
  selectedRegions: number[];
  brush: Brush | null;
  show2d: boolean;
  /** bumped on every state change; stale fetches are discarded against it */
  version: number;
}

export function initialState(meta: MetaJson): ViewState {
  const displayRanges: Record<string, [number, number]> = {};
  for (const v of meta.variables) {
    displayRanges[v.name] = [0, 1];
  }
  return {
    timestep: 0,
    config: 0,
    sliceAxis: 2,
    sliceIndex: 0,
    zoom: { k: 1, x: 0, y: 0 },
    displayRanges,
    frequencyRange: [0, 1],
    selectedRegions: [],
    brush: null,
    show2d: meta.configs[0]?.ndims === 2,
    version: 0,
  };
}

function bump(state: ViewState, patch: Partial<ViewState>): ViewState {
  return { ...state, ...patch, version: state.version + 1 };
}

/**
 * Auto-populate every range control from a PDF's edges and counts so no
 * control is ever left partially filled.
 */
export function populateRanges(state: ViewState, pdf: PdfJson): ViewState {
  const displayRanges = { ...state.displayRanges };
  pdf.vars.forEach((name, axis) => {
    const e = pdf.edges[axis];
    displayRanges[name] = [e.min, e.max];
  });
  const maxCount = pdf.counts.reduce((a, b) => Math.max(a, b), 0);
  return bump(state, { displayRanges, frequencyRange: [0, maxCount] });
}

/** Brushing bins in the PDF view: the text controls follow the brush. */
export function applyBrush(state: ViewState, variable: string, lo: number, hi: number): ViewState {
  const [a, b] = lo <= hi ? [lo, hi] : [hi, lo];
  const displayRanges = { ...state.displayRanges, [variable]: [a, b] as [number, number] };
  return bump(state, { displayRanges, brush: { variable, lo: a, hi: b } });
}

export interface RangeEditResult {
  state: ViewState;
  /** false when the text did not parse; state is then unchanged */
  ok: boolean;
}

/**
 * Editing the range text boxes: the brushed interval follows the text.
 * Scientific notation is accepted; garbage leaves the state untouched.
 */
export function applyRangeText(
  state: ViewState,
  variable: string,
  loText: string,
  hiText: string,
): RangeEditResult {
  const lo = parseNumeric(loText);
  const hi = parseNumeric(hiText);
  if (lo === null || hi === null) {
    return { state, ok: false };
  }
  return { state: applyBrush(state, variable, lo, hi), ok: true };
}

/** The interval both the brush and the text controls currently denote. */
export function brushedInterval(state: ViewState, variable: string): [number, number] {
  return state.displayRanges[variable];
}

/** Bin indices whose extent overlaps the variable's display range (for highlighting). */
export function highlightedBins(state: ViewState, variable: string, edges: BinEdgesJson): number[] {
  const [lo, hi] = state.displayRanges[variable] ?? [edges.min, edges.max];
  const width = (edges.max - edges.min) / edges.nbins;
  const out: number[] = [];
  for (let i = 0; i < edges.nbins; i++) {
    const binLo = edges.min + i * width;
    const binHi = i === edges.nbins - 1 ? edges.max : edges.min + (i + 1) * width;
    if (binHi >= lo && binLo <= hi) out.push(i);
  }
  return out;
}

export function setTimestep(state: ViewState, timestep: number): ViewState {
  return bump(state, { timestep });
}

export function setSlice(state: ViewState, axis: number, index: number): ViewState {
  return bump(state, { sliceAxis: axis, sliceIndex: index });
}

export function setConfig(state: ViewState, config: number, ndims: number): ViewState {
  return bump(state, { config, show2d: ndims === 2, brush: null });
}

export function setSelection(state: ViewState, regions: number[]): ViewState {
  return bump(state, { selectedRegions: [...regions].sort((a, b) => a - b) });
}

export function setZoom(state: ViewState, k: number, x: number, y: number): ViewState {
  return bump(state, { zoom: { k, x, y } });
}

export function toggle2d(state: ViewState): ViewState {
  return bump(state, { show2d: !state.show2d });
}

/**
 * Aggregated statistics of the brushed bins of a displayed (merged) PDF:
 * total count, probability mass, and the binned mean inside the brush.
 */
export interface BrushedBinStats {
  count: number;
  mass: number;
  binnedMean: number | null;
}

export function brushedBinStats(
  counts: number[],
  edges: BinEdgesJson,
  lo: number,
  hi: number,
): BrushedBinStats {
  const width = (edges.max - edges.min) / edges.nbins;
  const total = counts.reduce((a, b) => a + b, 0);
  let count = 0;
  let weighted = 0;
  for (let i = 0; i < counts.length; i++) {
    const binLo = edges.min + i * width;
    const binHi = i === counts.length - 1 ? edges.max : edges.min + (i + 1) * width;
    const center = 0.5 * (binLo + binHi);
    if (binHi >= lo && binLo <= hi) {
      count += counts[i];
      weighted += counts[i] * center;
    }
  }
  return {
    count,
    mass: total > 0 ? count / total : 0,
    binnedMean: count > 0 ? weighted / count : null,
  };
}

/** Discards responses that arrive after the state has moved on. */
export class RequestTracker {
  private current = 0;

  begin(version: number): number {
    this.current = version;
    return version;
  }

  isCurrent(token: number): boolean {
    return token === this.current;
  }
}
