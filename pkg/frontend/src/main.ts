/**
 * Explorer bootstrap: wires the slice, PDF, timeline, control-panel, and
 * merged-PDF views around one ViewState.  In-flight fetches are keyed by
 * the state version; responses for stale versions are dropped.
 */

import { ApiClient, MetaJson, PdfJson } from "./api.js";
import {
  applyBrush,
  applyRangeText,
  initialState,
  populateRanges,
  RequestTracker,
  setConfig,
  setSelection,
  setSlice,
  setTimestep,
  setZoom,
  toggle2d,
  ViewState,
} from "./state.js";
import { parseNumeric } from "./format.js";
import { loadMergePanel, MergePanelModel, panelStatLines, exportBytes } from "./mergePanel.js";
import { ControlPanel } from "./views/controlPanel.js";
import { PdfView } from "./views/pdfView.js";
import { SliceView } from "./views/sliceView.js";
import { TimelineView } from "./views/timelineView.js";

const api = new ApiClient("");
const tracker = new RequestTracker();

let state: ViewState;
let meta: MetaJson;
let pickedRegion = 0;
let currentPdf: PdfJson | null = null;
let mergeModel: MergePanelModel | null = null;
let timelineVar = "";

let sliceView: SliceView;
let pdfView: PdfView;
let timelineView: TimelineView;
let controls: ControlPanel;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function banner(message: string): void {
  const b = el("banner");
  b.textContent = message;
  b.classList.add("visible");
  window.setTimeout(() => b.classList.remove("visible"), 4000);
}

async function refreshSlice(): Promise<void> {
  const token = tracker.begin(state.version);
  const baseBins = currentPdf?.edges[0]?.nbins ?? meta.configs[state.config].max_bins;
  const lod = sliceView.requestLod(state, baseBins);
  try {
    const slice = await api.slice(state.timestep, state.config, state.sliceAxis, state.sliceIndex, lod);
    if (!tracker.isCurrent(token)) return; // stale
    sliceView.render(state, slice);
  } catch (err) {
    banner(String(err));
  }
}

async function refreshPdf(): Promise<void> {
  try {
    const pdf = await api.pdf(state.timestep, state.config, pickedRegion);
    currentPdf = pdf;
    state = populateRanges(state, pdf);
    controls.sync(state);
    pdfView.render(state, pdf);
  } catch (err) {
    banner(String(err));
  }
}

async function refreshTimeline(): Promise<void> {
  try {
    const tl = await api.timeline(timelineVar);
    timelineView.render(tl.points, state.timestep);
  } catch (err) {
    banner(String(err));
  }
}

async function refreshMerge(): Promise<void> {
  const target = el("merge-panel");
  if (!state.selectedRegions.length) {
    target.querySelector(".merge-stats")!.textContent = "lasso a set of PDFs to merge them";
    return;
  }
  try {
    mergeModel = await loadMergePanel(api, state.timestep, state.config, state.selectedRegions);
    target.querySelector(".merge-stats")!.textContent = panelStatLines(mergeModel).join("\n");
  } catch (err) {
    banner(String(err));
  }
}

function download(name: string, bytes: Uint8Array, mime: string): void {
  const blob = new Blob([bytes as BlobPart], { type: mime });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

async function boot(): Promise<void> {
  meta = await api.meta();
  state = initialState(meta);
  timelineVar = meta.variables[0].name;

  controls = new ControlPanel(el("controls"), meta, {
    onConfig(index) {
      state = setConfig(state, index, meta.configs[index].ndims);
      void refreshPdf().then(refreshSlice).then(refreshMerge);
    },
    onSliceAxis(axis) {
      state = setSlice(state, axis, 0);
      controls.sync(state);
      void refreshSlice();
    },
    onSliceIndex(index) {
      const max = meta.grid.region_counts[state.sliceAxis] - 1;
      state = setSlice(state, state.sliceAxis, Math.max(0, Math.min(index, max)));
      controls.sync(state);
      void refreshSlice();
    },
    onRangeEdit(variable, loText, hiText) {
      const result = applyRangeText(state, variable, loText, hiText);
      if (!result.ok) return false;
      state = result.state;
      controls.sync(state);
      if (currentPdf) pdfView.render(state, currentPdf);
      void refreshSlice();
      return true;
    },
    onFrequencyEdit(loText, hiText) {
      const lo = parseNumeric(loText);
      const hi = parseNumeric(hiText);
      if (lo === null || hi === null) return false;
      state = { ...state, frequencyRange: [lo, hi], version: state.version + 1 };
      if (currentPdf) pdfView.render(state, currentPdf);
      return true;
    },
    onTimelineVar(variable) {
      timelineVar = variable;
      void refreshTimeline();
    },
  });

  sliceView = new SliceView(el("slice"), {
    onLasso(regions) {
      if (!regions.length) {
        banner("lasso selected nothing: draw around thumbnail centers");
        return;
      }
      state = setSelection(state, regions);
      void refreshSlice().then(refreshMerge);
    },
    onPick(region) {
      pickedRegion = region;
      void refreshPdf();
    },
    onZoom(k, x, y) {
      state = setZoom(state, k, x, y);
      void refreshSlice();
    },
  });

  pdfView = new PdfView(el("pdf"), {
    onBrush(variable, lo, hi) {
      state = applyBrush(state, variable, lo, hi);
      controls.sync(state);
      if (currentPdf) pdfView.render(state, currentPdf);
      if (mergeModel) void refreshMerge();
    },
    onToggle2d() {
      state = toggle2d(state);
      if (currentPdf) pdfView.render(state, currentPdf);
    },
  });

  timelineView = new TimelineView(el("timeline"), (timestep) => {
    state = setTimestep(state, timestep);
    void refreshPdf().then(refreshSlice).then(refreshTimeline).then(refreshMerge);
  });

  el("export-csv").addEventListener("click", () => {
    if (!mergeModel) return;
    void exportBytes(api, mergeModel, "csv").then((b) => download("merged.csv", b, "text/csv"));
  });
  el("export-json").addEventListener("click", () => {
    if (!mergeModel) return;
    void exportBytes(api, mergeModel, "json").then((b) =>
      download("merged.json", b, "application/json"),
    );
  });

  await refreshPdf();
  await refreshSlice();
  await refreshTimeline();
  await refreshMerge();
}

void boot();
