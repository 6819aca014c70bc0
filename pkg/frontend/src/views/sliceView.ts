/**
 * Slice view: small-multiple thumbnails of one region plane with zoom/pan,
 * LOD-driven refinement, lasso selection, and a corner orientation widget.
 */

import * as d3 from "d3";
import { SliceJson, ThumbnailJson } from "../api.js";
import { lassoSelect, thumbCenters, Point } from "../lasso.js";
import { labelsVisible, lodFactor, visibleCount } from "../lod.js";
import { orientationInfo } from "../orientation.js";
import { ViewState } from "../state.js";

const CELL = 120;

export interface SliceViewDelegate {
  onLasso(regions: number[]): void;
  onPick(region: number): void;
  onZoom(k: number, x: number, y: number): void;
}

export class SliceView {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private content: d3.Selection<SVGGElement, unknown, null, undefined>;
  private orientation: d3.Selection<SVGGElement, unknown, null, undefined>;
  private lassoPath: Point[] = [];
  private lassoActive = false;
  private slice: SliceJson | null = null;
  private width: number;
  private height: number;

  constructor(
    container: HTMLElement,
    private delegate: SliceViewDelegate,
  ) {
    this.width = container.clientWidth || 640;
    this.height = container.clientHeight || 640;
    this.svg = d3
      .select(container)
      .append("svg")
      .attr("width", this.width)
      .attr("height", this.height)
      .attr("class", "slice-view");
    this.content = this.svg.append("g").attr("class", "slice-content");
    this.orientation = this.svg.append("g").attr("class", "orientation-widget");

    const zoom = d3
      .zoom<SVGSVGElement, unknown>()
      .scaleExtent([0.2, 64])
      .filter((event) => !this.lassoActive && !event.button)
      .on("zoom", (event) => {
        const t = event.transform;
        this.content.attr("transform", t.toString());
        this.delegate.onZoom(t.k, t.x, t.y);
      });
    this.svg.call(zoom);
    this.installLasso();
  }

  /** LOD the next slice request should use under the current zoom. */
  requestLod(state: ViewState, baseBins: number): number {
    const pixelsPerPdf = CELL * state.zoom.k;
    return lodFactor(baseBins, pixelsPerPdf);
  }

  render(state: ViewState, slice: SliceJson): void {
    this.slice = slice;
    const detail = labelsVisible(
      visibleCount(slice.shape, CELL, state.zoom, { width: this.width, height: this.height }),
    );
    const selected = new Set(state.selectedRegions);

    const cells: { thumb: ThumbnailJson; row: number; col: number }[] = [];
    slice.thumbnails.forEach((rowArr, row) =>
      rowArr.forEach((thumb, col) => cells.push({ thumb, row, col })),
    );

    const groups = this.content
      .selectAll<SVGGElement, (typeof cells)[0]>("g.thumb")
      .data(cells, (d) => String(d.thumb.region))
      .join((enter) => {
        const g = enter.append("g").attr("class", "thumb");
        g.append("rect").attr("class", "frame");
        g.append("g").attr("class", "bars");
        g.append("text").attr("class", "region-label");
        return g;
      })
      .attr("transform", (d) => `translate(${d.col * CELL},${d.row * CELL})`)
      .on("click", (_event, d) => this.delegate.onPick(d.thumb.region));

    groups
      .select("rect.frame")
      .attr("width", CELL - 4)
      .attr("height", CELL - 4)
      .attr("x", 2)
      .attr("y", 2)
      .attr("class", (d) => (selected.has(d.thumb.region) ? "frame selected" : "frame"));

    groups.each((d, i, nodes) => {
      drawThumb(d3.select(nodes[i]).select<SVGGElement>("g.bars"), d.thumb, detail);
    });

    groups
      .select("text.region-label")
      .attr("x", 6)
      .attr("y", 14)
      .text((d) => (detail ? `region ${d.thumb.region}` : ""));

    this.renderOrientation(state, slice);
  }

  private renderOrientation(state: ViewState, slice: SliceJson): void {
    const info = orientationInfo(slice.axis, slice.index, sliceCount(state, slice));
    this.orientation.selectAll("*").remove();
    const g = this.orientation.attr("transform", `translate(${this.width - 130},${this.height - 64})`);
    g.append("rect").attr("width", 124).attr("height", 58).attr("class", "orientation-frame");
    g.append("text").attr("x", 8).attr("y", 16).text(info.caption).attr("class", "orientation-caption");
    g.append("text")
      .attr("x", 8)
      .attr("y", 34)
      .text(`→ ${info.horizontal}`)
      .attr("class", "orientation-axis");
    g.append("text")
      .attr("x", 8)
      .attr("y", 50)
      .text(`↓ ${info.vertical}`)
      .attr("class", "orientation-axis");
  }

  private installLasso(): void {
    this.svg
      .on("mousedown.lasso", (event: MouseEvent) => {
        if (!event.shiftKey) return;
        const [x, y] = d3.pointer(event, this.svg.node());
        this.lassoActive = true;
        this.lassoPath = [{ x, y }];
      })
      .on("mousemove.lasso", (event: MouseEvent) => {
        if (!this.lassoActive) return;
        const [x, y] = d3.pointer(event, this.svg.node());
        this.lassoPath.push({ x, y });
        this.drawLasso();
      })
      .on("mouseup.lasso", () => {
        if (!this.lassoActive) return;
        this.lassoActive = false;
        this.finishLasso();
      });
  }

  private drawLasso(): void {
    const line = d3
      .line<Point>()
      .x((p) => p.x)
      .y((p) => p.y);
    const path = this.svg.selectAll<SVGPathElement, null>("path.lasso").data([null]);
    path
      .enter()
      .append("path")
      .attr("class", "lasso")
      .merge(path as never)
      .attr("d", line(this.lassoPath) ?? "");
  }

  private finishLasso(): void {
    this.svg.selectAll("path.lasso").remove();
    if (!this.slice || this.lassoPath.length < 3) {
      this.lassoPath = [];
      return;
    }
    const regions = this.slice.thumbnails.map((row) => row.map((t) => t.region));
    const zoomState = d3.zoomTransform(this.svg.node()!);
    const centers = thumbCenters(regions, CELL, {
      k: zoomState.k,
      x: zoomState.x,
      y: zoomState.y,
    });
    const picked = lassoSelect(centers, this.lassoPath);
    this.lassoPath = [];
    this.delegate.onLasso(picked);
  }
}

function sliceCount(state: ViewState, slice: SliceJson): number {
  void state;
  return slice.index + 1; // patched by main with meta's region_counts
}

function drawThumb(
  g: d3.Selection<SVGGElement, unknown, null, undefined>,
  thumb: ThumbnailJson,
  detail: boolean,
): void {
  g.selectAll("*").remove();
  const inner = CELL - 16;
  if (thumb.nbins.length === 1) {
    const counts = thumb.counts;
    const max = Math.max(1, ...counts);
    const barW = inner / counts.length;
    counts.forEach((c, i) => {
      const h = (c / max) * (inner - 4);
      g.append("rect")
        .attr("class", "bar")
        .attr("x", 8 + i * barW)
        .attr("y", CELL - 8 - h)
        .attr("width", Math.max(barW - 1, 0.5))
        .attr("height", h);
    });
  } else {
    const [n0, n1] = thumb.nbins;
    const max = Math.max(1, ...thumb.counts);
    const w = inner / n0;
    const h = inner / n1;
    for (let flat = 0; flat < thumb.counts.length; flat++) {
      const i0 = flat % n0;
      const i1 = Math.floor(flat / n0);
      const v = thumb.counts[flat] / max;
      g.append("rect")
        .attr("x", 8 + i0 * w)
        .attr("y", CELL - 8 - (i1 + 1) * h)
        .attr("width", w)
        .attr("height", h)
        .attr("fill", d3.interpolateViridis(v))
        .attr("class", "heat-cell");
    }
  }
  if (detail && thumb.edges.length > 0) {
    g.append("text")
      .attr("x", 8)
      .attr("y", CELL - 0.5)
      .attr("class", "axis-hint")
      .text(`${fmt(thumb.edges[0].min)} .. ${fmt(thumb.edges[0].max)}`);
  }
}

function fmt(x: number): string {
  return Math.abs(x) >= 1e4 || (x !== 0 && Math.abs(x) < 1e-3) ? x.toExponential(1) : String(x);
}
