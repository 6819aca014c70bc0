/**
 * PDF view: one selected regional PDF in detail, with bin brushing that
 * drives the range controls, highlight of the brushed interval, a
 * frequency-range display clamp, and the 1D/2D toggle placed inside the
 * view where it is discoverable.
 */

import * as d3 from "d3";
import { PdfJson } from "../api.js";
import { formatNumeric } from "../format.js";
import { highlightedBins, ViewState } from "../state.js";

const W = 420;
const H = 260;
const M = { top: 24, right: 12, bottom: 34, left: 52 };

export interface PdfViewDelegate {
  onBrush(variable: string, lo: number, hi: number): void;
  onToggle2d(): void;
}

export class PdfView {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private toggle: HTMLButtonElement;

  constructor(container: HTMLElement, private delegate: PdfViewDelegate) {
    const header = document.createElement("div");
    header.className = "pdf-view-header";
    this.toggle = document.createElement("button");
    this.toggle.textContent = "1D / 2D";
    this.toggle.title = "Switch between the marginal histogram and the joint heatmap";
    this.toggle.addEventListener("click", () => this.delegate.onToggle2d());
    header.appendChild(this.toggle);
    container.appendChild(header);
    this.svg = d3
      .select(container)
      .append("svg")
      .attr("width", W)
      .attr("height", H)
      .attr("class", "pdf-view");
  }

  render(state: ViewState, pdf: PdfJson): void {
    this.toggle.style.display = pdf.ndims === 2 ? "inline-block" : "none";
    this.svg.selectAll("*").remove();
    if (pdf.ndims === 2 && state.show2d) {
      this.render2d(pdf);
    } else {
      this.render1d(state, pdf);
    }
  }

  private render1d(state: ViewState, pdf: PdfJson): void {
    const axisVar = pdf.vars[0];
    const edges = pdf.edges[0];
    const counts = pdf.ndims === 1 ? pdf.counts : marginal0(pdf);
    const x = d3.scaleLinear().domain([edges.min, edges.max]).range([M.left, W - M.right]);
    const freqMax = Math.max(state.frequencyRange[1], 1);
    const y = d3.scaleLinear().domain([0, freqMax]).range([H - M.bottom, M.top]);
    const width = (edges.max - edges.min) / edges.nbins;
    const highlighted = new Set(highlightedBins(state, axisVar, edges));

    const g = this.svg.append("g");
    counts.forEach((c, i) => {
      const clamped = Math.min(c, freqMax);
      g.append("rect")
        .attr("class", highlighted.has(i) ? "bar brushed" : "bar")
        .attr("x", x(edges.min + i * width))
        .attr("width", Math.max(x(edges.min + width) - x(edges.min) - 1, 0.5))
        .attr("y", y(clamped))
        .attr("height", y(0) - y(clamped));
    });

    // numeric axis always increases rightward; negative-valued variables
    // are disambiguated by tick labels, not by flipping the data
    this.svg
      .append("g")
      .attr("transform", `translate(0,${H - M.bottom})`)
      .call(d3.axisBottom(x).ticks(6).tickFormat((v) => formatNumeric(Number(v))));
    this.svg
      .append("g")
      .attr("transform", `translate(${M.left},0)`)
      .call(d3.axisLeft(y).ticks(5));
    this.svg
      .append("text")
      .attr("x", W / 2)
      .attr("y", H - 4)
      .attr("class", "axis-title")
      .text(`${axisVar}`);

    const brush = d3
      .brushX()
      .extent([
        [M.left, M.top],
        [W - M.right, H - M.bottom],
      ])
      .on("end", (event) => {
        if (!event.selection || !event.sourceEvent) return;
        const [x0, x1] = event.selection as [number, number];
        this.delegate.onBrush(axisVar, x.invert(x0), x.invert(x1));
      });
    this.svg.append("g").attr("class", "pdf-brush").call(brush);
  }

  private render2d(pdf: PdfJson): void {
    const [e0, e1] = pdf.edges;
    const x = d3.scaleLinear().domain([e0.min, e0.max]).range([M.left, W - M.right]);
    const y = d3.scaleLinear().domain([e1.min, e1.max]).range([H - M.bottom, M.top]);
    const max = Math.max(1, ...pdf.counts);
    const cw = (x(e0.max) - x(e0.min)) / e0.nbins;
    const ch = (y(e1.min) - y(e1.max)) / e1.nbins;
    const g = this.svg.append("g");
    for (let flat = 0; flat < pdf.counts.length; flat++) {
      const i0 = flat % e0.nbins;
      const i1 = Math.floor(flat / e0.nbins);
      g.append("rect")
        .attr("x", x(e0.min) + i0 * cw)
        .attr("y", y(e1.min) - (i1 + 1) * ch)
        .attr("width", cw)
        .attr("height", ch)
        .attr("fill", d3.interpolateViridis(pdf.counts[flat] / max));
    }
    this.svg
      .append("g")
      .attr("transform", `translate(0,${H - M.bottom})`)
      .call(d3.axisBottom(x).ticks(6).tickFormat((v) => formatNumeric(Number(v))));
    this.svg
      .append("g")
      .attr("transform", `translate(${M.left},0)`)
      .call(d3.axisLeft(y).ticks(5).tickFormat((v) => formatNumeric(Number(v))));
    this.svg
      .append("text")
      .attr("x", W / 2)
      .attr("y", H - 4)
      .attr("class", "axis-title")
      .text(`${pdf.vars[0]} vs ${pdf.vars[1]}`);
  }
}

function marginal0(pdf: PdfJson): number[] {
  const n0 = pdf.edges[0].nbins;
  const out = new Array(n0).fill(0);
  pdf.counts.forEach((c, flat) => {
    out[flat % n0] += c;
  });
  return out;
}
