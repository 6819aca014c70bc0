/**
 * Timeline view: per-timestep averages of a chosen variable with the
 * active timestep marked; clicking a point selects that timestep.
 */

import * as d3 from "d3";
import { TimelinePointJson } from "../api.js";
import { formatNumeric } from "../format.js";

const W = 420;
const H = 120;
const M = { top: 10, right: 12, bottom: 22, left: 52 };

export class TimelineView {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;

  constructor(container: HTMLElement, private onPick: (timestep: number) => void) {
    this.svg = d3
      .select(container)
      .append("svg")
      .attr("width", W)
      .attr("height", H)
      .attr("class", "timeline-view");
  }

  render(points: TimelinePointJson[], active: number): void {
    this.svg.selectAll("*").remove();
    const live = points.filter((p) => p.mean !== null);
    if (!live.length) return;
    const x = d3
      .scaleLinear()
      .domain(d3.extent(points, (p) => p.time) as [number, number])
      .range([M.left, W - M.right]);
    const y = d3
      .scaleLinear()
      .domain(d3.extent(live, (p) => p.mean!) as [number, number])
      .nice()
      .range([H - M.bottom, M.top]);

    this.svg
      .append("path")
      .datum(live)
      .attr("class", "timeline-line")
      .attr(
        "d",
        d3
          .line<TimelinePointJson>()
          .x((p) => x(p.time))
          .y((p) => y(p.mean!)),
      );

    this.svg
      .selectAll("circle.step")
      .data(live)
      .join("circle")
      .attr("class", (p) => (p.timestep === active ? "step active" : "step"))
      .attr("cx", (p) => x(p.time))
      .attr("cy", (p) => y(p.mean!))
      .attr("r", (p) => (p.timestep === active ? 6 : 4))
      .on("click", (_e, p) => this.onPick(p.timestep));

    this.svg
      .append("g")
      .attr("transform", `translate(0,${H - M.bottom})`)
      .call(d3.axisBottom(x).ticks(5).tickFormat((v) => formatNumeric(Number(v))));
    this.svg
      .append("g")
      .attr("transform", `translate(${M.left},0)`)
      .call(d3.axisLeft(y).ticks(4).tickFormat((v) => formatNumeric(Number(v))));
  }
}
