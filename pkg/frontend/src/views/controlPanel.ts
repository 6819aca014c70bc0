/**
 * Control panel: dataset selection state, slice orientation and index,
 * timeline variable, frequency range, and one pair of range text boxes per
 * variable.  Range boxes accept scientific notation; invalid entries are
 * flagged on the control and never reach the state.
 */

import { MetaJson } from "../api.js";
import { formatNumeric } from "../format.js";
import { ViewState } from "../state.js";

export interface ControlPanelDelegate {
  onConfig(index: number): void;
  onSliceAxis(axis: number): void;
  onSliceIndex(index: number): void;
  onRangeEdit(variable: string, loText: string, hiText: string): boolean;
  onFrequencyEdit(loText: string, hiText: string): boolean;
  onTimelineVar(variable: string): void;
}

interface RangePair {
  lo: HTMLInputElement;
  hi: HTMLInputElement;
}

export class ControlPanel {
  private rangeInputs = new Map<string, RangePair>();
  private freqInputs: RangePair | null = null;
  private sliceIndexInput: HTMLInputElement | null = null;

  constructor(
    private container: HTMLElement,
    private meta: MetaJson,
    private delegate: ControlPanelDelegate,
  ) {
    this.build();
  }

  private build(): void {
    const meta = this.meta;
    const panel = this.container;
    panel.classList.add("control-panel");

    panel.appendChild(labelled("PDF configuration", () => {
      const sel = document.createElement("select");
      meta.configs.forEach((cfg, i) => {
        const opt = document.createElement("option");
        opt.value = String(i);
        opt.textContent = `${i}: ${cfg.vars.join(" x ")} (${cfg.strategy})`;
        sel.appendChild(opt);
      });
      sel.addEventListener("change", () => this.delegate.onConfig(Number(sel.value)));
      return sel;
    }));

    panel.appendChild(labelled("Slice axis", () => {
      const sel = document.createElement("select");
      ["X", "Y", "Z"].forEach((name, axis) => {
        const opt = document.createElement("option");
        opt.value = String(axis);
        opt.textContent = name;
        if (axis === 2) opt.selected = true;
        sel.appendChild(opt);
      });
      sel.addEventListener("change", () => this.delegate.onSliceAxis(Number(sel.value)));
      return sel;
    }));

    panel.appendChild(labelled("Slice index", () => {
      const input = document.createElement("input");
      input.type = "number";
      input.min = "0";
      input.value = "0";
      input.addEventListener("change", () => this.delegate.onSliceIndex(Number(input.value)));
      this.sliceIndexInput = input;
      return input;
    }));

    panel.appendChild(labelled("Timeline variable", () => {
      const sel = document.createElement("select");
      meta.variables.forEach((v) => {
        const opt = document.createElement("option");
        opt.value = v.name;
        opt.textContent = v.name;
        sel.appendChild(opt);
      });
      sel.addEventListener("change", () => this.delegate.onTimelineVar(sel.value));
      return sel;
    }));

    const freq = document.createElement("fieldset");
    freq.className = "range-group";
    const freqLegend = document.createElement("legend");
    freqLegend.textContent = "frequency range";
    freq.appendChild(freqLegend);
    this.freqInputs = this.rangeBoxes(freq, (lo, hi) => this.delegate.onFrequencyEdit(lo, hi));
    panel.appendChild(freq);

    for (const v of meta.variables) {
      const group = document.createElement("fieldset");
      group.className = "range-group";
      const legend = document.createElement("legend");
      legend.textContent = `${v.name} range${v.unit ? ` (${v.unit})` : ""}`;
      group.appendChild(legend);
      this.rangeInputs.set(
        v.name,
        this.rangeBoxes(group, (lo, hi) => this.delegate.onRangeEdit(v.name, lo, hi)),
      );
      panel.appendChild(group);
    }
  }

  private rangeBoxes(parent: HTMLElement, commit: (lo: string, hi: string) => boolean): RangePair {
    const lo = document.createElement("input");
    const hi = document.createElement("input");
    for (const input of [lo, hi]) {
      input.type = "text";
      input.size = 10;
      input.spellcheck = false;
      parent.appendChild(input);
    }
    const apply = () => {
      const ok = commit(lo.value, hi.value);
      lo.classList.toggle("invalid", !ok);
      hi.classList.toggle("invalid", !ok);
    };
    lo.addEventListener("change", apply);
    hi.addEventListener("change", apply);
    return { lo, hi };
  }

  /** Reflect state into the controls (brush edits, auto-population). */
  sync(state: ViewState): void {
    for (const [name, pair] of this.rangeInputs) {
      const range = state.displayRanges[name];
      if (!range) continue;
      if (document.activeElement !== pair.lo) pair.lo.value = formatNumeric(range[0]);
      if (document.activeElement !== pair.hi) pair.hi.value = formatNumeric(range[1]);
    }
    if (this.freqInputs) {
      this.freqInputs.lo.value = formatNumeric(state.frequencyRange[0]);
      this.freqInputs.hi.value = formatNumeric(state.frequencyRange[1]);
    }
    if (this.sliceIndexInput) {
      this.sliceIndexInput.max = String(this.meta.grid.region_counts[state.sliceAxis] - 1);
      this.sliceIndexInput.value = String(state.sliceIndex);
    }
  }
}

function labelled(text: string, make: () => HTMLElement): HTMLElement {
  const row = document.createElement("label");
  row.className = "control-row";
  const span = document.createElement("span");
  span.textContent = text;
  row.appendChild(span);
  row.appendChild(make());
  return row;
}
