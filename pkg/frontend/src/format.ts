/** Numeric parsing/printing for the range controls (scientific notation accepted). */

/** Parse a range-control entry; returns null when the text is not a finite number. */
export function parseNumeric(text: string): number | null {
  const t = text.trim();
  if (t === "") return null;
  const n = Number(t);
  return Number.isFinite(n) ? n : null;
}

/** Compact tick/control formatting: plain for small magnitudes, scientific otherwise. */
export function formatNumeric(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 1e-3 && a < 1e5) {
    return String(parseFloat(x.toPrecision(6)));
  }
  return x.toExponential(3).replace(/\.?0+e/, "e");
}
