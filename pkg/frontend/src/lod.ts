/**
 * Level-of-detail policy for the slice view.
 *
 * Thumbnails are requested at lod = clamp(floor(baseBins / displayable), 1,
 * baseBins) where displayable = pixelsPerPdf * BINS_PER_PIXEL, so zooming in
 * progressively reveals bins.  Axes and labels appear only when few PDFs
 * are visible; rebinning itself happens server-side and never changes a
 * thumbnail's total mass.
 */

export const BINS_PER_PIXEL = 0.25; // one bin per 4 px reads comfortably

export function lodFactor(baseBins: number, pixelsPerPdf: number, binsPerPixel = BINS_PER_PIXEL): number {
  if (baseBins < 1) return 1;
  const displayable = Math.max(1, pixelsPerPdf * binsPerPixel);
  const lod = Math.floor(baseBins / displayable);
  return Math.min(Math.max(lod, 1), baseBins);
}

/** Axis ticks and labels switch on when at most this many PDFs are visible. */
export const DETAIL_PDF_LIMIT = 4;

export function labelsVisible(visiblePdfCount: number): boolean {
  return visiblePdfCount <= DETAIL_PDF_LIMIT;
}

/** PDFs of the slice that intersect the viewport under a zoom transform. */
export function visibleCount(
  shape: [number, number],
  cellSize: number,
  zoom: { k: number; x: number; y: number },
  viewport: { width: number; height: number },
): number {
  const [rows, cols] = shape;
  let n = 0;
  for (let v = 0; v < rows; v++) {
    for (let h = 0; h < cols; h++) {
      const x0 = zoom.x + h * cellSize * zoom.k;
      const y0 = zoom.y + v * cellSize * zoom.k;
      const x1 = x0 + cellSize * zoom.k;
      const y1 = y0 + cellSize * zoom.k;
      if (x1 > 0 && y1 > 0 && x0 < viewport.width && y0 < viewport.height) n++;
    }
  }
  return n;
}
