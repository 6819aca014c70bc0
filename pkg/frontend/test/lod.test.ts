import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { labelsVisible, lodFactor, visibleCount } from "../src/lod.js";
import { mockFetch } from "./mockServer.js";

describe("lod factor", () => {
  it("stays within [1, baseBins]", () => {
    for (const bins of [1, 7, 32, 256]) {
      for (const px of [0.5, 4, 40, 400, 4000]) {
        const lod = lodFactor(bins, px);
        expect(lod).toBeGreaterThanOrEqual(1);
        expect(lod).toBeLessThanOrEqual(Math.max(bins, 1));
      }
    }
  });

  it("is non-increasing as the pdf gets more pixels", () => {
    let prev = Infinity;
    for (const px of [1, 2, 8, 32, 128, 512, 2048]) {
      const lod = lodFactor(64, px);
      expect(lod).toBeLessThanOrEqual(prev);
      prev = lod;
    }
  });

  it("reveals full bins when zoomed in", () => {
    expect(lodFactor(32, 1024)).toBe(1);
  });

  it("coarsens to a single bin when the pdf is tiny", () => {
    expect(lodFactor(32, 0.5)).toBe(32);
  });
});

describe("labels", () => {
  it("appear only when at most four pdfs are visible", () => {
    expect(labelsVisible(1)).toBe(true);
    expect(labelsVisible(4)).toBe(true);
    expect(labelsVisible(5)).toBe(false);
  });

  it("visible count respects zoom and viewport", () => {
    const all = visibleCount([4, 4], 100, { k: 1, x: 0, y: 0 }, { width: 400, height: 400 });
    expect(all).toBe(16);
    const zoomed = visibleCount([4, 4], 100, { k: 4, x: 0, y: 0 }, { width: 400, height: 400 });
    expect(zoomed).toBe(1);
  });
});

describe("lod mass invariance against the server fixtures", () => {
  const api = new ApiClient("", mockFetch);

  it("thumbnail totals equal /pdf totals at every zoom level", async () => {
    for (const config of [0, 1]) {
      for (const lod of [1, 2, 3, 4]) {
        const slice = await api.slice(0, config, 2, 0, lod);
        expect(slice.lod).toBe(lod);
        for (const row of slice.thumbnails) {
          for (const thumb of row) {
            const pdf = await api.pdf(0, config, thumb.region);
            const thumbTotal = thumb.counts.reduce((a, b) => a + b, 0);
            const pdfTotal = pdf.counts.reduce((a, b) => a + b, 0);
            expect(thumbTotal).toBe(pdfTotal);
          }
        }
      }
    }
  });

  it("rebinned thumbnails shrink by the lod factor", async () => {
    const fine = await api.slice(0, 0, 2, 0, 1);
    const coarse = await api.slice(0, 0, 2, 0, 3);
    fine.thumbnails.flat().forEach((thumb, i) => {
      const rebinned = coarse.thumbnails.flat()[i];
      expect(rebinned.nbins[0]).toBe(Math.ceil(thumb.nbins[0] / 3));
    });
  });
});
