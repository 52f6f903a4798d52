import { describe, expect, it } from "vitest";
import {
  MAX_WINDOW,
  ModelError,
  WINDOW_STRIDE,
  encodePieces,
  encodeWindow,
  pieceVector,
  resolveModel,
  windowStarts,
} from "../src/model.js";

const spec = resolveModel("hash-16");

describe("resolveModel", () => {
  it("accepts hash-<dim> ids", () => {
    expect(resolveModel("hash-64").dim).toBe(64);
    expect(resolveModel("hash-128").dim).toBe(128);
  });

  it("rejects unknown ids and sizes", () => {
    expect(() => resolveModel("bert-base-cased")).toThrow(ModelError);
    expect(() => resolveModel("hash-7")).toThrow(ModelError);
  });
});

describe("pieceVector", () => {
  it("is deterministic with bounded components", () => {
    const a = pieceVector(spec, "word");
    const b = pieceVector(spec, "word");
    expect(a).toEqual(b);
    expect(a).toHaveLength(16);
    expect(a.every((x) => x >= -1 && x <= 1)).toBe(true);
  });

  it("differs across pieces and across models", () => {
    expect(pieceVector(spec, "cat")).not.toEqual(pieceVector(spec, "dog"));
    expect(pieceVector(spec, "cat")).not.toEqual(
      pieceVector(resolveModel("hash-16"), "##cat")
    );
    expect(pieceVector(resolveModel("hash-32"), "cat").slice(0, 16)).not.toEqual(
      pieceVector(spec, "cat")
    );
  });
});

describe("encodeWindow", () => {
  it("is contextual: same piece, different neighbours, different vector", () => {
    const a = encodeWindow(spec, ["the", "cat", "sat"], "last");
    const b = encodeWindow(spec, ["the", "cat", "ran"], "last");
    expect(a[1]).not.toEqual(b[1]);
  });

  it("last and sum4 selections differ", () => {
    const last = encodeWindow(spec, ["a", "b", "c"], "last");
    const sum4 = encodeWindow(spec, ["a", "b", "c"], "sum4");
    expect(last[0]).not.toEqual(sum4[0]);
  });
});

describe("windowStarts", () => {
  it("uses one window for short sequences", () => {
    expect(windowStarts(MAX_WINDOW)).toEqual([0]);
    expect(windowStarts(3)).toEqual([0]);
  });

  it("covers every position with stride half the window", () => {
    for (const n of [MAX_WINDOW + 1, MAX_WINDOW * 2, 333]) {
      const starts = windowStarts(n);
      const covered = new Set<number>();
      for (const s of starts) {
        expect(s % WINDOW_STRIDE === 0 || s === n - MAX_WINDOW).toBe(true);
        for (let g = s; g < Math.min(s + MAX_WINDOW, n); g++) covered.add(g);
      }
      expect(covered.size).toBe(n);
    }
  });
});

describe("encodePieces", () => {
  it("returns one vector per piece and is deterministic on long inputs", () => {
    const pieces = Array.from({ length: MAX_WINDOW + 40 }, (_, i) => `p${i % 50}`);
    const a = encodePieces(spec, pieces, "last");
    const b = encodePieces(spec, pieces, "last");
    expect(a).toHaveLength(pieces.length);
    expect(a).toEqual(b);
  });

  it("interior positions use the window where they are most central", () => {
    const n = MAX_WINDOW + WINDOW_STRIDE;
    const pieces = Array.from({ length: n }, (_, i) => `q${i % 30}`);
    const full = encodePieces(spec, pieces, "last");
    const lastWindow = encodeWindow(spec, pieces.slice(n - MAX_WINDOW), "last");
    // The final position is central only in the last window.
    expect(full[n - 1]).toEqual(lastWindow[MAX_WINDOW - 1]);
    // The first position only appears in the first window.
    const firstWindow = encodeWindow(spec, pieces.slice(0, MAX_WINDOW), "last");
    expect(full[0]).toEqual(firstWindow[0]);
  });
});
