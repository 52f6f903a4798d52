import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";
import { ExportConfig, encodeDocument, exportCorpus, exportFixed } from "../src/export.js";
import { encodePieces, resolveModel } from "../src/model.js";
import { readProcessedCorpus, serializeStore } from "../src/store.js";
import { tokenizeDocument } from "../src/tokenizer.js";
import { run } from "../src/cli.js";

const WORDS = [
  "neural", "keyphrase", "extraction", "sequence", "labeling", "model",
  "attention", "the", "of", "a", "gradient", "descent", "corpus", "token",
  "embedding", "contextual", "subword", "alignment", "window", "pooling",
];

let dir: string;
let corpusPath: string;
let tokenCounts: Map<string, number>;

function makeCorpus(path: string, nDocs: number): Map<string, number> {
  // Small multiplicative congruential stream; no RNG dependency needed.
  let state = 12345;
  const next = (bound: number) => {
    state = (state * 48271) % 2147483647;
    return state % bound;
  };
  const counts = new Map<string, number>();
  const lines: string[] = [];
  for (let i = 0; i < nDocs; i++) {
    const n = 8 + next(40);
    const tokens = Array.from({ length: n }, () => WORDS[next(WORDS.length)]);
    counts.set(`doc${i}`, n);
    lines.push(
      JSON.stringify({ doc_id: `doc${i}`, tokens, labels: tokens.map(() => "O") })
    );
  }
  writeFileSync(path, lines.join("\n") + "\n");
  return counts;
}

function baseConfig(outPath: string): ExportConfig {
  return {
    model: "hash-32",
    pooling: "mean",
    layers: "last",
    lowercase: true,
    batchSize: 4,
    outPath,
  };
}

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "kpemb-"));
  corpusPath = join(dir, "corpus.jsonl");
  tokenCounts = makeCorpus(corpusPath, 20);
});

describe("exportCorpus contract on a 20-doc sample", () => {
  it("writes one row per corpus token for every document", () => {
    const out = join(dir, "contract.kpemb");
    const report = exportCorpus(corpusPath, baseConfig(out), () => {});
    expect(report.nDocs).toBe(20);
    expect(report.alignmentFailures).toEqual([]);

    const lines = readFileSync(out, "utf-8").trimEnd().split("\n");
    const header = JSON.parse(lines[0]);
    expect(header).toEqual({ format: "kpemb", version: 1, dim: 32 });
    expect(lines).toHaveLength(21);
    let mismatches = 0;
    for (const line of lines.slice(1)) {
      const rec = JSON.parse(line);
      expect(rec.dim).toBe(32);
      if (rec.vectors.length !== tokenCounts.get(rec.doc_id)) mismatches += 1;
      for (const row of rec.vectors) expect(row).toHaveLength(32);
    }
    expect(mismatches).toBe(0);
  });

  it("mean-pooled rows equal recomputed means of raw subword vectors (1e-6)", () => {
    const out = join(dir, "pooling.kpemb");
    exportCorpus(corpusPath, baseConfig(out), () => {});
    const spec = resolveModel("hash-32");
    const docs = readProcessedCorpus(corpusPath);
    const lines = readFileSync(out, "utf-8").trimEnd().split("\n").slice(1);
    const byId = new Map(lines.map((l) => [JSON.parse(l).doc_id, JSON.parse(l)]));

    for (const doc of docs) {
      const groups = tokenizeDocument(doc.tokens, true);
      const flat = groups.flatMap((g) => g.pieces);
      const raw = encodePieces(spec, flat, "last");
      const rows = byId.get(doc.doc_id).vectors as number[][];
      let offset = 0;
      groups.forEach((g, i) => {
        const sub = raw.slice(offset, offset + g.pieces.length);
        offset += g.pieces.length;
        for (let d = 0; d < spec.dim; d++) {
          const mean = sub.reduce((acc, v) => acc + v[d], 0) / sub.length;
          expect(Math.abs(rows[i][d] - mean)).toBeLessThan(1e-6);
        }
      });
    }
  });

  it("re-export with identical config is byte-identical", () => {
    const outA = join(dir, "a.kpemb");
    const outB = join(dir, "b.kpemb");
    exportCorpus(corpusPath, baseConfig(outA), () => {});
    exportCorpus(corpusPath, baseConfig(outB), () => {});
    expect(readFileSync(outA)).toEqual(readFileSync(outB));
  });
});

describe("encodeDocument", () => {
  it("first pooling takes the first subword row", () => {
    const spec = resolveModel("hash-16");
    const doc = { doc_id: "d", tokens: ["tokenization", "of", "embeddings"] };
    const { vectors } = encodeDocument(spec, doc, {
      pooling: "first",
      layers: "last",
      lowercase: true,
    });
    const flat = tokenizeDocument(doc.tokens, true).flatMap((g) => g.pieces);
    const raw = encodePieces(spec, flat, "last");
    expect(vectors[0]).toEqual(raw[0]);
    expect(vectors[1]).toEqual(raw[tokenizeDocument(["tokenization"], true)[0].pieces.length]);
  });

  it("unalignable tokens fall back to the document mean and are reported", () => {
    const spec = resolveModel("hash-16");
    const doc = { doc_id: "d", tokens: ["real", "​", "words"] };
    const { vectors, failures } = encodeDocument(spec, doc, {
      pooling: "mean",
      layers: "last",
      lowercase: false,
    });
    expect(failures).toEqual(["​"]);
    for (let d = 0; d < spec.dim; d++) {
      expect(vectors[1][d]).toBeCloseTo((vectors[0][d] + vectors[2][d]) / 2, 10);
    }
  });

  it("sum4 layer selection changes the output", () => {
    const spec = resolveModel("hash-16");
    const doc = { doc_id: "d", tokens: ["alpha", "beta"] };
    const last = encodeDocument(spec, doc, { pooling: "mean", layers: "last", lowercase: true });
    const sum4 = encodeDocument(spec, doc, { pooling: "mean", layers: "sum4", lowercase: true });
    expect(last.vectors).not.toEqual(sum4.vectors);
  });
});

describe("exportFixed", () => {
  it("keeps only corpus-vocabulary rows, preserving lines and header", () => {
    const table = join(dir, "table.txt");
    writeFileSync(
      table,
      "3 4\nneural 1 2 3 4\nzzz 9 9 9 9\ntoken 0.5 0.25 -1 2\n"
    );
    const out = join(dir, "small.txt");
    const result = exportFixed(corpusPath, table, out, () => {});
    expect(result).toEqual({ kept: 2, dim: 4 });
    expect(readFileSync(out, "utf-8")).toBe("2 4\nneural 1 2 3 4\ntoken 0.5 0.25 -1 2\n");
  });

  it("empty intersection gives a valid header, empty body, and a warning", () => {
    const table = join(dir, "disjoint.txt");
    writeFileSync(table, "1 2\nqqqq 1 2\n");
    const out = join(dir, "empty.txt");
    const warnings: string[] = [];
    const result = exportFixed(corpusPath, table, out, (m) => warnings.push(m));
    expect(result.kept).toBe(0);
    expect(warnings).toHaveLength(1);
    expect(readFileSync(out, "utf-8")).toBe("0 2\n");
  });
});

describe("cli run", () => {
  it("exports through the command line surface", () => {
    const out = join(dir, "cli.kpemb");
    const code = run([
      "export", "--model", "hash-16", "--pooling", "mean", "--layers", "sum4",
      "--uncased", "--in", corpusPath, "--out", out,
    ]);
    expect(code).toBe(0);
    const header = JSON.parse(readFileSync(out, "utf-8").split("\n")[0]);
    expect(header.dim).toBe(16);
  });

  it("fails with exit 2 when the model cannot be obtained", () => {
    const code = run([
      "export", "--model", "scibert-scivocab", "--in", corpusPath,
      "--out", join(dir, "never.kpemb"),
    ]);
    expect(code).toBe(2);
  });

  it("fails with exit 2 on a missing corpus", () => {
    const code = run([
      "export", "--model", "hash-16", "--in", join(dir, "nope.jsonl"),
      "--out", join(dir, "never2.kpemb"),
    ]);
    expect(code).toBe(2);
  });
});

describe("store serialization", () => {
  it("emits the header first and one record per document", () => {
    const text = serializeStore(2, [{ doc_id: "x", vectors: [[1, 2]] }]);
    expect(text).toBe(
      '{"format":"kpemb","version":1,"dim":2}\n{"doc_id":"x","dim":2,"vectors":[[1,2]]}\n'
    );
  });
});
