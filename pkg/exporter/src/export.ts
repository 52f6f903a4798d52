/**
 * Export pipelines: contextual stores and vocabulary-reduced fixed tables.
 */

import {
  FixedTable,
  ProcessedDoc,
  StoreRecord,
  readFixedTable,
  readProcessedCorpus,
  serializeStore,
  writeFileAtomic,
} from "./store.js";
import { ModelSpec, encodePieces, resolveModel } from "./model.js";
import { tokenizeDocument } from "./tokenizer.js";

export type Pooling = "mean" | "first";
export type LayerSelection = "last" | "sum4";

export interface ExportConfig {
  model: string;
  pooling: Pooling;
  layers: LayerSelection;
  lowercase: boolean;
  batchSize: number;
  outPath: string;
}

export interface ExportReport {
  nDocs: number;
  nTokens: number;
  /** (doc_id, token) pairs that failed subword alignment. */
  alignmentFailures: Array<[string, string]>;
  dim: number;
}

function poolToken(vectors: number[][], pooling: Pooling): number[] {
  if (pooling === "first" || vectors.length === 1) return vectors[0];
  const dim = vectors[0].length;
  const out = new Array(dim).fill(0);
  for (const v of vectors) for (let d = 0; d < dim; d++) out[d] += v[d];
  for (let d = 0; d < dim; d++) out[d] /= vectors.length;
  return out;
}

function meanOfRows(rows: number[][], dim: number): number[] {
  const out = new Array(dim).fill(0);
  if (rows.length === 0) return out;
  for (const row of rows) for (let d = 0; d < dim; d++) out[d] += row[d];
  for (let d = 0; d < dim; d++) out[d] /= rows.length;
  return out;
}

/**
 * Encode one document to per-corpus-token vectors: subword split, model
 * encoding (sliding windows for long documents), and pooling back to one
 * row per token. Tokens with no subword pieces get the mean of the
 * document's aligned rows and are reported as alignment failures.
 */
export function encodeDocument(
  spec: ModelSpec,
  doc: ProcessedDoc,
  config: Pick<ExportConfig, "pooling" | "layers" | "lowercase">
): { vectors: number[][]; failures: string[] } {
  const groups = tokenizeDocument(doc.tokens, config.lowercase);
  const flat: string[] = [];
  const spans: Array<[number, number]> = [];
  for (const g of groups) {
    spans.push([flat.length, flat.length + g.pieces.length]);
    flat.push(...g.pieces);
  }
  const encoded = encodePieces(spec, flat, config.layers);

  const vectors: Array<number[] | null> = [];
  const failures: string[] = [];
  groups.forEach((g, i) => {
    const [lo, hi] = spans[i];
    if (lo === hi) {
      failures.push(g.token);
      vectors.push(null);
    } else {
      vectors.push(poolToken(encoded.slice(lo, hi), config.pooling));
    }
  });
  if (failures.length > 0) {
    const aligned = vectors.filter((v): v is number[] => v !== null);
    const fallback = meanOfRows(aligned, spec.dim);
    for (let i = 0; i < vectors.length; i++) {
      if (vectors[i] === null) vectors[i] = fallback;
    }
  }
  return { vectors: vectors as number[][], failures };
}

/** Run a full export; returns the report after writing the store. */
export function exportCorpus(
  processedPath: string,
  config: ExportConfig,
  warn: (msg: string) => void = (m) => console.error(m)
): ExportReport {
  const spec = resolveModel(config.model);
  const docs = readProcessedCorpus(processedPath);
  const records: StoreRecord[] = [];
  const alignmentFailures: Array<[string, string]> = [];
  let nTokens = 0;
  // Batch boundaries only group work; records stay in corpus order.
  for (let b = 0; b < docs.length; b += config.batchSize) {
    for (const doc of docs.slice(b, b + config.batchSize)) {
      const { vectors, failures } = encodeDocument(spec, doc, config);
      for (const token of failures) {
        alignmentFailures.push([doc.doc_id, token]);
        warn(`warning: no subword alignment for token '${token}' in doc '${doc.doc_id}'`);
      }
      nTokens += vectors.length;
      records.push({ doc_id: doc.doc_id, vectors });
    }
  }
  writeFileAtomic(config.outPath, serializeStore(spec.dim, records));
  return { nDocs: docs.length, nTokens, alignmentFailures, dim: spec.dim };
}

/**
 * Reduce a fixed embedding table to the vocabulary of a processed corpus.
 * Rows are kept when they match a corpus token exactly or its lowercase
 * form, matching the lookup order of the table loader on the other side.
 */
export function exportFixed(
  processedPath: string,
  tablePath: string,
  outPath: string,
  warn: (msg: string) => void = (m) => console.error(m)
): { kept: number; dim: number } {
  const docs = readProcessedCorpus(processedPath);
  const vocab = new Set<string>();
  for (const doc of docs) {
    for (const token of doc.tokens) {
      vocab.add(token);
      vocab.add(token.toLowerCase());
    }
  }
  const table: FixedTable = readFixedTable(tablePath);
  const kept: string[] = [];
  for (const [word, line] of table.rows) {
    if (vocab.has(word)) kept.push(line);
  }
  if (kept.length === 0) warn("warning: corpus vocabulary and table do not intersect");
  const lines = table.hadHeader ? [`${kept.length} ${table.dim}`, ...kept] : kept;
  writeFileAtomic(outPath, lines.join("\n") + "\n");
  return { kept: kept.length, dim: table.dim };
}
