/**
 * File formats shared with the tagging toolkit.
 *
 * Processed corpus: JSON lines with doc_id / tokens / labels.
 * Contextual store ("kpemb" v1): one JSON header line with the format
 * name, version, and dimensionality, then one JSON record per document
 * holding its per-token vectors in corpus order.
 * Fixed tables: whitespace-separated text, one word per line, with an
 * optional "count dim" header line.
 */

import { readFileSync, writeFileSync, renameSync } from "node:fs";
import { dirname, join } from "node:path";

export const STORE_FORMAT = "kpemb";
export const STORE_VERSION = 1;

export interface ProcessedDoc {
  doc_id: string;
  tokens: string[];
}

export interface StoreRecord {
  doc_id: string;
  vectors: number[][];
}

export class FormatError extends Error {}

export function readProcessedCorpus(path: string): ProcessedDoc[] {
  const docs: ProcessedDoc[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (line.trim() === "") return;
    let rec: unknown;
    try {
      rec = JSON.parse(line);
    } catch (e) {
      throw new FormatError(`${path}:${i + 1}: not valid JSON`);
    }
    const obj = rec as { doc_id?: unknown; tokens?: unknown };
    if (typeof obj.doc_id !== "string" || !Array.isArray(obj.tokens)) {
      throw new FormatError(`${path}:${i + 1}: record needs doc_id and tokens`);
    }
    if (seen.has(obj.doc_id)) {
      throw new FormatError(`${path}:${i + 1}: duplicate doc_id '${obj.doc_id}'`);
    }
    seen.add(obj.doc_id);
    docs.push({ doc_id: obj.doc_id, tokens: obj.tokens.map(String) });
  });
  return docs;
}

/** Serialize a full store to a string (header line + one record per doc). */
export function serializeStore(dim: number, records: StoreRecord[]): string {
  const lines = [JSON.stringify({ format: STORE_FORMAT, version: STORE_VERSION, dim })];
  for (const rec of records) {
    lines.push(JSON.stringify({ doc_id: rec.doc_id, dim, vectors: rec.vectors }));
  }
  return lines.join("\n") + "\n";
}

/** Write atomically: temp file in the target directory, then rename. */
export function writeFileAtomic(path: string, content: string): void {
  const tmp = join(dirname(path), `.tmp-${process.pid}-${Date.now()}`);
  writeFileSync(tmp, content, "utf-8");
  renameSync(tmp, path);
}

export interface FixedTable {
  /** Raw line (without newline) per word, preserving original formatting. */
  rows: Map<string, string>;
  dim: number;
  hadHeader: boolean;
}

export function readFixedTable(path: string): FixedTable {
  const lines = readFileSync(path, "utf-8").split("\n");
  const rows = new Map<string, string>();
  let dim = -1;
  let hadHeader = false;
  let first = true;
  lines.forEach((line, i) => {
    if (line.trim() === "") return;
    const fields = line.split(/\s+/).filter((f) => f !== "");
    if (first) {
      first = false;
      if (fields.length === 2 && fields.every((f) => /^\d+$/.test(f))) {
        hadHeader = true;
        dim = Number(fields[1]);
        return;
      }
    }
    if (fields.length < 2) {
      throw new FormatError(`${path}:${i + 1}: row needs a word and vector fields`);
    }
    if (dim === -1) dim = fields.length - 1;
    if (fields.length - 1 !== dim) {
      throw new FormatError(
        `${path}:${i + 1}: expected ${dim} vector fields, got ${fields.length - 1}`
      );
    }
    if (!rows.has(fields[0])) rows.set(fields[0], line);
  });
  if (dim === -1) throw new FormatError(`${path}: empty table`);
  return { rows, dim, hadHeader };
}
