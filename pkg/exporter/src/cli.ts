#!/usr/bin/env node
/**
 * Command line entry point.
 *
 *   kpemb-export export --model hash-64 --pooling mean --layers last \
 *       --in corpus.jsonl --out corpus.kpemb
 *   kpemb-export export-fixed --in corpus.jsonl --table glove.txt --out small.txt
 *
 * Exit codes: 0 success, 1 usage error, 2 data or model error.
 */

import { exportCorpus, exportFixed, ExportConfig } from "./export.js";
import { ModelError } from "./model.js";
import { FormatError } from "./store.js";

function usageError(msg: string): never {
  console.error(`error: ${msg}`);
  console.error(
    "usage: kpemb-export export --model <id> [--pooling mean|first] " +
      "[--layers last|sum4] [--uncased] [--batch N] --in <processed> --out <store>\n" +
      "       kpemb-export export-fixed --in <processed> --table <table> --out <path>"
  );
  process.exit(1);
}

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) usageError(`unexpected argument '${arg}'`);
    const name = arg.slice(2);
    if (name === "uncased") {
      flags.set(name, "true");
    } else {
      const value = argv[++i];
      if (value === undefined) usageError(`flag --${name} needs a value`);
      flags.set(name, value);
    }
  }
  return flags;
}

function requireFlag(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) usageError(`missing required flag --${name}`);
  return value;
}

export function run(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command === undefined) usageError("no command given");
  try {
    if (command === "export") {
      const flags = parseFlags(rest);
      const pooling = flags.get("pooling") ?? "mean";
      const layers = flags.get("layers") ?? "last";
      if (pooling !== "mean" && pooling !== "first")
        usageError(`--pooling must be mean or first, got '${pooling}'`);
      if (layers !== "last" && layers !== "sum4")
        usageError(`--layers must be last or sum4, got '${layers}'`);
      const batchSize = Number(flags.get("batch") ?? "16");
      if (!Number.isInteger(batchSize) || batchSize < 1)
        usageError(`--batch must be a positive integer`);
      const config: ExportConfig = {
        model: requireFlag(flags, "model"),
        pooling,
        layers,
        lowercase: flags.has("uncased"),
        batchSize,
        outPath: requireFlag(flags, "out"),
      };
      const report = exportCorpus(requireFlag(flags, "in"), config);
      console.log(
        `exported ${report.nDocs} docs / ${report.nTokens} tokens, dim ${report.dim}, ` +
          `${report.alignmentFailures.length} alignment fallbacks -> ${config.outPath}`
      );
      return 0;
    }
    if (command === "export-fixed") {
      const flags = parseFlags(rest);
      const result = exportFixed(
        requireFlag(flags, "in"),
        requireFlag(flags, "table"),
        requireFlag(flags, "out")
      );
      console.log(`kept ${result.kept} rows, dim ${result.dim}`);
      return 0;
    }
    usageError(`unknown command '${command}'`);
  } catch (e) {
    if (e instanceof ModelError || e instanceof FormatError) {
      console.error(`error: ${e.message}`);
      return 2;
    }
    if (e instanceof Error && "code" in e && (e as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${e.message}`);
      return 2;
    }
    throw e;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(run(process.argv.slice(2)));
}
