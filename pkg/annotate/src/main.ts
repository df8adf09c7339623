/**
 * CLI entry: annotate a raw text+label file into the engine's corpus
 * format.
 *
 *   node dist/main.js --input data.tsv --entity-dict entities.tsv \
 *     --entity-embeddings emb.txt --out outdir [--word-embeddings w.txt] \
 *     [--labeled-per-class 40] [--seed 0]
 */

import { parseArgs } from "util";

import { RawDatasetSpec, annotate, writeOutputs } from "./pipeline";

function run(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      input: { type: "string" },
      "entity-dict": { type: "string" },
      "entity-embeddings": { type: "string" },
      "word-embeddings": { type: "string" },
      out: { type: "string" },
      "labeled-per-class": { type: "string", default: "40" },
      seed: { type: "string", default: "0" },
    },
  });

  for (const required of ["input", "entity-dict", "entity-embeddings", "out"]) {
    if (!values[required as keyof typeof values]) {
      console.error(`error: missing --${required}`);
      return 2;
    }
  }
  const labeledPerClass = Number(values["labeled-per-class"]);
  const seed = Number(values.seed);
  if (!Number.isInteger(labeledPerClass) || labeledPerClass < 2) {
    console.error("error: --labeled-per-class must be an integer >= 2");
    return 2;
  }
  if (!Number.isInteger(seed)) {
    console.error("error: --seed must be an integer");
    return 2;
  }

  const spec: RawDatasetSpec = {
    inputPath: values.input!,
    entityDictPath: values["entity-dict"]!,
    entityEmbeddingPath: values["entity-embeddings"]!,
    wordEmbeddingPath: values["word-embeddings"],
    labeledPerClass,
    seed,
  };

  const result = annotate(spec);
  for (const warning of result.warnings) {
    console.error(`warning: ${warning}`);
  }
  const written = writeOutputs(values.out!, result, spec.wordEmbeddingPath);
  console.log(JSON.stringify({ outputs: written, stats: result.stats }));
  return 0;
}

try {
  process.exit(run(process.argv.slice(2)));
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(1);
}
