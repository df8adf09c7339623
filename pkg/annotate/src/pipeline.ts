/**
 * The annotation pipeline: raw "text<TAB>label" lines in, engine-ready
 * JSONL corpus plus filtered embedding files and a stats report out.
 */

import * as fs from "fs";
import * as path from "path";

import { EntityDictionary, buildDictionary, linkEntities } from "./link";
import { mulberry32, shuffle } from "./rng";
import { tagTokens } from "./tagger";
import { tokenize } from "./tokenize";

export interface RawDatasetSpec {
  inputPath: string;
  entityDictPath: string;
  entityEmbeddingPath: string;
  wordEmbeddingPath?: string;
  labeledPerClass: number; // split half train, half val
  seed: number;
}

export interface AnnotatedDoc {
  id: string;
  tokens: string[];
  tags: string[];
  entities: string[];
  label: string;
  split: "train" | "val" | "test";
}

export interface StatsReport {
  num_docs: number;
  num_words: number;
  num_entities: number;
  num_tags: number;
  avg_length: number;
  num_classes: number;
  splits: { train: number; val: number; test: number };
  linked_mentions: number;
}

export interface AnnotationResult {
  documents: AnnotatedDoc[];
  stats: StatsReport;
  warnings: string[];
  /** entity id -> original embedding line (echoed verbatim on output) */
  entityEmbeddingLines: Map<string, string>;
}

export function readRawLines(inputPath: string): Array<{ text: string; label: string }> {
  const rows: Array<{ text: string; label: string }> = [];
  const content = fs.readFileSync(inputPath, "utf-8");
  content.split(/\r?\n/).forEach((line, idx) => {
    if (!line.trim()) return;
    const tab = line.lastIndexOf("\t");
    if (tab <= 0 || tab === line.length - 1) {
      throw new Error(`${inputPath}:${idx + 1}: expected "text<TAB>label"`);
    }
    rows.push({ text: line.slice(0, tab), label: line.slice(tab + 1).trim() });
  });
  if (rows.length === 0) throw new Error(`${inputPath}: no documents`);
  return rows;
}

export function readEntityDict(dictPath: string): Array<[string, string]> {
  const entries: Array<[string, string]> = [];
  const content = fs.readFileSync(dictPath, "utf-8");
  content.split(/\r?\n/).forEach((line, idx) => {
    if (!line.trim()) return;
    const tab = line.indexOf("\t");
    if (tab <= 0 || tab === line.length - 1) {
      throw new Error(`${dictPath}:${idx + 1}: expected "surface<TAB>entity_id"`);
    }
    entries.push([line.slice(0, tab), line.slice(tab + 1).trim()]);
  });
  return entries;
}

/** Parse an embedding file into id -> original line (keeps formatting). */
export function readEmbeddingLines(embPath: string): Map<string, string> {
  const lines = new Map<string, string>();
  const content = fs.readFileSync(embPath, "utf-8");
  content.split(/\r?\n/).forEach((line) => {
    if (!line.trim()) return;
    const space = line.indexOf(" ");
    if (space <= 0) throw new Error(`${embPath}: malformed embedding line`);
    lines.set(line.slice(0, space), line);
  });
  return lines;
}

function assignSplits(
  labels: string[],
  labeledPerClass: number,
  seed: number,
): Array<"train" | "val" | "test"> {
  const byClass = new Map<string, number[]>();
  labels.forEach((label, i) => {
    const members = byClass.get(label);
    if (members) members.push(i);
    else byClass.set(label, [i]);
  });
  const splits: Array<"train" | "val" | "test"> = labels.map(() => "test");
  const rand = mulberry32(seed);
  for (const label of Array.from(byClass.keys()).sort()) {
    const members = byClass.get(label)!;
    if (members.length < labeledPerClass) {
      throw new Error(
        `class ${JSON.stringify(label)} has ${members.length} documents, ` +
          `fewer than labeled-per-class ${labeledPerClass}`,
      );
    }
    const order = shuffle(members.slice(), rand);
    const nTrain = Math.floor(labeledPerClass / 2);
    order.slice(0, nTrain).forEach((i) => (splits[i] = "train"));
    order.slice(nTrain, labeledPerClass).forEach((i) => (splits[i] = "val"));
  }
  return splits;
}

export function annotate(spec: RawDatasetSpec): AnnotationResult {
  const warnings: string[] = [];
  const rows = readRawLines(spec.inputPath);
  const dictEntries = readEntityDict(spec.entityDictPath);
  const embeddingLines = readEmbeddingLines(spec.entityEmbeddingPath);

  const missing = dictEntries
    .map(([, id]) => id)
    .filter((id) => !embeddingLines.has(id));
  if (missing.length > 0) {
    throw new Error(
      `entity ids without embeddings: ${Array.from(new Set(missing)).sort().join(", ")}`,
    );
  }
  const dict: EntityDictionary = buildDictionary(dictEntries);

  const kept: Array<{ tokens: string[]; tags: string[]; entities: string[]; label: string }> = [];
  for (let i = 0; i < rows.length; i++) {
    const tokens = tokenize(rows[i].text);
    if (tokens.length === 0) {
      warnings.push(`line ${i + 1}: no tokens after tokenization; skipped`);
      continue;
    }
    kept.push({
      tokens,
      tags: tagTokens(tokens),
      entities: linkEntities(tokens, dict),
      label: rows[i].label,
    });
  }
  if (kept.length === 0) throw new Error("every input line tokenized to nothing");

  const splits = assignSplits(
    kept.map((d) => d.label),
    spec.labeledPerClass,
    spec.seed,
  );
  const documents: AnnotatedDoc[] = kept.map((d, i) => ({
    id: `d${i}`,
    tokens: d.tokens,
    tags: d.tags,
    entities: d.entities,
    label: d.label,
    split: splits[i],
  }));

  const words = new Set<string>();
  const tags = new Set<string>();
  const entities = new Set<string>();
  let tokenTotal = 0;
  let mentionTotal = 0;
  for (const d of documents) {
    d.tokens.forEach((t) => words.add(t));
    d.tags.forEach((t) => tags.add(t));
    d.entities.forEach((e) => entities.add(e));
    tokenTotal += d.tokens.length;
    mentionTotal += d.entities.length;
  }
  if (entities.size === 0) {
    warnings.push("no entity mentions linked; the entity view will be empty");
  }
  const stats: StatsReport = {
    num_docs: documents.length,
    num_words: words.size,
    num_entities: entities.size,
    num_tags: tags.size,
    avg_length: tokenTotal / documents.length,
    num_classes: new Set(documents.map((d) => d.label)).size,
    splits: {
      train: documents.filter((d) => d.split === "train").length,
      val: documents.filter((d) => d.split === "val").length,
      test: documents.filter((d) => d.split === "test").length,
    },
    linked_mentions: mentionTotal,
  };
  return { documents, stats, warnings, entityEmbeddingLines: embeddingLines };
}

/** Serialize one document with a fixed key order (byte-stable output). */
export function documentToJson(d: AnnotatedDoc): string {
  return JSON.stringify({
    id: d.id,
    tokens: d.tokens,
    tags: d.tags,
    entities: d.entities,
    label: d.label,
    split: d.split,
  });
}

export function writeOutputs(
  outDir: string,
  result: AnnotationResult,
  wordEmbeddingPath?: string,
): string[] {
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];

  const corpusPath = path.join(outDir, "corpus.jsonl");
  fs.writeFileSync(
    corpusPath,
    result.documents.map(documentToJson).join("\n") + "\n",
  );
  written.push(corpusPath);

  const linked = new Set<string>();
  result.documents.forEach((d) => d.entities.forEach((e) => linked.add(e)));
  const embPath = path.join(outDir, "entity_embeddings.txt");
  const embLines = Array.from(linked)
    .sort()
    .map((id) => result.entityEmbeddingLines.get(id)!);
  fs.writeFileSync(embPath, embLines.length ? embLines.join("\n") + "\n" : "");
  written.push(embPath);

  if (wordEmbeddingPath) {
    const vocab = new Set<string>();
    result.documents.forEach((d) => d.tokens.forEach((t) => vocab.add(t)));
    const wordLines = readEmbeddingLines(wordEmbeddingPath);
    const keptLines = Array.from(vocab)
      .sort()
      .filter((t) => wordLines.has(t))
      .map((t) => wordLines.get(t)!);
    const wordOut = path.join(outDir, "word_embeddings.txt");
    fs.writeFileSync(wordOut, keptLines.length ? keptLines.join("\n") + "\n" : "");
    written.push(wordOut);
  }

  const statsPath = path.join(outDir, "stats.json");
  fs.writeFileSync(statsPath, JSON.stringify(result.stats, null, 2) + "\n");
  written.push(statsPath);
  return written;
}
