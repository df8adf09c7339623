import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { annotate, documentToJson, writeOutputs } from "../src/pipeline";

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "annotate-test-"));
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function writeInputs(opts?: { rows?: string[]; dict?: string; emb?: string }) {
  const rows = opts?.rows ?? [
    "The market rises fast\tfinance",
    "Acme Corp wins the deal\tfinance",
    "Team plays the final game\tsports",
    "Blue River team wins again\tsports",
    "Prices fall at the market\tfinance",
    "The coach praises the team\tsports",
  ];
  const input = path.join(dir, "raw.tsv");
  fs.writeFileSync(input, rows.join("\n") + "\n");
  const dict = path.join(dir, "dict.tsv");
  fs.writeFileSync(
    dict,
    opts?.dict ?? "Acme Corp\te:acme\nBlue River\te:blue_river\n",
  );
  const emb = path.join(dir, "emb.txt");
  fs.writeFileSync(
    emb,
    opts?.emb ?? "e:acme 1.0 0.0 0.5\ne:blue_river 0.0 1.0 -0.5\n",
  );
  return { input, dict, emb };
}

function spec(paths: { input: string; dict: string; emb: string },
              labeledPerClass = 2, seed = 3) {
  return {
    inputPath: paths.input,
    entityDictPath: paths.dict,
    entityEmbeddingPath: paths.emb,
    labeledPerClass,
    seed,
  };
}

describe("annotate", () => {
  it("produces schema-shaped documents with aligned tags", () => {
    const result = annotate(spec(writeInputs()));
    expect(result.documents).toHaveLength(6);
    for (const d of result.documents) {
      expect(d.tags).toHaveLength(d.tokens.length);
      expect(["train", "val", "test"]).toContain(d.split);
      expect(d.tokens.every((t) => t === t.toLowerCase())).toBe(true);
    }
    const parsed = result.documents.map((d) => JSON.parse(documentToJson(d)));
    for (const p of parsed) {
      expect(Object.keys(p)).toEqual(
        ["id", "tokens", "tags", "entities", "label", "split"]);
    }
  });

  it("links entities through the dictionary", () => {
    const result = annotate(spec(writeInputs()));
    const acme = result.documents.find((d) => d.tokens.includes("acme"))!;
    expect(acme.entities).toEqual(["e:acme"]);
    const blue = result.documents.find((d) => d.tokens.includes("blue"))!;
    expect(blue.entities).toEqual(["e:blue_river"]);
  });

  it("splits labeled-per-class docs half train half val, rest test", () => {
    const result = annotate(spec(writeInputs(), 2));
    expect(result.stats.splits).toEqual({ train: 2, val: 2, test: 2 });
    for (const label of ["finance", "sports"]) {
      const members = result.documents.filter((d) => d.label === label);
      expect(members.filter((d) => d.split === "train")).toHaveLength(1);
      expect(members.filter((d) => d.split === "val")).toHaveLength(1);
    }
  });

  it("handles the two-doc one-class boundary case", () => {
    const paths = writeInputs({
      rows: ["alpha beta\tonly", "gamma delta\tonly"],
    });
    const result = annotate(spec(paths, 2));
    expect(result.stats.splits).toEqual({ train: 1, val: 1, test: 0 });
  });

  it("rejects labeled-per-class above the class population", () => {
    expect(() => annotate(spec(writeInputs(), 10))).toThrow(/fewer than/);
  });

  it("rejects dictionary ids missing from the embedding file", () => {
    const paths = writeInputs({ emb: "e:acme 1.0 0.0 0.5\n" });
    expect(() => annotate(spec(paths))).toThrow(/e:blue_river/);
  });

  it("treats an unlinkable corpus as a warning, not an error", () => {
    const paths = writeInputs({
      rows: ["plain words here\tx", "more plain words\tx"],
    });
    const result = annotate(spec(paths, 2));
    expect(result.stats.num_entities).toBe(0);
    expect(result.warnings.some((w) => w.includes("entity view"))).toBe(true);
  });

  it("skips token-free lines with a warning", () => {
    const paths = writeInputs({
      rows: ["???\tx", "real words\tx", "more words\tx"],
    });
    const result = annotate(spec(paths, 2));
    expect(result.documents).toHaveLength(2);
    expect(result.warnings.some((w) => w.includes("line 1"))).toBe(true);
  });

  it("computes stats that describe the emitted documents", () => {
    const result = annotate(spec(writeInputs()));
    const words = new Set(result.documents.flatMap((d) => d.tokens));
    const tags = new Set(result.documents.flatMap((d) => d.tags));
    const ents = new Set(result.documents.flatMap((d) => d.entities));
    expect(result.stats.num_docs).toBe(6);
    expect(result.stats.num_words).toBe(words.size);
    expect(result.stats.num_tags).toBe(tags.size);
    expect(result.stats.num_entities).toBe(ents.size);
    expect(result.stats.num_classes).toBe(2);
    const total = result.documents.reduce((acc, d) => acc + d.tokens.length, 0);
    expect(result.stats.avg_length).toBeCloseTo(total / 6, 12);
  });
});

describe("outputs", () => {
  it("same seed reproduces byte-identical files; new seed differs", () => {
    const paths = writeInputs();
    const a = path.join(dir, "a");
    const b = path.join(dir, "b");
    const c = path.join(dir, "c");
    writeOutputs(a, annotate(spec(paths, 2, 5)));
    writeOutputs(b, annotate(spec(paths, 2, 5)));
    writeOutputs(c, annotate(spec(paths, 2, 6)));
    const read = (p: string) => fs.readFileSync(path.join(p, "corpus.jsonl"));
    expect(read(a).equals(read(b))).toBe(true);
    expect(read(a).equals(read(c))).toBe(false);
    expect(fs.readFileSync(path.join(a, "stats.json"), "utf-8"))
      .toBe(fs.readFileSync(path.join(b, "stats.json"), "utf-8"));
  });

  it("filters entity embeddings to linked ids, echoing original lines", () => {
    const paths = writeInputs();
    const out = path.join(dir, "out");
    writeOutputs(out, annotate(spec(paths)));
    const lines = fs
      .readFileSync(path.join(out, "entity_embeddings.txt"), "utf-8")
      .trim()
      .split("\n");
    expect(lines).toEqual([
      "e:acme 1.0 0.0 0.5",
      "e:blue_river 0.0 1.0 -0.5",
    ]);
  });

  it("passes word embeddings through filtered to the vocabulary", () => {
    const paths = writeInputs();
    const wordEmb = path.join(dir, "words.txt");
    fs.writeFileSync(wordEmb, "market 1.0 2.0\nunused 0.0 0.0\nteam 3.0 4.0\n");
    const out = path.join(dir, "out");
    writeOutputs(out, annotate(spec(paths)), wordEmb);
    const lines = fs
      .readFileSync(path.join(out, "word_embeddings.txt"), "utf-8")
      .trim()
      .split("\n");
    expect(lines).toEqual(["market 1.0 2.0", "team 3.0 4.0"]);
  });
});
