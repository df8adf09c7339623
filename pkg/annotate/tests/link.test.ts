import { describe, expect, it } from "vitest";

import { buildDictionary, linkEntities } from "../src/link";

const dict = buildDictionary([
  ["Blue River", "e:blue_river"],
  ["river", "e:river"],
  ["Acme Corp", "e:acme"],
  ["acme corp limited", "e:acme_ltd"],
]);

describe("entity linking", () => {
  it("prefers the longest span at each position", () => {
    expect(linkEntities(["blue", "river"], dict)).toEqual(["e:blue_river"]);
    expect(linkEntities(["the", "river", "bend"], dict)).toEqual(["e:river"]);
  });

  it("takes the longest match even when a shorter one also applies", () => {
    expect(linkEntities(["acme", "corp", "limited"], dict)).toEqual(["e:acme_ltd"]);
    expect(linkEntities(["acme", "corp", "rises"], dict)).toEqual(["e:acme"]);
  });

  it("does not rescan consumed tokens", () => {
    // "blue river" consumes "river", so e:river is not also emitted
    expect(linkEntities(["blue", "river", "river"], dict)).toEqual([
      "e:blue_river",
      "e:river",
    ]);
  });

  it("records repeated mentions", () => {
    expect(linkEntities(["river", "and", "river"], dict)).toEqual([
      "e:river",
      "e:river",
    ]);
  });

  it("returns empty when nothing matches", () => {
    expect(linkEntities(["nothing", "here"], dict)).toEqual([]);
  });

  it("matches dictionary surfaces case- and punctuation-insensitively", () => {
    const d = buildDictionary([["  Signal--Labs ", "e:signal"]]);
    expect(linkEntities(["signal", "labs"], d)).toEqual(["e:signal"]);
  });
});
