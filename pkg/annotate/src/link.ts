/**
 * Dictionary-based entity linking: greedy longest match over token spans.
 *
 * Surface forms are tokenized with the same tokenizer as document text,
 * so "Blue River" in a dictionary matches the token span ["blue",
 * "river"] regardless of casing or punctuation in the raw text.
 */

import { tokenize } from "./tokenize";

export interface EntityDictionary {
  /** joined token span -> entity id */
  spans: Map<string, string>;
  maxSpan: number;
}

export function buildDictionary(entries: Array<[string, string]>): EntityDictionary {
  const spans = new Map<string, string>();
  let maxSpan = 0;
  for (const [surface, id] of entries) {
    const tokens = tokenize(surface);
    if (tokens.length === 0) continue;
    spans.set(tokens.join(" "), id);
    maxSpan = Math.max(maxSpan, tokens.length);
  }
  return { spans, maxSpan };
}

/** Entity ids mentioned in the token sequence, in match order. */
export function linkEntities(tokens: string[], dict: EntityDictionary): string[] {
  const found: string[] = [];
  let i = 0;
  while (i < tokens.length) {
    let matched = 0;
    for (let span = Math.min(dict.maxSpan, tokens.length - i); span >= 1; span--) {
      const key = tokens.slice(i, i + span).join(" ");
      const id = dict.spans.get(key);
      if (id !== undefined) {
        found.push(id);
        matched = span;
        break;
      }
    }
    i += matched > 0 ? matched : 1;
  }
  return found;
}
