/** Lowercasing word tokenizer shared by text processing and entity lookup. */

const WORD = /[a-z0-9]+(?:'[a-z]+)?/g;

export function tokenize(text: string): string[] {
  const matches = text.toLowerCase().match(WORD);
  return matches ? Array.from(matches) : [];
}
