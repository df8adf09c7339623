/**
 * Small deterministic rule-based POS tagger emitting Penn-style tags.
 *
 * Closed classes come from a lexicon; open-class words fall through
 * suffix heuristics and default to NN. The engine treats whatever
 * tagset arrives verbatim, so the contract here is determinism and a
 * one-tag-per-token alignment, not linguistic perfection.
 */

const LEXICON: Record<string, string> = {
  // determiners
  the: "DT", a: "DT", an: "DT", this: "DT", that: "DT", these: "DT",
  those: "DT", each: "DT", every: "DT", some: "DT", any: "DT", no: "DT",
  // prepositions / subordinators
  in: "IN", on: "IN", at: "IN", by: "IN", for: "IN", with: "IN",
  from: "IN", into: "IN", of: "IN", over: "IN", under: "IN", about: "IN",
  after: "IN", before: "IN", between: "IN", through: "IN", if: "IN",
  while: "IN", because: "IN",
  // conjunctions
  and: "CC", or: "CC", but: "CC", nor: "CC", yet: "CC", so: "CC",
  // pronouns
  i: "PRP", you: "PRP", he: "PRP", she: "PRP", it: "PRP", we: "PRP",
  they: "PRP", me: "PRP", him: "PRP", her: "PRP", us: "PRP", them: "PRP",
  my: "PRP$", your: "PRP$", his: "PRP$", its: "PRP$", our: "PRP$",
  their: "PRP$",
  // modals and auxiliaries
  will: "MD", would: "MD", can: "MD", could: "MD", may: "MD",
  might: "MD", shall: "MD", should: "MD", must: "MD",
  be: "VB", is: "VBZ", are: "VBP", was: "VBD", were: "VBD", been: "VBN",
  being: "VBG", am: "VBP",
  have: "VBP", has: "VBZ", had: "VBD",
  do: "VBP", does: "VBZ", did: "VBD",
  // adverbs that escape the -ly rule
  not: "RB", very: "RB", too: "RB", also: "RB", just: "RB", never: "RB",
  always: "RB", often: "RB", here: "RB", there: "RB", now: "RB",
  then: "RB", when: "WRB", where: "WRB", how: "WRB", why: "WRB",
  // wh-words
  who: "WP", what: "WP", which: "WDT",
  to: "TO",
};

const COMMON_VERBS = new Set([
  "go", "goes", "went", "make", "makes", "made", "get", "gets", "got",
  "take", "takes", "took", "see", "sees", "saw", "say", "says", "said",
  "run", "runs", "ran", "win", "wins", "won", "give", "gives", "gave",
  "come", "comes", "came", "know", "knows", "knew", "think", "thinks",
  "use", "uses", "used", "find", "finds", "found", "want", "wants",
  "work", "works", "play", "plays", "move", "moves", "fail", "fails",
  "grow", "grows", "grew", "rise", "rises", "rose", "fall", "falls",
  "fell",
]);

export function tagToken(token: string): string {
  const fromLexicon = LEXICON[token];
  if (fromLexicon !== undefined) return fromLexicon;
  if (/^[0-9]+$/.test(token) || /^[0-9]+(?:st|nd|rd|th)$/.test(token)) {
    return "CD";
  }
  if (COMMON_VERBS.has(token)) {
    return token.endsWith("s") ? "VBZ" : "VB";
  }
  if (token.endsWith("ly") && token.length > 3) return "RB";
  if (token.endsWith("ing") && token.length > 4) return "VBG";
  if (token.endsWith("ed") && token.length > 3) return "VBD";
  if (/(?:ous|ful|ive|able|ible|al|ic)$/.test(token) && token.length > 4) {
    return "JJ";
  }
  if (token.endsWith("s") && !token.endsWith("ss") && token.length > 3) {
    return "NNS";
  }
  return "NN";
}

export function tagTokens(tokens: string[]): string[] {
  return tokens.map(tagToken);
}
