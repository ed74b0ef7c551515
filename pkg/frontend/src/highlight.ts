/** Entity highlighting: locate query terms inside passage text. */

export interface Span {
  start: number;
  end: number;
}

/**
 * Non-overlapping, case-insensitive occurrences of the terms in text,
 * longest term first at each position. Every returned span lies within
 * [0, text.length].
 */
export function findTermSpans(text: string, terms: string[]): Span[] {
  const lower = text.toLowerCase();
  const needles = terms
    .map((t) => t.toLowerCase())
    .filter((t) => t.length > 0)
    .sort((a, b) => b.length - a.length);
  const spans: Span[] = [];
  let i = 0;
  while (i < lower.length) {
    let matched: string | null = null;
    for (const needle of needles) {
      if (lower.startsWith(needle, i)) {
        matched = needle;
        break;
      }
    }
    if (matched) {
      spans.push({ start: i, end: i + matched.length });
      i += matched.length;
    } else {
      i += 1;
    }
  }
  return spans;
}

/** Text interleaved with <mark> elements for the given spans. */
export function highlightedFragment(text: string, spans: Span[]): DocumentFragment {
  const fragment = document.createDocumentFragment();
  let cursor = 0;
  for (const span of spans) {
    if (span.start > cursor) {
      fragment.append(document.createTextNode(text.slice(cursor, span.start)));
    }
    const mark = document.createElement("mark");
    mark.textContent = text.slice(span.start, span.end);
    fragment.append(mark);
    cursor = span.end;
  }
  if (cursor < text.length) {
    fragment.append(document.createTextNode(text.slice(cursor)));
  }
  return fragment;
}
