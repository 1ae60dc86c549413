/** Byte-exact extraction of the "payload" value from one raw SSE data line.
 *
 * The intent card must show the payload exactly as the gateway emitted it, so
 * the slice is taken from the raw text instead of a parse/re-stringify round
 * trip (which could reorder or reformat).
 */

function skipString(text: string, start: number): number {
  // start points at the opening quote; returns the index just past the close.
  let i = start + 1;
  while (i < text.length) {
    if (text[i] === "\\") i += 2;
    else if (text[i] === '"') return i + 1;
    else i++;
  }
  return i;
}

function sliceJsonValue(text: string, start: number): string | null {
  const first = text[start];
  if (first === '"') return text.slice(start, skipString(text, start));
  if (first === "{" || first === "[") {
    let depth = 0;
    let i = start;
    while (i < text.length) {
      const ch = text[i];
      if (ch === '"') {
        i = skipString(text, i);
        continue;
      }
      if (ch === "{" || ch === "[") depth++;
      else if (ch === "}" || ch === "]") {
        depth--;
        if (depth === 0) return text.slice(start, i + 1);
      }
      i++;
    }
    return null;
  }
  const match = /^(?:true|false|null|-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)/.exec(text.slice(start));
  return match ? match[0] : null;
}

export function extractRawPayload(rawEvent: string): string | null {
  let i = rawEvent.indexOf("{");
  if (i === -1) return null;
  let depth = 0;
  while (i < rawEvent.length) {
    const ch = rawEvent[i];
    if (ch === '"') {
      const stringStart = i;
      i = skipString(rawEvent, i);
      if (depth === 1 && rawEvent.slice(stringStart, i) === '"payload"') {
        let j = i;
        while (j < rawEvent.length && /\s/.test(rawEvent[j])) j++;
        if (rawEvent[j] === ":") {
          j++;
          while (j < rawEvent.length && /\s/.test(rawEvent[j])) j++;
          return sliceJsonValue(rawEvent, j);
        }
      }
      continue;
    }
    if (ch === "{" || ch === "[") depth++;
    else if (ch === "}" || ch === "]") depth--;
    i++;
  }
  return null;
}
