/** Optional difference highlighting between the two panes; off by default
 * so the reviewer is not nudged toward surface differences. */

export interface Segment {
  text: string;
  unique: boolean;
}

function words(text: string): Set<string> {
  return new Set(
    text
      .toLowerCase()
      .split(/[^0-9a-z]+/)
      .filter((w) => w.length > 0),
  );
}

/** Split `text` into segments, marking words the other note never uses. */
export function highlightUnique(text: string, other: string): Segment[] {
  const otherWords = words(other);
  const segments: Segment[] = [];
  const parts = text.split(/(\s+)/);
  for (const part of parts) {
    if (part === "") continue;
    const token = part.toLowerCase().replace(/[^0-9a-z]/g, "");
    const unique = token.length > 0 && !otherWords.has(token);
    const last = segments[segments.length - 1];
    if (last && last.unique === unique) {
      last.text += part;
    } else {
      segments.push({ text: part, unique });
    }
  }
  return segments;
}
