/** Character-level diff spans for highlighting field differences. */

export interface DiffSpan {
  text: string;
  changed: boolean;
}

export interface DiffPair {
  /** Spans covering the anchor-side string, in order. */
  a: DiffSpan[];
  /** Spans covering the candidate-side string, in order. */
  b: DiffSpan[];
}

/**
 * Longest-common-subsequence diff between two short strings.
 *
 * Characters on the LCS become unchanged spans on both sides; everything
 * else is marked changed on the side it belongs to. Adjacent spans of the
 * same kind are merged, so identical inputs yield a single unchanged span.
 */
export function charDiff(a: string, b: string): DiffPair {
  const n = a.length;
  const m = b.length;
  // lcs[i][j] = LCS length of a[i..] and b[j..]
  const lcs: number[][] = [];
  for (let i = 0; i <= n; i++) {
    lcs.push(new Array<number>(m + 1).fill(0));
  }
  for (let i = n - 1; i >= 0; i--) {
    const row = lcs[i]!;
    const next = lcs[i + 1]!;
    for (let j = m - 1; j >= 0; j--) {
      row[j] = a[i] === b[j] ? next[j + 1]! + 1 : Math.max(next[j]!, row[j + 1]!);
    }
  }

  const outA: DiffSpan[] = [];
  const outB: DiffSpan[] = [];
  let i = 0;
  let j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] === b[j]) {
      pushSpan(outA, a[i]!, false);
      pushSpan(outB, b[j]!, false);
      i++;
      j++;
    } else if (j < m && (i === n || lcs[i]![j + 1]! >= lcs[i + 1]![j]!)) {
      pushSpan(outB, b[j]!, true);
      j++;
    } else {
      pushSpan(outA, a[i]!, true);
      i++;
    }
  }
  return { a: outA, b: outB };
}

function pushSpan(spans: DiffSpan[], text: string, changed: boolean): void {
  const last = spans[spans.length - 1];
  if (last !== undefined && last.changed === changed) {
    last.text += text;
  } else {
    spans.push({ text, changed });
  }
}

/** Concatenation of a span list back into the original string. */
export function spanText(spans: DiffSpan[]): string {
  return spans.map((s) => s.text).join("");
}
