/** Pure display formatting. Probabilities render to three decimals; deltas
 * carry an explicit sign except for zero, which is always "0.000" (never
 * "-0.000"). */

export function formatProbability(p: number): string {
  return p.toFixed(3);
}

export function formatDelta(delta: number): string {
  const text = Math.abs(delta).toFixed(3);
  if (text === "0.000") return "0.000";
  return delta > 0 ? `+${text}` : `-${text}`;
}

export function formatDegree(degree: number): string {
  return degree.toFixed(2);
}

export function formatWeight(weight: number): string {
  return weight.toFixed(3);
}

/** Threshold rule used everywhere: probability at or above the threshold
 * takes the positive label. Matches the server's tie handling. */
export function labelFor(probability: number, threshold: number): 0 | 1 {
  return probability >= threshold ? 1 : 0;
}

export function percent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}
