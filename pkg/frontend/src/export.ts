/** CSV export of the distribution panel, mirroring the API payload. */

import { CATEGORIES, type DistributionResponse } from "./types.js";

export function distributionCsv(dist: DistributionResponse): string {
  const lines = ["category,proportion"];
  for (const category of CATEGORIES) {
    lines.push(`${category},${dist.proportions[category] ?? 0}`);
  }
  return lines.join("\n") + "\n";
}

/** Inverse of distributionCsv over the proportions it carries. */
export function parseDistributionCsv(
  csv: string,
): Record<string, number> {
  const out: Record<string, number> = {};
  for (const line of csv.trim().split("\n").slice(1)) {
    const [category, value] = line.split(",");
    out[category] = Number(value);
  }
  return out;
}
