/** Score-table view model: a pure function of the last server response. */

import type { Scores } from "./api.js";

export interface TableRow {
  rank: number;
  classId: number;
  label: string;
  probability: number;
  percent: string;
}

/** Rows in exactly the order the server sent them (already sorted). */
export function scoreRows(scores: Scores): TableRow[] {
  return scores.topk.map((row, i) => ({
    rank: i + 1,
    classId: row.class_id,
    label: row.label,
    probability: row.probability,
    percent: `${(row.probability * 100).toFixed(1)}%`,
  }));
}
