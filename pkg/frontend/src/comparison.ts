/** View model for the pre-run scenario comparison table. */

import type { ComparisonTableDoc } from './types.js';

export interface ComparisonViewRow {
  facet: string;
  name: string;
  cells: string[];
  highlighted: boolean;
}

/** Rows in API order; highlighted iff the API flagged them as differing. */
export function comparisonRows(table: ComparisonTableDoc): ComparisonViewRow[] {
  return table.rows.map((r) => ({
    facet: r.facet,
    name: r.name,
    cells: [...r.cells],
    highlighted: r.differs,
  }));
}

export function highlightedNames(table: ComparisonTableDoc): string[] {
  return table.rows.filter((r) => r.differs).map((r) => `${r.facet}:${r.name}`);
}

export function renderComparisonHtml(table: ComparisonTableDoc): string {
  const head = ['facet', 'name', ...table.columns]
    .map((c) => `<th>${escapeHtml(c)}</th>`)
    .join('');
  const body = comparisonRows(table)
    .map((row) => {
      const cls = row.highlighted ? ' class="differs"' : '';
      const cells = [row.facet, row.name, ...row.cells]
        .map((c) => `<td>${escapeHtml(c)}</td>`)
        .join('');
      return `<tr${cls}>${cells}</tr>`;
    })
    .join('');
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
