import { describe, expect, it } from 'vitest';

import { comparisonRows, highlightedNames, renderComparisonHtml } from '../src/comparison.js';
import type { ComparisonTableDoc } from '../src/types.js';
import { makeRng } from './helpers.js';

const TABLE: ComparisonTableDoc = {
  columns: ['baseline', 'jobseeker'],
  rows: [
    { facet: 'parameter', name: 'benefit', cells: ['6.0', '6.0'], differs: false },
    { facet: 'policy', name: 'Jobseeker Policy', cells: ['—', '0c/1a#ab12cd34'], differs: true },
    { facet: 'flow', name: 'migrant', cells: ['f1f1f1f1', 'f1f1f1f1'], differs: false },
  ],
};

describe('comparison view highlighting', () => {
  it('highlights exactly the rows the API flags as differing', () => {
    const rows = comparisonRows(TABLE);
    expect(rows.map((r) => r.highlighted)).toEqual(TABLE.rows.map((r) => r.differs));
    expect(highlightedNames(TABLE)).toEqual(['policy:Jobseeker Policy']);
  });

  it('holds for arbitrary differs patterns', () => {
    const rng = makeRng(99);
    for (let trial = 0; trial < 50; trial += 1) {
      const rows = Array.from({ length: 1 + Math.floor(rng() * 8) }, (_, i) => ({
        facet: 'parameter' as const,
        name: `p${i}`,
        cells: ['a', 'b'],
        differs: rng() < 0.5,
      }));
      const table: ComparisonTableDoc = { columns: ['s1', 's2'], rows };
      const highlighted = new Set(highlightedNames(table));
      for (const row of rows) {
        expect(highlighted.has(`parameter:${row.name}`)).toBe(row.differs);
      }
      const html = renderComparisonHtml(table);
      const marked = (html.match(/<tr class="differs">/g) ?? []).length;
      expect(marked).toBe(rows.filter((r) => r.differs).length);
    }
  });

  it('renders one table row per API row plus a header, escaping markup', () => {
    const html = renderComparisonHtml(TABLE);
    expect((html.match(/<tr/g) ?? []).length).toBe(TABLE.rows.length + 1);
    expect(html).toContain('<td>—</td>');
    const hostile: ComparisonTableDoc = {
      columns: ['<script>'],
      rows: [{ facet: 'parameter', name: 'x', cells: ['<b>'], differs: false }],
    };
    const escaped = renderComparisonHtml(hostile);
    expect(escaped).not.toContain('<script>');
    expect(escaped).toContain('&lt;script&gt;');
  });
});
