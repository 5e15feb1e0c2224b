/** Inline-SVG line chart with a mean +/- std band per series. */

import { chartBand } from './run-console.js';
import type { AggregateSeriesDoc } from './types.js';

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e'];

export function chartSvg(seriesList: AggregateSeriesDoc[], width = 560, height = 320): string {
  if (seriesList.length === 0) return '<svg/>';
  const pad = 36;
  const bands = seriesList.map(chartBand);
  const allTicks = bands.flatMap((b) => b.map((p) => p.tick));
  const allValues = bands.flatMap((b) => b.flatMap((p) => [p.low, p.high]));
  const tickMin = Math.min(...allTicks);
  const tickMax = Math.max(...allTicks) || 1;
  let vMin = Math.min(...allValues);
  let vMax = Math.max(...allValues);
  if (vMax === vMin) {
    vMax += 1;
    vMin -= 1;
  }
  const x = (t: number) => pad + ((t - tickMin) / (tickMax - tickMin || 1)) * (width - 2 * pad);
  const y = (v: number) => height - pad - ((v - vMin) / (vMax - vMin)) * (height - 2 * pad);

  const parts: string[] = [];
  bands.forEach((band, i) => {
    const color = COLORS[i % COLORS.length];
    const upper = band.map((p) => `${x(p.tick)},${y(p.high)}`);
    const lower = [...band].reverse().map((p) => `${x(p.tick)},${y(p.low)}`);
    parts.push(
      `<polygon points="${[...upper, ...lower].join(' ')}" fill="${color}" opacity="0.15"/>`,
    );
    const line = band.map((p) => `${x(p.tick)},${y(p.mean)}`).join(' ');
    parts.push(`<polyline points="${line}" fill="none" stroke="${color}" stroke-width="2"/>`);
    parts.push(
      `<text x="${width - pad}" y="${16 + 14 * i}" text-anchor="end" font-size="11" fill="${color}">` +
        `${seriesList[i].scenario_id}</text>`,
    );
  });
  parts.push(
    `<line x1="${pad}" y1="${height - pad}" x2="${width - pad}" y2="${height - pad}" stroke="#888"/>`,
    `<line x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}" stroke="#888"/>`,
    `<text x="${pad}" y="${height - pad + 16}" font-size="11">${tickMin}</text>`,
    `<text x="${width - pad}" y="${height - pad + 16}" text-anchor="end" font-size="11">${tickMax}</text>`,
    `<text x="${pad - 4}" y="${y(vMin)}" text-anchor="end" font-size="11">${vMin.toFixed(1)}</text>`,
    `<text x="${pad - 4}" y="${y(vMax)}" text-anchor="end" font-size="11">${vMax.toFixed(1)}</text>`,
  );
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">${parts.join('')}</svg>`;
}
