/** SVG choropleth of the region polygons colored by a frame's values. */

import type { GeoJSON } from './api.js';
import { choroplethColor, legendRange } from './run-console.js';
import type { ChoroplethFrameDoc } from './types.js';

export function choroplethSvg(geo: GeoJSON, frame: ChoroplethFrameDoc, size = 420): string {
  const points = geo.features.flatMap((f) => f.geometry.coordinates[0]);
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const minX = Math.min(...xs);
  const minY = Math.min(...ys);
  const scale = size / Math.max(Math.max(...xs) - minX, Math.max(...ys) - minY || 1);

  const polygons = geo.features
    .map((f) => {
      const rid = f.properties.region_id;
      const value = frame.values[rid] ?? 0;
      const path = f.geometry.coordinates[0]
        .map((p) => `${((p[0] - minX) * scale).toFixed(1)},${((p[1] - minY) * scale).toFixed(1)}`)
        .join(' ');
      const title = `${rid}: ${value}`;
      return `<polygon points="${path}" fill="${choroplethColor(frame, value)}" stroke="#333"><title>${title}</title></polygon>`;
    })
    .join('');
  const [lo, hi] = legendRange(frame);
  const legend = `<text x="4" y="${size + 16}" font-size="12">${frame.reporter} @ tick ${frame.tick}: ${lo} – ${hi}</text>`;
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${size}" height="${size + 24}" viewBox="0 0 ${size} ${size + 24}">${polygons}${legend}</svg>`;
}
