/**
 * Run console logic: the tick slider, the mean +/- std chart band and the
 * choropleth color scale. All state comes from the HTTP API, so a page
 * refresh loses nothing.
 */

import type { AggregateSeriesDoc, ChoroplethFrameDoc, JobStatusDoc } from './types.js';

/** Slider positions are exactly the job's sampled ticks, nothing else. */
export function sliderTicks(status: JobStatusDoc): number[] {
  return [...status.sample_ticks];
}

export function progressFraction(status: JobStatusDoc): number {
  const { completed_runs, total_runs } = status.progress;
  return total_runs === 0 ? 0 : completed_runs / total_runs;
}

export interface BandPoint {
  tick: number;
  mean: number;
  low: number;
  high: number;
}

/** Chart band: mean with +/- 1 std; zero std gives a zero-width band. */
export function chartBand(series: AggregateSeriesDoc): BandPoint[] {
  return series.ticks.map((tick, i) => ({
    tick,
    mean: series.mean[i],
    low: series.mean[i] - series.std[i],
    high: series.mean[i] + series.std[i],
  }));
}

/** Legend range of a choropleth frame is [min, max] of displayed values. */
export function legendRange(frame: ChoroplethFrameDoc): [number, number] {
  const values = Object.values(frame.values);
  if (values.length === 0) return [0, 0];
  return [Math.min(...values), Math.max(...values)];
}

/** Map a value to a color on the frame's legend range (blue -> yellow). */
export function choroplethColor(frame: ChoroplethFrameDoc, value: number): string {
  const [lo, hi] = legendRange(frame);
  const t = hi === lo ? 0 : Math.min(1, Math.max(0, (value - lo) / (hi - lo)));
  const r = Math.round(40 + 215 * t);
  const g = Math.round(60 + 170 * t);
  const b = Math.round(150 - 120 * t);
  return `rgb(${r},${g},${b})`;
}

/** Poll a job until it leaves the queued/running states. */
export async function pollUntilDone(
  fetchStatus: () => Promise<JobStatusDoc>,
  intervalMs = 500,
  onUpdate?: (status: JobStatusDoc) => void,
): Promise<JobStatusDoc> {
  for (;;) {
    const status = await fetchStatus();
    onUpdate?.(status);
    if (status.state === 'completed' || status.state === 'failed') {
      return status;
    }
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
