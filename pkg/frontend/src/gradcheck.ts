import { ConstraintLoss } from "./autograd.js";
import { NdArray, batchDims, ndarray, ones } from "./tensor.js";

/** Deterministic 32-bit PRNG; good enough to reproduce test instances. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 15), z | 1);
    z ^= z + Math.imul(z ^ (z >>> 7), z | 61);
    return ((z ^ (z >>> 14)) >>> 0) / 4294967296;
  };
}

export interface GradCheckReport {
  passed: boolean;
  checked: number;
  maxAbsErr: number;
  maxRelErr: number;
  worstIndex: number;
}

/**
 * Central finite differences of the batch-summed loss against backward
 * with an all-ones upstream. An element passes when
 * |analytic - numeric| <= max(absFloor, tolerance * |numeric|).
 */
export async function gradientCheck(
  fn: ConstraintLoss,
  trace: NdArray,
  t: number,
  tolerance = 1e-4,
  absFloor = 1e-8,
): Promise<GradCheckReport> {
  const upstream = ones(batchDims(trace.dims));
  const analytic = await fn.backward(trace, t, upstream);

  const summed = async (perturbed: Float64Array): Promise<number> => {
    const value = await fn.forward(ndarray(trace.dims, perturbed), t);
    let total = 0;
    for (const v of value.data) {
      total += v;
    }
    return total;
  };

  let passed = true;
  let maxAbsErr = 0;
  let maxRelErr = 0;
  let worstIndex = 0;
  let worstScore = -1;
  for (let i = 0; i < trace.data.length; i++) {
    const h = Math.max(1e-6, 1e-6 * Math.abs(trace.data[i]));
    const bumped = Float64Array.from(trace.data);
    bumped[i] = trace.data[i] + h;
    const above = await summed(bumped);
    bumped[i] = trace.data[i] - h;
    const below = await summed(bumped);
    const numeric = (above - below) / (2 * h);

    const err = Math.abs(analytic.data[i] - numeric);
    const score = err / Math.max(absFloor, tolerance * Math.abs(numeric));
    if (score > worstScore) {
      worstScore = score;
      worstIndex = i;
    }
    if (score > 1) {
      passed = false;
    }
    maxAbsErr = Math.max(maxAbsErr, err);
    maxRelErr = Math.max(maxRelErr, err / Math.max(Math.abs(numeric), absFloor));
  }
  return { passed, checked: trace.data.length, maxAbsErr, maxRelErr, worstIndex };
}
