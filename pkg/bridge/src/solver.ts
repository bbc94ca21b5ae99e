/**
 * Local fallback solvers so the bridge works with no annealer account.
 *
 * Problems with at most 20 variables are solved exactly by enumeration,
 * breaking energy ties toward the lexicographically smallest bit string
 * (read in ascending node order). Larger problems get best-of-k simulated
 * annealing seeded from the request bytes, so identical requests always
 * produce identical responses.
 */

import type { Problem } from './protocol.js';
import { weightKey } from './protocol.js';

export const EXHAUSTIVE_LIMIT = 20;

interface Dense {
  n: number;
  /** Upper-triangular coefficients, q[i*n + j] for i <= j. */
  q: Float64Array;
}

function toDense(problem: Problem): Dense {
  const n = problem.nodes.length;
  const index = new Map<number, number>();
  problem.nodes.forEach((node, i) => index.set(node, i));
  const q = new Float64Array(n * n);
  for (const [key, value] of problem.weights) {
    const [row, col] = key.split(',').map(Number) as [number, number];
    const i = index.get(row)!;
    const j = index.get(col)!;
    q[Math.min(i, j) * n + Math.max(i, j)] = value;
  }
  return { n, q };
}

function energy(dense: Dense, bits: number[]): number {
  const { n, q } = dense;
  let total = 0;
  for (let i = 0; i < n; i++) {
    if (!bits[i]) continue;
    for (let j = i; j < n; j++) {
      if (bits[j]) total += q[i * n + j];
    }
  }
  return total;
}

/** Exact minimum; first hit in MSB-first order is the lexicographic argmin. */
export function solveExhaustive(problem: Problem): number[] {
  const dense = toDense(problem);
  const n = dense.n;
  if (n > EXHAUSTIVE_LIMIT) {
    throw new RangeError(`exhaustive fallback capped at ${EXHAUSTIVE_LIMIT} variables, got ${n}`);
  }
  let best: number[] = new Array(n).fill(0);
  let bestEnergy = Infinity;
  const bits: number[] = new Array(n).fill(0);
  const count = 2 ** n;
  for (let mask = 0; mask < count; mask++) {
    for (let i = 0; i < n; i++) {
      bits[i] = (mask >>> (n - 1 - i)) & 1;
    }
    const e = energy(dense, bits);
    if (e < bestEnergy) {
      bestEnergy = e;
      best = bits.slice();
    }
  }
  return best;
}

/** Deterministic 32-bit PRNG (mulberry32); good enough for annealing moves. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** FNV-1a over the canonical entry list: a per-request annealing seed. */
export function requestSeed(problem: Problem): number {
  let hash = 0x811c9dc5;
  const mix = (text: string) => {
    for (let i = 0; i < text.length; i++) {
      hash ^= text.charCodeAt(i);
      hash = Math.imul(hash, 0x01000193);
    }
  };
  for (const key of [...problem.weights.keys()].sort()) {
    mix(key);
    mix(`=${problem.weights.get(key)}`);
  }
  return hash >>> 0;
}

interface AnnealOptions {
  sweeps?: number;
  startTemperature?: number;
  endTemperature?: number;
}

function annealOnce(dense: Dense, rand: () => number, options: AnnealOptions): number[] {
  const { n, q } = dense;
  const sweeps = options.sweeps ?? 400;
  const symmetric = (i: number, j: number) =>
    i < j ? q[i * n + j] : i > j ? q[j * n + i] : 0;

  const bits: number[] = new Array(n);
  for (let i = 0; i < n; i++) bits[i] = rand() < 0.5 ? 1 : 0;

  // Linear field per variable given the rest of the assignment.
  const field = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    let f = q[i * n + i];
    for (let j = 0; j < n; j++) {
      if (j !== i && bits[j]) f += symmetric(i, j);
    }
    field[i] = f;
  }

  let scale = 0;
  for (const v of q) scale = Math.max(scale, Math.abs(v));
  const startT = options.startTemperature ?? Math.max(scale, 1) * 2;
  const endT = options.endTemperature ?? Math.max(scale, 1) * 1e-3;
  const cool = (endT / startT) ** (1 / Math.max(sweeps - 1, 1));

  let temperature = startT;
  for (let sweep = 0; sweep < sweeps; sweep++) {
    for (let i = 0; i < n; i++) {
      const delta = bits[i] ? -field[i] : field[i];
      if (delta <= 0 || rand() < Math.exp(-delta / temperature)) {
        const newBit = bits[i] ? 0 : 1;
        bits[i] = newBit;
        const sign = newBit ? 1 : -1;
        for (let j = 0; j < n; j++) {
          if (j !== i) field[j] += sign * symmetric(i, j);
        }
      }
    }
    temperature *= cool;
  }
  return bits;
}

/** Best of `reads` seeded annealing runs by local energy. */
export function solveAnnealing(problem: Problem, reads: number, seed: number): number[] {
  const dense = toDense(problem);
  let best: number[] | null = null;
  let bestEnergy = Infinity;
  for (let read = 0; read < reads; read++) {
    const bits = annealOnce(dense, mulberry32(seed ^ (read * 0x9e3779b9)), {});
    const e = energy(dense, bits);
    if (best === null || e < bestEnergy) {
      best = bits;
      bestEnergy = e;
    }
  }
  return best!;
}

/** Fallback dispatch: exact when small, annealing otherwise. */
export function solveLocal(problem: Problem, reads: number): number[] {
  if (problem.nodes.length <= EXHAUSTIVE_LIMIT) {
    return solveExhaustive(problem);
  }
  return solveAnnealing(problem, reads, requestSeed(problem));
}
