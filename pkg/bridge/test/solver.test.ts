/** Unit tests for the local fallback solvers. */
import { describe, expect, it } from 'vitest';

import { Problem, buildProblem, weightKey } from '../src/protocol.js';
import {
  EXHAUSTIVE_LIMIT,
  mulberry32,
  requestSeed,
  solveAnnealing,
  solveExhaustive,
  solveLocal,
} from '../src/solver.js';

/** Build a Problem straight from (row, col, value) triples. */
function problemOf(entries: Array<[number, number, number]>): Problem {
  return buildProblem(entries.map(([row, col, value]) => ({ row, col, value })));
}

/** Energy computed independently of the solver's dense form. */
function oracleEnergy(problem: Problem, bits: number[]): number {
  const position = new Map(problem.nodes.map((node, i) => [node, i]));
  let total = 0;
  for (const [key, value] of problem.weights) {
    const [u, v] = key.split(',').map(Number);
    if (bits[position.get(u)!] && bits[position.get(v)!]) total += value;
  }
  return total;
}

/** Exact minimum energy by independent enumeration. */
function oracleMinimum(problem: Problem): number {
  const n = problem.nodes.length;
  let best = Infinity;
  for (let mask = 0; mask < 2 ** n; mask++) {
    const bits = Array.from({ length: n }, (_, i) => (mask >>> (n - 1 - i)) & 1);
    best = Math.min(best, oracleEnergy(problem, bits));
  }
  return best;
}

/** Seeded random problem over the given node ids, dense upper triangle. */
function randomProblem(nodes: number[], seed: number): Problem {
  const rand = mulberry32(seed);
  const entries: Array<[number, number, number]> = [];
  for (let i = 0; i < nodes.length; i++) {
    for (let j = i; j < nodes.length; j++) {
      entries.push([nodes[i], nodes[j], (rand() - 0.5) * 4]);
    }
  }
  return problemOf(entries);
}

describe('solveExhaustive', () => {
  it('sets the single bit when that lowers energy', () => {
    expect(solveExhaustive(problemOf([[0, 0, -1.0]]))).toEqual([1]);
  });

  it('answers all zeros on an all-zero request (lexicographic tie-break)', () => {
    const problem = problemOf([
      [0, 0, 0],
      [1, 1, 0],
      [2, 2, 0],
    ]);
    expect(solveExhaustive(problem)).toEqual([0, 0, 0]);
  });

  it('breaks ties toward the lexicographically smallest bit string', () => {
    // 01 and 10 tie at -1; 00 and 11 cost 0 — the smaller string must win.
    const problem = problemOf([
      [0, 0, -1],
      [1, 1, -1],
      [0, 1, 2],
    ]);
    expect(solveExhaustive(problem)).toEqual([0, 1]);
  });

  it('matches an independent enumeration oracle on seeded problems', () => {
    for (let seed = 0; seed < 25; seed++) {
      const size = 2 + (seed % 7);
      const nodes = Array.from({ length: size }, (_, i) => i * 3 + (seed % 2));
      const problem = randomProblem(nodes, 1000 + seed);
      const bits = solveExhaustive(problem);
      expect(oracleEnergy(problem, bits)).toBe(oracleMinimum(problem));
    }
  });

  it('refuses problems beyond the enumeration cap', () => {
    const entries: Array<[number, number, number]> = [];
    for (let i = 0; i <= EXHAUSTIVE_LIMIT; i++) entries.push([i, i, -1]);
    expect(() => solveExhaustive(problemOf(entries))).toThrow(/capped at 20/);
  });
});

describe('requestSeed', () => {
  it('ignores entry insertion order', () => {
    const forward = problemOf([
      [0, 1, 2.5],
      [2, 2, -1],
    ]);
    const backward = problemOf([
      [2, 2, -1],
      [1, 0, 2.5],
    ]);
    expect(requestSeed(forward)).toBe(requestSeed(backward));
  });

  it('separates different requests', () => {
    const a = problemOf([[0, 0, -1]]);
    const b = problemOf([[0, 0, -2]]);
    expect(requestSeed(a)).not.toBe(requestSeed(b));
  });
});

describe('solveAnnealing', () => {
  it('is deterministic for a fixed seed', () => {
    const problem = randomProblem(
      Array.from({ length: 30 }, (_, i) => i),
      7,
    );
    const first = solveAnnealing(problem, 5, 123);
    const second = solveAnnealing(problem, 5, 123);
    expect(second).toEqual(first);
  });

  it('finds the exact optimum on small problems', () => {
    for (let seed = 0; seed < 5; seed++) {
      const problem = randomProblem([0, 1, 2, 3, 4, 5, 6, 7], 50 + seed);
      const bits = solveAnnealing(problem, 10, requestSeed(problem));
      expect(oracleEnergy(problem, bits)).toBe(oracleMinimum(problem));
    }
  });
});

describe('solveLocal', () => {
  it('solves small problems exactly', () => {
    const problem = randomProblem([0, 1, 2, 3, 4], 99);
    expect(oracleEnergy(problem, solveLocal(problem, 1))).toBe(oracleMinimum(problem));
  });

  it('routes oversized problems to annealing and still answers well', () => {
    // 21 independent variables, each rewarded for being set: the optimum
    // (all ones) is separable, so annealing must land exactly on it.
    const entries: Array<[number, number, number]> = [];
    for (let i = 0; i <= EXHAUSTIVE_LIMIT; i++) entries.push([i, i, -1]);
    const problem = problemOf(entries);
    const bits = solveLocal(problem, 3);
    expect(bits).toEqual(new Array(EXHAUSTIVE_LIMIT + 1).fill(1));
  });

  it('answers identically for identical oversized requests', () => {
    const problem = randomProblem(
      Array.from({ length: 25 }, (_, i) => i * 2),
      321,
    );
    expect(solveLocal(problem, 4)).toEqual(solveLocal(problem, 4));
  });
});
