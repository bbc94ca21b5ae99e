/**
 * Generate the recorded working-graph fixture.
 *
 * Starts from a 27 x 27 Chimera lattice (8 nodes per cell, 5832 total) and
 * retires 396 seeded pseudo-random sites, leaving the 5436 working nodes an
 * annealer actually exposes. Edges survive only when both endpoints do. The
 * output uses the topology file format of the primary package: node count,
 * one node id per line, an `E` separator, then one `u v` edge per line.
 *
 * Usage: node dist/scripts/generate-working-graph.js <out-path>
 */
import { writeFileSync } from 'node:fs';

import { mulberry32 } from '../src/solver.js';

const CELLS_PER_SIDE = 27;
const DEAD_NODES = 396;
const SEED = 0xda7a;

interface Graph {
  nodes: number[];
  edges: Array<[number, number]>;
}

/** Chimera lattice: m x m grid of K_{4,4} cells with inter-cell couplers. */
function chimera(m: number): Graph {
  const edges: Array<[number, number]> = [];
  for (let r = 0; r < m; r += 1) {
    for (let c = 0; c < m; c += 1) {
      const base = 8 * (r * m + c);
      for (let k = 0; k < 4; k += 1) {
        for (let kk = 4; kk < 8; kk += 1) {
          edges.push([base + k, base + kk]);
        }
      }
      if (r + 1 < m) {
        for (let k = 0; k < 4; k += 1) {
          edges.push([base + k, base + 8 * m + k]);
        }
      }
      if (c + 1 < m) {
        for (let kk = 4; kk < 8; kk += 1) {
          edges.push([base + kk, base + 8 + kk]);
        }
      }
    }
  }
  const nodes = Array.from({ length: 8 * m * m }, (_, i) => i);
  return { nodes, edges };
}

/** Drop `count` seeded-random nodes (and their edges) from the graph. */
function retireNodes(graph: Graph, count: number, seed: number): Graph {
  const rand = mulberry32(seed);
  const order = [...graph.nodes];
  for (let i = order.length - 1; i > 0; i -= 1) {
    const j = Math.floor(rand() * (i + 1));
    [order[i], order[j]] = [order[j], order[i]];
  }
  const dead = new Set(order.slice(0, count));
  const nodes = graph.nodes.filter((u) => !dead.has(u));
  const edges = graph.edges.filter(([u, v]) => !dead.has(u) && !dead.has(v));
  return { nodes, edges };
}

function main(): void {
  const out = process.argv[2];
  if (!out) {
    process.stderr.write('usage: generate-working-graph <out-path>\n');
    process.exit(2);
  }
  const graph = retireNodes(chimera(CELLS_PER_SIDE), DEAD_NODES, SEED);
  const lines = [
    `${graph.nodes.length}`,
    ...graph.nodes.map((u) => `${u}`),
    'E',
    ...graph.edges.map(([u, v]) => `${u} ${v}`),
  ];
  writeFileSync(out, lines.join('\n') + '\n');
  process.stderr.write(`wrote ${graph.nodes.length} nodes, ${graph.edges.length} edges to ${out}\n`);
}

main();
