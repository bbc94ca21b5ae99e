/**
 * Wire protocol for the QUBO pipe: newline-delimited weight triplets.
 *
 * Parent -> child: for every weight entry three lines `row`, `col`, `value`
 * (row/col decimal integers, value a decimal real with full round-trip
 * precision), then a lone `#` line ending the request. Child -> parent: one
 * line per distinct node index, `0` or `1`, in ascending node order.
 */

export interface WeightEntry {
  row: number;
  col: number;
  value: number;
}

export interface Problem {
  /** Distinct node indices in ascending order. */
  nodes: number[];
  /** Canonical weights keyed `${min},${max}`; later duplicates win. */
  weights: Map<string, number>;
}

export class ProtocolError extends Error {}

export function weightKey(row: number, col: number): string {
  return row <= col ? `${row},${col}` : `${col},${row}`;
}

function parseIndex(line: string, what: string): number {
  if (!/^-?\d+$/.test(line)) {
    throw new ProtocolError(`malformed ${what} line: ${JSON.stringify(line)}`);
  }
  const value = Number(line);
  if (!Number.isSafeInteger(value) || value < 0) {
    throw new ProtocolError(`${what} index out of range: ${line}`);
  }
  return value;
}

const DECIMAL_REAL = /^-?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;

function parseValue(line: string): number {
  if (!DECIMAL_REAL.test(line)) {
    throw new ProtocolError(`malformed value line: ${JSON.stringify(line)}`);
  }
  return Number(line);
}

/**
 * Incremental request reader: feed lines one at a time; `push` returns a
 * finished Problem when the line was the `#` terminator, null otherwise.
 */
export class RequestReader {
  private pending: string[] = [];
  private entries: WeightEntry[] = [];

  push(line: string): Problem | null {
    if (line === '#') {
      if (this.pending.length !== 0) {
        throw new ProtocolError(
          `request ended mid-triplet (${this.pending.length} dangling line(s))`,
        );
      }
      const problem = buildProblem(this.entries);
      this.entries = [];
      return problem;
    }
    this.pending.push(line);
    if (this.pending.length === 3) {
      const [rowLine, colLine, valueLine] = this.pending as [string, string, string];
      this.entries.push({
        row: parseIndex(rowLine, 'row'),
        col: parseIndex(colLine, 'col'),
        value: parseValue(valueLine),
      });
      this.pending = [];
    }
    return null;
  }

  /** True when a partial request is buffered (EOF here is a protocol error). */
  get midRequest(): boolean {
    return this.pending.length > 0 || this.entries.length > 0;
  }
}

export function buildProblem(entries: WeightEntry[]): Problem {
  if (entries.length === 0) {
    throw new ProtocolError('request carries no weights');
  }
  const nodeSet = new Set<number>();
  const weights = new Map<string, number>();
  for (const { row, col, value } of entries) {
    nodeSet.add(row);
    nodeSet.add(col);
    weights.set(weightKey(row, col), value);
  }
  return { nodes: [...nodeSet].sort((a, b) => a - b), weights };
}

/** Response block for an assignment over `problem.nodes`, ascending order. */
export function formatResponse(problem: Problem, bits: number[]): string {
  if (bits.length !== problem.nodes.length) {
    throw new ProtocolError(
      `assignment covers ${bits.length} nodes, request has ${problem.nodes.length}`,
    );
  }
  return bits.map((b) => `${b}\n`).join('');
}
