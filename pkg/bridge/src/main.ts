/**
 * Stdio server for the annealer bridge.
 *
 * The parent process writes weight triplets (row, col, value — one token per
 * line) terminated by a `#` line; this server answers with one 0/1 line per
 * distinct node index, in ascending node order, then waits for the next
 * request. The process exits when stdin closes.
 *
 * Launch: bridge <k> [--mode remote|fallback] [--dump-topology PATH]
 *
 *   k                  best-of-k sample count (>= 1)
 *   --mode fallback    solve locally: exhaustive up to 20 variables,
 *                      simulated annealing beyond (default)
 *   --mode remote      forward each request to the annealing service named
 *                      by the BRIDGE_REMOTE_URL environment variable
 *   --dump-topology    write the working graph to PATH before serving
 *
 * Any malformed request line is fatal: nothing is written to stdout, a
 * diagnostic goes to stderr, and the process exits nonzero so the parent
 * sees a transport error rather than a corrupt sample.
 */
import { createInterface } from 'node:readline';
import { copyFile, writeFile } from 'node:fs/promises';
import { fileURLToPath } from 'node:url';
import * as path from 'node:path';

import { Problem, ProtocolError, RequestReader, formatResponse } from './protocol.js';
import { solveLocal } from './solver.js';

const EXIT_PROTOCOL = 1;
const EXIT_USAGE = 2;

const USAGE = 'usage: bridge <k> [--mode remote|fallback] [--dump-topology PATH]';

/** Recorded working graph shipped with the bridge (fallback mode). */
const FIXTURE_PATH = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  '..',
  '..',
  'fixtures',
  'working_graph.txt',
);

export interface Options {
  reads: number;
  mode: 'remote' | 'fallback';
  dumpPath: string | null;
}

/** Parse argv (without the node/script prefix). Throws on any usage error. */
export function parseArgs(argv: string[]): Options {
  if (argv.length === 0) {
    throw new Error(USAGE);
  }
  const [first, ...rest] = argv;
  if (!/^\d+$/.test(first)) {
    throw new Error(`k must be a positive integer, got '${first}'`);
  }
  const reads = Number(first);
  if (reads < 1) {
    throw new Error(`k must be >= 1, got ${reads}`);
  }
  const options: Options = { reads, mode: 'fallback', dumpPath: null };
  for (let i = 0; i < rest.length; i += 1) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (flag === '--mode') {
      if (value !== 'remote' && value !== 'fallback') {
        throw new Error(`--mode expects 'remote' or 'fallback', got '${value ?? ''}'`);
      }
      options.mode = value;
      i += 1;
    } else if (flag === '--dump-topology') {
      if (value === undefined) {
        throw new Error('--dump-topology expects a path');
      }
      options.dumpPath = value;
      i += 1;
    } else {
      throw new Error(`unknown argument '${flag}'`);
    }
  }
  return options;
}

/** Resolve the remote service base URL or fail loudly. */
function remoteUrl(): string {
  const url = process.env.BRIDGE_REMOTE_URL;
  if (!url) {
    throw new Error('remote mode needs BRIDGE_REMOTE_URL to be set');
  }
  return url.replace(/\/$/, '');
}

/** Ask the remote service for a best-of-k sample. */
async function solveRemote(problem: Problem, reads: number): Promise<number[]> {
  const entries = [...problem.weights.entries()].map(([key, value]) => {
    const [row, col] = key.split(',').map(Number);
    return [row, col, value];
  });
  const base = remoteUrl();
  let response: Response;
  try {
    response = await fetch(`${base}/sample`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ entries, reads }),
    });
  } catch (err) {
    throw new Error(`annealing service unreachable: ${(err as Error).message}`);
  }
  if (!response.ok) {
    throw new Error(`annealing service answered ${response.status}`);
  }
  const payload = (await response.json()) as { bits?: unknown };
  const bits = payload.bits;
  if (!Array.isArray(bits) || bits.some((b) => b !== 0 && b !== 1)) {
    throw new Error('annealing service returned a malformed bits array');
  }
  return bits as number[];
}

/** Write the working graph to `out`: the recorded fixture, or the service's. */
async function dumpTopology(out: string, mode: Options['mode']): Promise<void> {
  if (mode === 'fallback') {
    await copyFile(FIXTURE_PATH, out);
    return;
  }
  const base = remoteUrl();
  let response: Response;
  try {
    response = await fetch(`${base}/topology`);
  } catch (err) {
    throw new Error(`annealing service unreachable: ${(err as Error).message}`);
  }
  if (!response.ok) {
    throw new Error(`annealing service answered ${response.status}`);
  }
  await writeFile(out, await response.text());
}

/** Write `text` to a stream, waiting out back-pressure before returning. */
function writeAll(stream: NodeJS.WritableStream, text: string): Promise<void> {
  return new Promise((resolve, reject) => {
    stream.write(text, (err) => (err ? reject(err) : resolve()));
  });
}

/**
 * Serve requests from `input` until it closes.
 *
 * Strictly sequential: each request is fully answered (response written and
 * flushed) before the next line is consumed.
 */
export async function serve(
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
  options: Options,
): Promise<void> {
  const reader = new RequestReader();
  const lines = createInterface({ input, crlfDelay: Infinity });
  for await (const line of lines) {
    const problem = reader.push(line);
    if (problem === null) {
      continue;
    }
    const bits =
      options.mode === 'remote'
        ? await solveRemote(problem, options.reads)
        : solveLocal(problem, options.reads);
    await writeAll(output, formatResponse(problem, bits));
  }
  if (reader.midRequest) {
    throw new ProtocolError('input closed in the middle of a request');
  }
}

async function main(): Promise<void> {
  let options: Options;
  try {
    options = parseArgs(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`bridge: ${(err as Error).message}\n`);
    process.exit(EXIT_USAGE);
  }
  try {
    if (options.dumpPath !== null) {
      await dumpTopology(options.dumpPath, options.mode);
    }
    await serve(process.stdin, process.stdout, options);
  } catch (err) {
    process.stderr.write(`bridge: ${(err as Error).message}\n`);
    process.exit(EXIT_PROTOCOL);
  }
}

main();
