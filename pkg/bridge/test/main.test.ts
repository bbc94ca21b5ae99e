/** End-to-end tests: spawn the built server and speak the pipe protocol. */
import { spawn } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { createServer, type Server } from 'node:http';
import { tmpdir } from 'node:os';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, describe, expect, it } from 'vitest';

const HERE = path.dirname(fileURLToPath(import.meta.url));
const SERVER = path.join(HERE, '..', 'dist', 'src', 'main.js');
const FIXTURES = path.join(HERE, '..', 'fixtures');

interface Outcome {
  stdout: string;
  stderr: string;
  code: number | null;
}

/** Run the bridge with `args`, feed it `input`, wait for exit. */
function runBridge(
  args: string[],
  input: string,
  env: Record<string, string | undefined> = {},
): Promise<Outcome> {
  return new Promise((resolve, reject) => {
    const child = spawn('node', [SERVER, ...args], {
      env: { ...process.env, BRIDGE_REMOTE_URL: undefined, ...env },
    });
    let stdout = '';
    let stderr = '';
    child.stdout.on('data', (chunk) => (stdout += chunk));
    child.stderr.on('data', (chunk) => (stderr += chunk));
    child.on('error', reject);
    child.on('close', (code) => resolve({ stdout, stderr, code }));
    child.stdin.write(input);
    child.stdin.end();
  });
}

describe('serve loop', () => {
  it('answers the single-triplet request by setting the bit', async () => {
    const outcome = await runBridge(['1'], '0\n0\n-1.0\n#\n');
    expect(outcome.code).toBe(0);
    expect(outcome.stderr).toBe('');
    expect(outcome.stdout).toBe('1\n');
  });

  it('answers one 0/1 line per node on an all-zero request', async () => {
    const outcome = await runBridge(['3'], '0\n0\n0.0\n1\n1\n0.0\n2\n2\n0.0\n#\n');
    expect(outcome.code).toBe(0);
    const lines = outcome.stdout.split('\n').filter((line) => line !== '');
    expect(lines).toHaveLength(3);
    for (const line of lines) expect(['0', '1']).toContain(line);
  });

  it('serves several requests in one session, clearing weights between', async () => {
    const first = '0\n0\n-1.0\n#\n';
    const second = '3\n3\n0.0\n5\n5\n-2.0\n3\n5\n1.0\n#\n';
    const outcome = await runBridge(['2'], first + second);
    expect(outcome.code).toBe(0);
    // Second answer has two lines (nodes 3 and 5): node 5 set, node 3 not —
    // proof the -1.0 weight from the first request did not leak through.
    expect(outcome.stdout).toBe('1\n' + '0\n1\n');
  });

  it('exits nonzero on a malformed triplet without writing a response', async () => {
    const outcome = await runBridge(['1'], '0\nzzz\n-1.0\n#\n');
    expect(outcome.code).toBe(1);
    expect(outcome.stdout).toBe('');
    expect(outcome.stderr).toMatch(/malformed col line/);
  });

  it('exits nonzero when the terminator lands mid-triplet', async () => {
    const outcome = await runBridge(['1'], '0\n0\n#\n');
    expect(outcome.code).toBe(1);
    expect(outcome.stdout).toBe('');
    expect(outcome.stderr).toMatch(/dangling/);
  });

  it('exits nonzero when input closes mid-request', async () => {
    const outcome = await runBridge(['1'], '0\n0\n-1.0\n');
    expect(outcome.code).toBe(1);
    expect(outcome.stdout).toBe('');
    expect(outcome.stderr).toMatch(/middle of a request/);
  });

  it('rejects an empty request', async () => {
    const outcome = await runBridge(['1'], '#\n');
    expect(outcome.code).toBe(1);
    expect(outcome.stderr).toMatch(/carries no weights/);
  });

  it('exits cleanly on empty input', async () => {
    const outcome = await runBridge(['1'], '');
    expect(outcome.code).toBe(0);
    expect(outcome.stdout).toBe('');
  });
});

describe('argument handling', () => {
  it.each([
    [[], /usage/],
    [['0'], /k must be >= 1/],
    [['-3'], /positive integer/],
    [['two'], /positive integer/],
    [['1', '--mode', 'teleport'], /--mode expects/],
    [['1', '--bogus'], /unknown argument/],
    [['1', '--dump-topology'], /expects a path/],
  ])('rejects argv %j', async (args, message) => {
    const outcome = await runBridge(args as string[], '');
    expect(outcome.code).toBe(2);
    expect(outcome.stderr).toMatch(message as RegExp);
  });
});

describe('topology dump', () => {
  const scratch = mkdtempSync(path.join(tmpdir(), 'bridge-test-'));
  afterAll(() => rmSync(scratch, { recursive: true, force: true }));

  it('ships the recorded working graph in fallback mode, then serves', async () => {
    const out = path.join(scratch, 'graph.txt');
    const outcome = await runBridge(['1', '--dump-topology', out], '0\n0\n-1.0\n#\n');
    expect(outcome.code).toBe(0);
    expect(outcome.stdout).toBe('1\n');
    const dumped = readFileSync(out, 'utf8');
    expect(dumped).toBe(readFileSync(path.join(FIXTURES, 'working_graph.txt'), 'utf8'));
    expect(dumped.split('\n', 1)[0]).toBe('5436');
  });

  it('fetches the working graph from the service in remote mode', async () => {
    const body = '1\n7\nE\n';
    const [server, url] = await stubService((_req, res) => {
      res.writeHead(200, { 'content-type': 'text/plain' });
      res.end(body);
    });
    try {
      const out = path.join(scratch, 'remote-graph.txt');
      const outcome = await runBridge(['1', '--mode', 'remote', '--dump-topology', out], '', {
        BRIDGE_REMOTE_URL: url,
      });
      expect(outcome.code).toBe(0);
      expect(readFileSync(out, 'utf8')).toBe(body);
    } finally {
      server.close();
    }
  });

  it('exits nonzero when the service is unreachable', async () => {
    const out = path.join(scratch, 'unreachable.txt');
    const outcome = await runBridge(['1', '--mode', 'remote', '--dump-topology', out], '', {
      BRIDGE_REMOTE_URL: 'http://127.0.0.1:1',
    });
    expect(outcome.code).toBe(1);
    expect(outcome.stderr).toMatch(/unreachable/);
  });
});

/** Start a one-shot HTTP stub on an ephemeral port. */
function stubService(
  handler: Parameters<typeof createServer>[1],
): Promise<[Server, string]> {
  return new Promise((resolve) => {
    const server = createServer(handler);
    server.listen(0, '127.0.0.1', () => {
      const address = server.address();
      if (address === null || typeof address === 'string') throw new Error('no port');
      resolve([server, `http://127.0.0.1:${address.port}`]);
    });
  });
}

describe('remote mode', () => {
  it('forwards the request and relays the returned bits', async () => {
    let seen: { entries: unknown; reads: unknown } | null = null;
    const [server, url] = await stubService((req, res) => {
      let body = '';
      req.on('data', (chunk) => (body += chunk));
      req.on('end', () => {
        seen = JSON.parse(body);
        res.writeHead(200, { 'content-type': 'application/json' });
        res.end(JSON.stringify({ bits: [0, 1] }));
      });
    });
    try {
      const outcome = await runBridge(['5', '--mode', 'remote'], '0\n4\n-1.5\n#\n', {
        BRIDGE_REMOTE_URL: url,
      });
      expect(outcome.code).toBe(0);
      expect(outcome.stdout).toBe('0\n1\n');
      expect(seen).toEqual({ entries: [[0, 4, -1.5]], reads: 5 });
    } finally {
      server.close();
    }
  });

  it('fails loudly when the service answers an error status', async () => {
    const [server, url] = await stubService((_req, res) => {
      res.writeHead(500);
      res.end();
    });
    try {
      const outcome = await runBridge(['1', '--mode', 'remote'], '0\n0\n-1.0\n#\n', {
        BRIDGE_REMOTE_URL: url,
      });
      expect(outcome.code).toBe(1);
      expect(outcome.stdout).toBe('');
      expect(outcome.stderr).toMatch(/answered 500/);
    } finally {
      server.close();
    }
  });

  it('rejects a malformed bits array from the service', async () => {
    const [server, url] = await stubService((_req, res) => {
      res.writeHead(200, { 'content-type': 'application/json' });
      res.end(JSON.stringify({ bits: [0, 2] }));
    });
    try {
      const outcome = await runBridge(['1', '--mode', 'remote'], '0\n4\n-1.0\n#\n', {
        BRIDGE_REMOTE_URL: url,
      });
      expect(outcome.code).toBe(1);
      expect(outcome.stderr).toMatch(/malformed bits/);
    } finally {
      server.close();
    }
  });

  it('requires BRIDGE_REMOTE_URL', async () => {
    const outcome = await runBridge(['1', '--mode', 'remote'], '0\n0\n-1.0\n#\n');
    expect(outcome.code).toBe(1);
    expect(outcome.stderr).toMatch(/BRIDGE_REMOTE_URL/);
  });
});

describe('transcript replay', () => {
  interface Exchange {
    request: string;
    response: string;
  }

  /** Split the recorded duplex stream on protocol boundaries. */
  function splitTranscript(text: string): Exchange[] {
    const lines = text.split('\n');
    expect(lines.pop()).toBe('');
    const exchanges: Exchange[] = [];
    let i = 0;
    while (i < lines.length) {
      const start = i;
      const nodes = new Set<number>();
      while (lines[i] !== '#') {
        nodes.add(Number(lines[i]));
        nodes.add(Number(lines[i + 1]));
        i += 3;
      }
      i += 1;
      const request = lines.slice(start, i).join('\n') + '\n';
      const response = lines.slice(i, i + nodes.size).join('\n') + '\n';
      i += nodes.size;
      exchanges.push({ request, response });
    }
    return exchanges;
  }

  it('reproduces every recorded response byte for byte', async () => {
    const transcript = readFileSync(path.join(FIXTURES, 'transcript.txt'), 'utf8');
    const exchanges = splitTranscript(transcript);
    expect(exchanges.length).toBeGreaterThanOrEqual(4);
    const outcome = await runBridge(
      ['7'],
      exchanges.map((exchange) => exchange.request).join(''),
    );
    expect(outcome.code).toBe(0);
    expect(outcome.stdout).toBe(exchanges.map((exchange) => exchange.response).join(''));
  });
});
