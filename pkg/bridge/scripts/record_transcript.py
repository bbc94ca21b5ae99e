"""Record the protocol-conformance transcript fixture.

Drives the built bridge (fallback mode) through the primary package's
BridgeSampler while tee-ing both pipe directions to disk, then interleaves
the captured bytes into fixtures/transcript.txt in wire order: request
bytes (triplets + ``#`` line), then the response bytes for that request,
repeated. The protocol is self-delimiting, so replay tooling on either side
can split the transcript without extra markers.

Run from the bridge directory after ``npm run build``:

    python3 scripts/record_transcript.py
"""

from pathlib import Path
import sys
import tempfile

import numpy as np

from qals.samplers import BridgeSampler, SamplerRequest

BRIDGE_DIR = Path(__file__).resolve().parent.parent
SERVER = BRIDGE_DIR / "dist" / "src" / "main.js"
OUT = BRIDGE_DIR / "fixtures" / "transcript.txt"


def requests() -> list[SamplerRequest]:
    """The recorded session: edge cases first, then seeded random problems."""
    reqs = [
        SamplerRequest(weights={(0, 0): -1.0}, reads=7),
        SamplerRequest(weights={(0, 0): 0.0, (1, 1): 0.0, (2, 2): 0.0}, reads=7),
    ]
    rng = np.random.default_rng(42)
    for nodes in ([0, 1, 2, 3, 4, 5], [1, 3, 4, 8, 10, 11]):
        weights = {}
        for i, u in enumerate(nodes):
            for v in nodes[i:]:
                weights[(u, v)] = float(rng.normal(scale=2.0))
        reqs.append(SamplerRequest(weights=weights, reads=7))
    return reqs


def main() -> None:
    if not SERVER.exists():
        sys.exit("build the bridge first: npm run build")
    with tempfile.TemporaryDirectory() as tmp:
        req_tap = Path(tmp) / "requests.bin"
        resp_tap = Path(tmp) / "responses.bin"
        command = [
            "bash",
            "-c",
            f"tee {req_tap} | node {SERVER} 7 --mode fallback | tee {resp_tap}",
        ]
        with BridgeSampler(command) as sampler:
            for request in requests():
                sampler.sample(request)
        raw_requests = req_tap.read_bytes()
        raw_responses = resp_tap.read_bytes()

    # Split the taps on protocol boundaries and interleave them.
    transcript = bytearray()
    req_lines = raw_requests.decode("ascii").splitlines(keepends=True)
    resp_lines = raw_responses.decode("ascii").splitlines(keepends=True)
    pos = 0
    for request in requests():
        take = 3 * len(request.weights) + 1
        chunk = req_lines[pos : pos + take]
        assert chunk[-1] == "#\n", chunk[-1]
        transcript.extend("".join(chunk).encode("ascii"))
        pos += take
        n = len(request.nodes())
        answer, resp_lines = resp_lines[:n], resp_lines[n:]
        assert len(answer) == n and all(line in ("0\n", "1\n") for line in answer)
        transcript.extend("".join(answer).encode("ascii"))
    assert pos == len(req_lines) and not resp_lines
    OUT.write_bytes(bytes(transcript))
    print(f"wrote {len(transcript)} bytes to {OUT}")


if __name__ == "__main__":
    main()
