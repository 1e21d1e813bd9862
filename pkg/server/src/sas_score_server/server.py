"""Single-threaded request loop over stdio.

First line out is the handshake; afterwards each request line
``{"id": <u64>, "text": <str>}`` is answered in order with either
``{"id": <u64>, "score": <float>}`` or ``{"id": <u64>, "error": <str>}``.
Every line is flushed immediately. Lines that do not parse are answered with
``{"id": 0, "error": "parse"}`` and the loop continues.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backends import BackendError, load_backend

PROTOCOL_VERSION = "sas-score/1"


def _emit(stream, obj) -> None:
    stream.write(json.dumps(obj) + "\n")
    stream.flush()


def serve(backend, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    _emit(stdout, {"protocol": PROTOCOL_VERSION, "name": backend.name})
    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            request_id = int(request["id"])
            text = str(request["text"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            _emit(stdout, {"id": 0, "error": "parse"})
            continue
        try:
            score = float(backend.score(text))
            if not -1.0 <= score <= 1.0:
                raise BackendError(f"backend produced {score}, outside [-1, 1]")
            _emit(stdout, {"id": request_id, "score": score})
        except BackendError as exc:
            _emit(stdout, {"id": request_id, "error": str(exc)})
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sas-score-server",
        description="Serve sentiment scores over stdio using the sas-score/1 protocol.",
    )
    parser.add_argument(
        "--backend",
        default="toy-lexicon",
        help="'toy-lexicon' or a text-classification model id",
    )
    args = parser.parse_args(argv)
    try:
        backend = load_backend(args.backend)
    except BackendError as exc:
        _emit(sys.stdout, {"id": 0, "error": f"backend: {exc}"})
        return 2
    return serve(backend)


if __name__ == "__main__":
    sys.exit(main())
