"""Client for external scorers speaking the ``sas-score/1`` line protocol.

One JSON object per line, UTF-8, newline-terminated. The peer's first line is
a handshake ``{"protocol": "sas-score/1", "name": <str>}``; afterwards every
request ``{"id": <u64>, "text": <str>}`` is answered by either
``{"id": <u64>, "score": <float>}`` or ``{"id": <u64>, "error": <str>}``.
Responses may arrive out of order; the client reorders by id.

Transports: a child process on stdio, or a TCP connection.
"""

from __future__ import annotations

import json
import queue
import socket
import subprocess
import threading
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import BridgeError, BridgeTimeout, HandshakeError, ProtocolError

PROTOCOL_VERSION = "sas-score/1"

DEFAULT_HANDSHAKE_TIMEOUT = 10.0
DEFAULT_REQUEST_TIMEOUT = 30.0

_EOF = object()


@dataclass(frozen=True)
class BridgeRequest:
    id: int
    text: str

    def __post_init__(self) -> None:
        if self.id < 0 or self.id >= 1 << 64:
            raise ValueError(f"request id out of u64 range: {self.id}")
        if not self.text:
            raise ValueError("request text must be non-empty")


@dataclass(frozen=True)
class BridgeResponse:
    id: int
    score: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class BridgeSession:
    """A single ordered byte stream to one peer; one reader, one writer."""

    def __init__(self, reader, writer, proc=None, sock=None):
        self._reader = reader
        self._writer = writer
        self._proc = proc
        self._sock = sock
        self._lines: queue.Queue = queue.Queue()
        self.peer_name: Optional[str] = None
        self.protocol_version: Optional[str] = None
        self._thread = threading.Thread(target=self._pump, daemon=True)
        self._thread.start()

    @classmethod
    def spawn(cls, command: Sequence[str]) -> "BridgeSession":
        try:
            proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                encoding="utf-8",
            )
        except OSError as exc:
            raise BridgeError(f"cannot spawn {command[0]!r}: {exc}") from None
        return cls(proc.stdout, proc.stdin, proc=proc)

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 10.0) -> "BridgeSession":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise BridgeError(f"cannot connect to {host}:{port}: {exc}") from None
        sock.settimeout(None)
        reader = sock.makefile("r", encoding="utf-8")
        writer = sock.makefile("w", encoding="utf-8")
        return cls(reader, writer, sock=sock)

    def _pump(self) -> None:
        try:
            for line in self._reader:
                self._lines.put(line)
        except (OSError, ValueError):
            pass
        self._lines.put(_EOF)

    def _next_line(self, timeout: float):
        """One raw line from the peer, _EOF at stream end, None on timeout."""
        try:
            return self._lines.get(timeout=max(timeout, 0.0))
        except queue.Empty:
            return None

    def send(self, obj: dict) -> None:
        try:
            self._writer.write(json.dumps(obj) + "\n")
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise BridgeError(f"cannot send to peer: {exc}") from None

    def handshake(self, timeout: float = DEFAULT_HANDSHAKE_TIMEOUT) -> dict:
        line = self._next_line(timeout)
        if line is None:
            raise BridgeTimeout(f"no handshake within {timeout} s")
        if line is _EOF:
            raise HandshakeError("peer closed the stream before the handshake")
        try:
            greeting = json.loads(line)
        except json.JSONDecodeError:
            raise HandshakeError(f"malformed handshake line: {line!r}") from None
        if not isinstance(greeting, dict) or "protocol" not in greeting:
            raise HandshakeError(f"handshake missing protocol field: {greeting!r}")
        if greeting["protocol"] != PROTOCOL_VERSION:
            raise HandshakeError(
                f"protocol version mismatch: peer speaks {greeting['protocol']!r}, "
                f"client speaks {PROTOCOL_VERSION!r}"
            )
        self.protocol_version = greeting["protocol"]
        self.peer_name = str(greeting.get("name", ""))
        return greeting

    def close(self) -> None:
        # End the transport before touching the reader: the pump thread may be
        # blocked in readline() and holds the stream lock.
        try:
            self._writer.close()
        except (OSError, ValueError):
            pass
        if self._proc is not None:
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
        self._thread.join(timeout=2.0)
        try:
            self._reader.close()
        except (OSError, ValueError):
            pass
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass

    def __enter__(self) -> "BridgeSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_session(
    command: Optional[Sequence[str]] = None,
    host: Optional[str] = None,
    port: Optional[int] = None,
    handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
) -> BridgeSession:
    """Connect a transport and complete the handshake."""
    if command:
        session = BridgeSession.spawn(command)
    elif host and port:
        session = BridgeSession.connect(host, port)
    else:
        raise ValueError("need a command or a host/port pair")
    try:
        session.handshake(handshake_timeout)
    except Exception:
        session.close()
        raise
    return session


def _parse_response(line: str) -> BridgeResponse:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        raise ProtocolError(f"malformed response line: {line!r}") from None
    if not isinstance(obj, dict) or "id" not in obj:
        raise ProtocolError(f"response without id: {line!r}")
    has_score = "score" in obj
    has_error = "error" in obj
    if has_score == has_error:
        raise ProtocolError(f"response must carry exactly one of score/error: {line!r}")
    rid = int(obj["id"])
    if has_error:
        return BridgeResponse(id=rid, error=str(obj["error"]))
    score = float(obj["score"])
    if not -1.0 <= score <= 1.0:
        # A range violation indicts one request, not the whole session.
        return BridgeResponse(id=rid, error=f"score {score} outside [-1, 1]")
    return BridgeResponse(id=rid, score=score)


def score_batch(
    session: BridgeSession,
    requests: Sequence[BridgeRequest],
    max_in_flight: int = 32,
    timeout: float = DEFAULT_REQUEST_TIMEOUT,
) -> list[BridgeResponse]:
    """Pipeline requests and return responses in request order.

    At most ``max_in_flight`` requests are outstanding. A request that is not
    answered within ``timeout`` seconds becomes a per-id error; the batch
    keeps going. Unknown response ids abort the batch with a protocol error.
    """
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be >= 1")
    ids = [r.id for r in requests]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be unique within a batch")

    results: dict[int, BridgeResponse] = {}
    deadlines: dict[int, float] = {}
    expired: set[int] = set()
    pending_iter = iter(requests)
    exhausted = False

    def send_more() -> None:
        nonlocal exhausted
        while not exhausted and len(deadlines) < max_in_flight:
            try:
                request = next(pending_iter)
            except StopIteration:
                exhausted = True
                return
            session.send({"id": request.id, "text": request.text})
            deadlines[request.id] = time.monotonic() + timeout

    send_more()
    while len(results) < len(requests):
        if not deadlines:
            send_more()
            continue
        next_deadline = min(deadlines.values())
        line = session._next_line(next_deadline - time.monotonic())
        if line is None:
            now = time.monotonic()
            for rid in [r for r, d in deadlines.items() if d <= now]:
                del deadlines[rid]
                expired.add(rid)
                results[rid] = BridgeResponse(
                    id=rid, error=f"no response within {timeout} s"
                )
            send_more()
            continue
        if line is _EOF:
            for rid in list(deadlines):
                del deadlines[rid]
                results[rid] = BridgeResponse(id=rid, error="peer closed the stream")
            for request in pending_iter:
                results[request.id] = BridgeResponse(
                    id=request.id, error="peer closed the stream"
                )
            exhausted = True
            if len(results) < len(requests):  # pragma: no cover - defensive
                raise ProtocolError("stream ended with unsent requests unaccounted for")
            break
        response = _parse_response(line)
        if response.id in deadlines:
            del deadlines[response.id]
            results[response.id] = response
            send_more()
        elif response.id in expired:
            continue  # answer arrived after its deadline; already errored
        else:
            raise ProtocolError(f"response for unknown id {response.id}")

    return [results[r.id] for r in requests]
