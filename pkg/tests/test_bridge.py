import json
import socket
import sys
import threading
from pathlib import Path

import pytest

from sasaudit import bridge, corpus
from sasaudit.bridge import BridgeRequest, BridgeSession, open_session, score_batch
from sasaudit.errors import (
    BridgeError,
    BridgeTimeout,
    HandshakeError,
    ProtocolError,
    ScoringError,
)
from sasaudit.sas import OutputMode, SasDescriptor, SasKind, score_dataset, score_lexicon

SERVER = Path(__file__).parent / "loopback_server.py"


def spawn(*args: str) -> BridgeSession:
    return BridgeSession.spawn([sys.executable, str(SERVER), *args])


def requests_for(texts):
    return [BridgeRequest(id=i, text=text) for i, text in enumerate(texts)]


HAPPY_TEXTS = [f"subject {i} feels happy" for i in range(6)]


class TestHandshake:
    def test_accepts_matching_version(self):
        with spawn("--name", "demo-model") as session:
            greeting = session.handshake()
            assert greeting["name"] == "demo-model"
            assert session.peer_name == "demo-model"
            assert session.protocol_version == "sas-score/1"

    def test_rejects_version_mismatch(self):
        with spawn("--protocol", "sas-score/2") as session:
            with pytest.raises(HandshakeError, match="sas-score/2"):
                session.handshake()

    def test_times_out(self):
        with spawn("--handshake-delay", "5") as session:
            with pytest.raises(BridgeTimeout):
                session.handshake(timeout=0.2)

    def test_malformed_first_line(self, tmp_path):
        script = tmp_path / "bad.py"
        script.write_text("print('not json', flush=True)\n")
        with BridgeSession.spawn([sys.executable, str(script)]) as session:
            with pytest.raises(HandshakeError, match="malformed"):
                session.handshake()

    def test_spawn_failure(self):
        with pytest.raises(BridgeError, match="spawn"):
            BridgeSession.spawn(["/nonexistent/sas-server"])


class TestScoreBatch:
    def test_reorders_buffered_responses(self):
        with spawn("--buffer", "3") as session:
            session.handshake()
            responses = score_batch(session, requests_for(HAPPY_TEXTS), max_in_flight=3)
        assert [r.id for r in responses] == list(range(6))
        assert all(r.ok and r.score == 0.8 for r in responses)

    def test_range_violation_is_per_request(self):
        with spawn("--range-on", "2") as session:
            session.handshake()
            responses = score_batch(session, requests_for(HAPPY_TEXTS))
        assert responses[2].error and "1.5" in responses[2].error
        assert all(r.ok for i, r in enumerate(responses) if i != 2)

    def test_error_response_keeps_batch_going(self):
        with spawn("--error-on", "4") as session:
            session.handshake()
            responses = score_batch(session, requests_for(HAPPY_TEXTS))
        assert responses[4].error == "oom"
        assert sum(1 for r in responses if r.ok) == 5

    def test_unknown_id_is_protocol_error(self):
        with spawn("--alias-on", "1") as session:
            session.handshake()
            with pytest.raises(ProtocolError, match="unknown id"):
                score_batch(session, requests_for(HAPPY_TEXTS))

    def test_dropped_request_times_out_alone(self):
        with spawn("--drop-on", "3") as session:
            session.handshake()
            responses = score_batch(session, requests_for(HAPPY_TEXTS), timeout=1.0)
        assert "no response" in responses[3].error
        assert sum(1 for r in responses if r.ok) == 5

    def test_no_loss_no_duplication(self):
        with spawn("--buffer", "2") as session:
            session.handshake()
            responses = score_batch(session, requests_for(HAPPY_TEXTS), max_in_flight=4)
        assert sorted(r.id for r in responses) == list(range(6))

    def test_window_of_one_is_strict_alternation(self):
        # A peer that answers only once two requests have arrived starves a
        # strictly alternating client: the second request goes out only after
        # the first has already timed out.
        with spawn("--buffer", "2") as session:
            session.handshake()
            responses = score_batch(
                session, requests_for(HAPPY_TEXTS[:2]), max_in_flight=1, timeout=0.5
            )
            assert not responses[0].ok and responses[1].ok
        # A window of two feeds the same peer without any timeout.
        with spawn("--buffer", "2") as session:
            session.handshake()
            responses = score_batch(
                session, requests_for(HAPPY_TEXTS[:2]), max_in_flight=2, timeout=5.0
            )
            assert all(r.ok for r in responses)

    def test_peer_death_marks_remaining(self):
        with spawn("--answer-then-close", "1") as session:
            session.handshake()
            responses = score_batch(session, requests_for(HAPPY_TEXTS[:3]), timeout=5.0)
        assert responses[0].ok
        assert all("peer closed" in r.error for r in responses[1:])

    def test_duplicate_ids_rejected(self):
        with spawn() as session:
            session.handshake()
            duplicated = [BridgeRequest(0, "x feels happy"), BridgeRequest(0, "y feels happy")]
            with pytest.raises(ValueError, match="unique"):
                score_batch(session, duplicated)

    def test_request_validation(self):
        with pytest.raises(ValueError):
            BridgeRequest(id=-1, text="ok")
        with pytest.raises(ValueError):
            BridgeRequest(id=1, text="")


class TestTransparency:
    def test_loopback_matches_native_lexicon(self, e3):
        records = corpus.generate_group3(e3, replicates=2)
        native = [score_lexicon(r) for r in records]
        external = SasDescriptor(
            "loopback",
            SasKind.EXTERNAL,
            OutputMode.CONTINUOUS,
            command=(sys.executable, str(SERVER)),
        )
        scored = score_dataset(external, records)
        assert [s.score for s in scored] == native

    def test_scoring_error_names_first_failed_record(self, e3):
        records = corpus.generate_group1(e3, replicates=1)
        external = SasDescriptor(
            "loopback",
            SasKind.EXTERNAL,
            OutputMode.CONTINUOUS,
            command=(sys.executable, str(SERVER), "--error-on", str(records[2].id)),
        )
        with pytest.raises(ScoringError, match=f"record {records[2].id}: oom"):
            score_dataset(external, records)


def _tcp_server(ready: threading.Event, port_holder: list):
    listener = socket.create_server(("127.0.0.1", 0))
    port_holder.append(listener.getsockname()[1])
    ready.set()
    conn, _ = listener.accept()
    with conn, conn.makefile("r", encoding="utf-8") as reader, conn.makefile(
        "w", encoding="utf-8"
    ) as writer:
        writer.write(json.dumps({"protocol": "sas-score/1", "name": "tcp-demo"}) + "\n")
        writer.flush()
        for line in reader:
            request = json.loads(line)
            writer.write(json.dumps({"id": request["id"], "score": 0.5}) + "\n")
            writer.flush()
    listener.close()


class TestTcpTransport:
    def test_round_trip(self):
        ready = threading.Event()
        port_holder: list = []
        thread = threading.Thread(target=_tcp_server, args=(ready, port_holder), daemon=True)
        thread.start()
        ready.wait(timeout=5)
        session = open_session(host="127.0.0.1", port=port_holder[0])
        try:
            assert session.peer_name == "tcp-demo"
            responses = score_batch(session, requests_for(["they feel glad"]))
            assert responses[0].score == 0.5
        finally:
            session.close()
        thread.join(timeout=5)

    def test_connection_refused(self):
        with pytest.raises(BridgeError, match="connect"):
            open_session(host="127.0.0.1", port=9)  # discard port, nothing listens

    def test_open_session_requires_endpoint(self):
        with pytest.raises(ValueError):
            open_session()
