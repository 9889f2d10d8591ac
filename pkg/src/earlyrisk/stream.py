"""Round-based submission protocol: mock server and client driver.

One writing per subject per round, oldest first.  The server refuses to
release round r+1 until round r is fully answered, and a subject flagged
positive can never flip back to negative (alerts are final).  Subjects whose
histories are exhausted drop out of later rounds.

Wire format (bit-exact):
  GET  /teams/{token}/writings   -> 200 [{"subject_id","round","title","text","date"}]
                                    (empty array = end of stream)
  POST /teams/{token}/decisions  -> 200 {"round": r} with body
                                    [{"subject_id","decision","score"}]
Protocol violations answer 409 {"error": ...}, unknown tokens 401.
"""

from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .corpus import UserHistory, format_timestamp
from .errors import AuthError, ProtocolError, TransportError, ValidationError


@dataclass
class DecisionLog:
    """Per-subject ordered (round, decision, score) entries."""

    entries: dict[str, list[tuple[int, int, float]]] = field(default_factory=dict)

    def append(self, subject_id: str, round_index: int, decision: int, score: float) -> None:
        rows = self.entries.setdefault(subject_id, [])
        if rows and round_index <= rows[-1][0]:
            raise ValidationError(f"rounds must increase for subject {subject_id!r}")
        if rows and rows[-1][1] == 1 and decision == 0:
            raise ValidationError("alerts are final")
        rows.append((round_index, int(decision), float(score)))

    def subjects(self) -> list[str]:
        return sorted(self.entries)

    def alert_round(self, subject_id: str) -> int | None:
        for round_index, decision, _ in self.entries.get(subject_id, ()):
            if decision == 1:
                return round_index
        return None

    def first_scores(self) -> dict[str, float]:
        """Score assigned after the first processed writing, per subject."""
        return {sid: rows[0][2] for sid, rows in self.entries.items() if rows}

    def to_csv(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(("subject_id", "round", "decision", "score"))
            for sid in sorted(self.entries):
                for round_index, decision, score in self.entries[sid]:
                    writer.writerow((sid, round_index, decision, repr(score)))

    @classmethod
    def from_csv(cls, path) -> "DecisionLog":
        log = cls()
        with Path(path).open(encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            if tuple(header) != ("subject_id", "round", "decision", "score"):
                raise ValidationError(f"unexpected decision CSV header in {path}")
            for sid, round_index, decision, score in reader:
                log.append(sid, int(round_index), int(decision), float(score))
        return log


class StreamEngine:
    """In-memory protocol state, one isolated lane per team token."""

    def __init__(self, histories: Sequence[UserHistory], tokens: Sequence[str] = ("local",)):
        self._posts = {
            h.subject_id: h.posts for h in histories if h.posts
        }
        if not self._posts:
            raise ValidationError("stream needs at least one subject with posts")
        self._teams = {token: self._new_team_state() for token in tokens}
        self._locks = {token: threading.Lock() for token in tokens}

    def _new_team_state(self) -> dict:
        return {
            "round": 0,
            "pending": set(),
            "finished": set(),
            "alerts": {},
            "log": DecisionLog(),
        }

    def _team(self, token: str) -> dict:
        try:
            return self._teams[token]
        except KeyError:
            raise AuthError(f"unknown team token {token!r}") from None

    def next_round(self, token: str) -> list[dict]:
        """Release the current round's writings; [] signals end of stream."""
        state = self._team(token)
        with self._locks[token]:
            if state["pending"]:
                raise ProtocolError("round incomplete: submit decisions for the pending round first")
            r = state["round"]
            writings = []
            for sid in sorted(self._posts):
                if sid in state["finished"]:
                    continue
                post = self._posts[sid][r]
                writings.append({
                    "subject_id": sid,
                    "round": r,
                    "title": post.title,
                    "text": post.text,
                    "date": format_timestamp(post.date),
                })
            state["pending"] = {w["subject_id"] for w in writings}
            return writings

    def submit_decisions(self, token: str, decisions: Sequence[Mapping]) -> int:
        """Atomically record one decision per pending subject; returns the
        round just answered."""
        state = self._team(token)
        with self._locks[token]:
            pending = state["pending"]
            if not pending:
                raise ProtocolError("no round in progress: fetch writings first")
            seen = set()
            parsed = []
            for row in decisions:
                sid = row.get("subject_id")
                if sid not in pending:
                    raise ProtocolError(f"unknown subject {sid!r} for this round")
                if sid in seen:
                    raise ProtocolError(f"duplicate decision for subject {sid!r}")
                seen.add(sid)
                decision = row.get("decision")
                if decision not in (0, 1):
                    raise ProtocolError(f"decision for {sid!r} must be 0 or 1")
                score = float(row.get("score", 0.0))
                if sid in state["alerts"] and decision == 0:
                    raise ProtocolError("alerts are final")
                parsed.append((sid, decision, score))
            missing = pending - seen
            if missing:
                raise ProtocolError(f"missing decisions for: {', '.join(sorted(missing))}")

            r = state["round"]
            for sid, decision, score in parsed:
                state["log"].append(sid, r, decision, score)
                if decision == 1 and sid not in state["alerts"]:
                    state["alerts"][sid] = r
                if r + 1 >= len(self._posts[sid]):
                    state["finished"].add(sid)
            state["pending"] = set()
            state["round"] = r + 1
            return r

    def alerts(self, token: str) -> dict[str, int]:
        return dict(self._team(token)["alerts"])

    def decision_log(self, token: str) -> DecisionLog:
        return self._team(token)["log"]


class LocalStreamClient:
    """In-process client; same surface as the HTTP client."""

    def __init__(self, engine: StreamEngine, token: str = "local"):
        self._engine = engine
        self.token = token

    def get_writings(self) -> list[dict]:
        return self._engine.next_round(self.token)

    def post_decisions(self, decisions: Sequence[Mapping]) -> int:
        return self._engine.submit_decisions(self.token, decisions)


class HttpStreamClient:
    """requests-based client for a served StreamEngine."""

    def __init__(self, base_url: str, token: str = "local", timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.timeout = timeout

    def _raise_for(self, response) -> None:
        if response.status_code == 401:
            raise AuthError(response.json().get("error", "unknown token"))
        if response.status_code == 409:
            raise ProtocolError(response.json().get("error", "protocol violation"))
        if response.status_code != 200:
            raise TransportError(f"unexpected status {response.status_code}",
                                 status=response.status_code)

    def get_writings(self) -> list[dict]:
        import requests

        try:
            response = requests.get(
                f"{self.base_url}/teams/{self.token}/writings", timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"GET writings failed: {exc}") from exc
        self._raise_for(response)
        return response.json()

    def post_decisions(self, decisions: Sequence[Mapping]) -> int:
        import requests

        try:
            response = requests.post(
                f"{self.base_url}/teams/{self.token}/decisions",
                json=list(decisions), timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"POST decisions failed: {exc}") from exc
        self._raise_for(response)
        return response.json()["round"]


class ClientInterrupted(TransportError):
    """Raised when the transport dies mid-run; carries resumable state."""

    def __init__(self, cause: TransportError, last_completed_round: int,
                 partial_log: DecisionLog, pending_decisions=None):
        super().__init__(f"interrupted after round {last_completed_round}: {cause}",
                         status=cause.status)
        self.last_completed_round = last_completed_round
        self.partial_log = partial_log
        self.pending_decisions = pending_decisions


def run_client(client, strategy: Callable[[list[dict]], list[dict]],
               resume: ClientInterrupted | None = None) -> DecisionLog:
    """Drive the protocol to end-of-stream with a per-round strategy.

    The strategy receives the round's writings and must return one
    {"subject_id", "decision", "score"} per writing.  On transport failure a
    :class:`ClientInterrupted` captures the last completed round, the partial
    log, and any not-yet-acknowledged decisions so a rerun against the same
    server can first retry the submission and then continue.
    """
    log = resume.partial_log if resume is not None else DecisionLog()
    last_completed = resume.last_completed_round if resume is not None else -1
    retry = resume.pending_decisions if resume is not None else None

    while True:
        retrying = retry is not None
        if retrying:
            decisions, round_index = retry
            retry = None
        else:
            try:
                writings = client.get_writings()
            except TransportError as exc:
                raise ClientInterrupted(exc, last_completed, log) from exc
            if not writings:
                return log
            round_index = writings[0]["round"]
            decisions = strategy(writings)
        try:
            client.post_decisions(decisions)
        except TransportError as exc:
            raise ClientInterrupted(exc, last_completed, log,
                                    pending_decisions=(decisions, round_index)) from exc
        except ProtocolError:
            if not retrying:
                raise
            # The interrupted submission was applied server-side; the lost
            # acknowledgement is the only thing to recover.
        for row in decisions:
            log.append(row["subject_id"], round_index, row["decision"], row["score"])
        last_completed = round_index


def _make_handler(engine: StreamEngine):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # keep test output quiet
            pass

        def _send(self, status: int, payload) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _route(self, method: str):
            parts = self.path.strip("/").split("/")
            if len(parts) != 3 or parts[0] != "teams":
                self._send(404, {"error": "not found"})
                return
            token, action = parts[1], parts[2]
            try:
                if method == "GET" and action == "writings":
                    self._send(200, engine.next_round(token))
                elif method == "POST" and action == "decisions":
                    length = int(self.headers.get("Content-Length", 0))
                    decisions = json.loads(self.rfile.read(length) or b"[]")
                    self._send(200, {"round": engine.submit_decisions(token, decisions)})
                else:
                    self._send(404, {"error": "not found"})
            except AuthError as exc:
                self._send(401, {"error": str(exc)})
            except ProtocolError as exc:
                self._send(409, {"error": str(exc)})
            except (ValueError, ValidationError) as exc:
                self._send(400, {"error": str(exc)})

        def do_GET(self):
            self._route("GET")

        def do_POST(self):
            self._route("POST")

    return Handler


def make_server(engine: StreamEngine, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Build (but do not start) an HTTP server wrapping the engine."""
    return ThreadingHTTPServer((host, port), _make_handler(engine))


def serve_forever(engine: StreamEngine, host: str = "127.0.0.1", port: int = 8800) -> None:
    server = make_server(engine, host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
