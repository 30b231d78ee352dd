"""HTTP consultation service over a knowledge-base directory.

Endpoints (JSON unless noted):

    GET    /api/v1/models
    POST   /api/v1/sessions                      {"model": name}
    POST   /api/v1/sessions/{id}/findings        {"concept","property","value"}
    DELETE /api/v1/sessions/{id}/findings/{concept}[?property=..]
    GET    /api/v1/sessions/{id}/results
    GET    /api/v1/sessions/{id}/explanation?rule=NAME   (text/html)
    GET    /api/v1/kb/ontology | /api/v1/kb/rules        (canonical XML + ETag)
    PUT    /api/v1/kb/ontology | /api/v1/kb/rules        (admin, If-Match)
    POST   /api/v1/kb/lint
    GET    /ui/...                                        (static client)

Sessions live server-side, pinned to the snapshot that was current when
they were created; replacing a document swaps an entirely new snapshot and
never disturbs in-flight consultations. Mutating endpoints require the
admin token when one is configured (env RCSES_ADMIN_TOKEN).
"""
from __future__ import annotations

import argparse
import json
import logging
import mimetypes
import os
import re
import sys
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from . import builder
from .engine import Session, new_session, render_trace_html
from .errors import (
    NotAnswered,
    RcsesError,
    StaleKb,
    UnknownModel,
    UnknownRule,
    UnknownSlot,
    UnknownValue,
)
from .lexicon import check_rulebase
from .model import KbSnapshot
from .xmlio import parse_ontology, parse_rulebase, serialize_ontology, serialize_rulebase, snapshot

logger = logging.getLogger("rcses.service")

MAX_BODY = 8 * 1024 * 1024

_STATUS_BY_CODE = {
    UnknownModel.code: 422,
    UnknownSlot.code: 422,
    UnknownValue.code: 422,
    NotAnswered.code: 422,
    UnknownRule.code: 422,
    StaleKb.code: 409,
}


@dataclass
class ServiceConfig:
    kb_dir: str
    host: str = "127.0.0.1"
    port: int = 8323
    admin_token: str | None = None
    strict_kb: bool = False
    session_ttl: float = 3600.0
    session_capacity: int = 10000
    ui_dir: str | None = None


class KbStore:
    """Current snapshot plus atomic replace-and-persist."""

    def __init__(self, directory: str):
        self.directory = directory
        self._lock = threading.Lock()
        ontology_result, rules_result = builder.load_kb(directory)
        if not (ontology_result.ok and rules_result.ok):
            issues = ontology_result.errors() + rules_result.errors()
            detail = "; ".join(f"{i.path}: {i.message}" for i in issues[:5])
            raise RcsesError(f"knowledge base does not parse: {detail}")
        self._snapshot = snapshot(ontology_result.value, rules_result.value, version=1)

    @property
    def current(self) -> KbSnapshot:
        return self._snapshot

    def replace(self, kind: str, data: bytes) -> tuple[KbSnapshot | None, dict | None]:
        """Validate and swap one document; returns (snapshot, None) or
        (None, problem body)."""
        result = parse_ontology(data) if kind == "ontology" else parse_rulebase(data)
        if not result.ok:
            return None, {
                "error": "ParseFailed",
                "detail": f"the {kind} document does not parse",
                "issues": [issue.as_dict() for issue in result.issues],
            }
        with self._lock:
            base = self._snapshot
            ontology = result.value if kind == "ontology" else base.ontology
            rulebase = base.rulebase if kind == "ontology" else result.value
            report = check_rulebase(rulebase, ontology)
            if report.errors():
                return None, {
                    "error": "LintFailed",
                    "detail": f"the resulting knowledge base has {len(report.errors())} lint error(s)",
                    "violations": [v.as_dict() for v in report.violations],
                }
            with builder.kb_lock(self.directory):
                builder.save_kb(self.directory, ontology, rulebase)
            self._snapshot = snapshot(ontology, rulebase, version=base.version + 1)
            return self._snapshot, None


class SessionStore:
    """TTL-bounded, capacity-bounded map of live sessions."""

    def __init__(self, ttl: float, capacity: int):
        self.ttl = ttl
        self.capacity = capacity
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[Session, threading.Lock]] = {}

    def _purge(self, now: float):
        dead = [sid for sid, (s, _) in self._sessions.items() if now - s.last_active > self.ttl]
        for sid in dead:
            del self._sessions[sid]
        while len(self._sessions) >= self.capacity:
            oldest = min(self._sessions, key=lambda sid: self._sessions[sid][0].last_active)
            del self._sessions[oldest]

    def add(self, session: Session):
        with self._lock:
            self._purge(time.time())
            self._sessions[session.id] = (session, threading.Lock())

    def get(self, session_id: str) -> tuple[Session, threading.Lock] | None:
        with self._lock:
            entry = self._sessions.get(session_id)
            if entry is None:
                return None
            if time.time() - entry[0].last_active > self.ttl:
                del self._sessions[session_id]
                return None
            return entry

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


class _HttpError(Exception):
    def __init__(self, status: int, code: str, detail: str = "", body: dict | None = None):
        super().__init__(detail or code)
        self.status = status
        self.body = body if body is not None else {"error": code, "detail": detail or code}


class Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "rcses"

    # routing table: (method, compiled pattern, handler name)
    ROUTES = [
        ("GET", re.compile(r"^/api/v1/models$"), "models"),
        ("POST", re.compile(r"^/api/v1/sessions$"), "create_session"),
        ("POST", re.compile(r"^/api/v1/sessions/([^/]+)/findings$"), "post_finding"),
        ("DELETE", re.compile(r"^/api/v1/sessions/([^/]+)/findings/([^/]+)$"), "delete_finding"),
        ("GET", re.compile(r"^/api/v1/sessions/([^/]+)/results$"), "results"),
        ("GET", re.compile(r"^/api/v1/sessions/([^/]+)/explanation$"), "explanation"),
        ("GET", re.compile(r"^/api/v1/kb/(ontology|rules)$"), "get_document"),
        ("PUT", re.compile(r"^/api/v1/kb/(ontology|rules)$"), "put_document"),
        ("POST", re.compile(r"^/api/v1/kb/lint$"), "lint"),
    ]

    def log_message(self, format, *args):  # default noise -> debug
        logger.debug(format, *args)

    def _dispatch(self, method: str):
        started = time.perf_counter()
        status = 500
        parsed = urlparse(self.path)
        try:
            if method == "GET" and (parsed.path == "/" or parsed.path.startswith("/ui")):
                status = self._serve_ui(parsed.path)
                return
            for verb, pattern, name in self.ROUTES:
                if verb != method:
                    continue
                match = pattern.match(parsed.path)
                if match:
                    groups = [unquote(g) for g in match.groups()]
                    status = getattr(self, "api_" + name)(parsed, *groups)
                    return
            status = self._error(404, "NotFound", f"no route for {method} {parsed.path}")
        except _HttpError as exc:
            status = self._send_json(exc.status, exc.body)
        except RcsesError as exc:
            body = {"error": exc.code, "detail": exc.message}
            body.update(exc.details)  # echo offending slot/value fields
            status = self._send_json(_STATUS_BY_CODE.get(exc.code, 422), body)
        except Exception:  # pragma: no cover - last-resort guard
            logger.exception("unhandled error for %s %s", method, self.path)
            try:
                status = self._send_json(500, {"error": "Internal", "detail": "internal error"})
            except Exception:
                pass
        finally:
            millis = (time.perf_counter() - started) * 1000.0
            logger.info("%s %s %d %.1fms", method, parsed.path, status, millis)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_DELETE(self):
        self._dispatch("DELETE")

    # -- plumbing ---------------------------------------------------------

    @property
    def ctx(self) -> "ServiceContext":
        return self.server.ctx  # type: ignore[attr-defined]

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            raise _HttpError(413, "PayloadTooLarge", f"body exceeds {MAX_BODY} bytes")
        return self.rfile.read(length) if length else b""

    def _json_body(self) -> dict:
        raw = self._body()
        try:
            value = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _HttpError(400, "BadRequest", f"body is not valid JSON: {exc}") from None
        if not isinstance(value, dict):
            raise _HttpError(400, "BadRequest", "body must be a JSON object")
        return value

    def _send(self, status: int, content_type: str, payload: bytes, headers: dict | None = None) -> int:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        if payload:
            self.wfile.write(payload)
        return status

    def _send_json(self, status: int, obj, headers: dict | None = None) -> int:
        payload = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        return self._send(status, "application/json; charset=utf-8", payload, headers)

    def _error(self, status: int, code: str, detail: str, path: str | None = None) -> int:
        body = {"error": code, "detail": detail}
        if path is not None:
            body["path"] = path
        return self._send_json(status, body)

    def _session(self, session_id: str) -> tuple[Session, threading.Lock]:
        entry = self.ctx.sessions.get(session_id)
        if entry is None:
            raise _HttpError(404, "UnknownSession", f"no live session {session_id!r}")
        return entry

    def _require_admin(self):
        token = self.ctx.config.admin_token
        if token is None:
            return
        supplied = self.headers.get("Authorization") or ""
        if supplied.removeprefix("Bearer ").strip() != token:
            raise _HttpError(401, "Unauthorized", "missing or bad admin token")

    # -- endpoints ---------------------------------------------------------

    def api_models(self, parsed) -> int:
        kb = self.ctx.kb.current
        body = [
            {"model": model.name, "rule_count": len(model.rules)}
            for model in kb.rulebase.models
        ]
        return self._send_json(200, body)

    def api_create_session(self, parsed) -> int:
        body = self._json_body()
        model = body.get("model")
        if not isinstance(model, str) or not model:
            raise _HttpError(400, "BadRequest", 'body needs a "model" name')
        session = new_session(self.ctx.kb.current, model)
        self.ctx.sessions.add(session)
        body = {
            "session_id": session.id,
            "kb_version": session.kb_version,
            "model": session.model.name,
            # seed the client's wizard without a second round trip
            **self._assert_payload(session),
        }
        return self._send_json(201, body)

    def _assert_payload(self, session: Session) -> dict:
        return {
            "evaluation": session.evaluate().as_dict(),
            "next_questions": [q.as_dict() for q in session.next_questions(5)],
        }

    def api_post_finding(self, parsed, session_id: str) -> int:
        body = self._json_body()
        concept = body.get("concept")
        value = body.get("value")
        prop = body.get("property", "Value")
        if not concept or value is None:
            raise _HttpError(400, "BadRequest", 'body needs "concept" and "value"')
        session, lock = self._session(session_id)
        if self.ctx.config.strict_kb and session.kb_version != self.ctx.kb.current.version:
            raise StaleKb(
                f"session pins kb v{session.kb_version}, current is v{self.ctx.kb.current.version}"
            )
        with lock:
            session.assert_finding(concept, prop, value)
            payload = self._assert_payload(session)
        return self._send_json(200, payload)

    def api_delete_finding(self, parsed, session_id: str, concept: str) -> int:
        params = parse_qs(parsed.query)
        prop = params.get("property", ["Value"])[0]
        session, lock = self._session(session_id)
        with lock:
            session.retract_finding(concept, prop)
            payload = self._assert_payload(session)
        return self._send_json(200, payload)

    def api_results(self, parsed, session_id: str) -> int:
        session, _ = self._session(session_id)
        return self._send_json(200, session.evaluate().as_dict())

    def api_explanation(self, parsed, session_id: str) -> int:
        params = parse_qs(parsed.query)
        rule = params.get("rule", [None])[0]
        if not rule:
            raise _HttpError(400, "BadRequest", "query needs ?rule=NAME")
        session, _ = self._session(session_id)
        fragment = render_trace_html(session.explain(rule))
        return self._send(200, "text/html; charset=utf-8", fragment.encode("utf-8"))

    def api_get_document(self, parsed, kind: str) -> int:
        kb = self.ctx.kb.current
        document = serialize_ontology(kb.ontology) if kind == "ontology" else serialize_rulebase(kb.rulebase)
        return self._send(
            200,
            "application/xml; charset=utf-8",
            document.data,
            {"ETag": f'"{kb.fingerprint}"', "X-Kb-Version": str(kb.version)},
        )

    def api_put_document(self, parsed, kind: str) -> int:
        self._require_admin()
        expected = self.headers.get("If-Match")
        if expected is not None:
            current = self.ctx.kb.current.fingerprint
            if expected.strip().strip('"') != current:
                raise _HttpError(409, "EtagMismatch", "the knowledge base changed underneath you")
        updated, problem = self.ctx.kb.replace(kind, self._body())
        if problem is not None:
            raise _HttpError(422, problem["error"], problem["detail"], body=problem)
        return self._send(
            204, "application/json", b"",
            {"ETag": f'"{updated.fingerprint}"', "X-Kb-Version": str(updated.version)},
        )

    def api_lint(self, parsed) -> int:
        kb = self.ctx.kb.current
        report = check_rulebase(kb.rulebase, kb.ontology)
        return self._send_json(200, report.as_dict())

    # -- static UI ----------------------------------------------------------

    def _serve_ui(self, path: str) -> int:
        if path in ("/", "/ui"):
            return self._send(308, "text/plain", b"", {"Location": "/ui/"})
        root = self.ctx.config.ui_dir
        if root is None:
            return self._error(404, "NotFound", "no UI bundle configured")
        relative = path.removeprefix("/ui/") or "index.html"
        target = (Path(root) / relative).resolve()
        if not str(target).startswith(str(Path(root).resolve())) or not target.is_file():
            # SPA fallback keeps client-side routes working
            target = Path(root) / "index.html"
            if not target.is_file():
                return self._error(404, "NotFound", f"no such asset {relative!r}")
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        if content_type.startswith("text/") or content_type in ("application/javascript", "application/json"):
            content_type += "; charset=utf-8"
        return self._send(200, content_type, target.read_bytes())


@dataclass
class ServiceContext:
    config: ServiceConfig
    kb: KbStore
    sessions: SessionStore


class Server(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, config: ServiceConfig):
        self.ctx = ServiceContext(
            config=config,
            kb=KbStore(config.kb_dir),
            sessions=SessionStore(ttl=config.session_ttl, capacity=config.session_capacity),
        )
        super().__init__((config.host, config.port), Handler)
        report = check_rulebase(self.ctx.kb.current.rulebase, self.ctx.kb.current.ontology)
        if not report.ok:
            logger.warning(
                "knowledge base has lint findings: %s",
                ", ".join(f"{code}={count}" for code, count in sorted(report.counts.items())),
            )

    @property
    def base_url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="rcses-server", description="consultation HTTP service")
    parser.add_argument("--kb", required=True, help="knowledge-base directory")
    parser.add_argument("--listen", default="127.0.0.1:8323", help="host:port (port 0 picks one)")
    parser.add_argument("--session-ttl", type=float, default=3600.0)
    parser.add_argument("--strict-kb", action="store_true",
                        help="reject asserts on sessions pinned to an outdated KB")
    parser.add_argument("--ui", default=None, help="directory with the built web client")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    host, _, port = args.listen.rpartition(":")
    config = ServiceConfig(
        kb_dir=args.kb,
        host=host or "127.0.0.1",
        port=int(port),
        admin_token=os.environ.get("RCSES_ADMIN_TOKEN") or None,
        strict_kb=args.strict_kb,
        session_ttl=args.session_ttl,
        ui_dir=args.ui,
    )
    try:
        server = Server(config)
    except RcsesError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2
    print(f"listening on {server.base_url}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
