"""Read-only HTTP API over a knowledge base snapshot, plus static file
serving for the explorer frontend.

Endpoints: GET /api/triplets, /api/posts, /api/vocab, /api/health. Query
parameters mirror the Query fields in snake_case; repeatable facet keys are
OR within a type. Attribute facets use `attr=<type>:<value>`. Responses are
JSON with {results, total, offset, limit}; errors carry stable
machine-readable codes.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import posixpath
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .kb import KnowledgeBase
from .search import (
    DEFAULT_LIMIT,
    MODE_POSTS,
    MODE_TRIPLETS,
    Query,
    QueryError,
    query_posts,
    query_triplets,
)

log = logging.getLogger(__name__)


class BadParameterError(QueryError):
    code = "malformed_parameter"


def _int_param(params: dict, key: str) -> int | None:
    values = params.get(key)
    if not values:
        return None
    try:
        return int(values[-1])
    except ValueError as exc:
        raise BadParameterError(f"parameter {key!r} must be an integer") from exc


def query_from_params(mode: str, params: dict[str, list[str]]) -> Query:
    """Build a Query from parsed query-string parameters."""
    attribute_values = []
    for raw in params.get("attr", []):
        if ":" not in raw:
            raise BadParameterError(f"attr parameter must be '<type>:<value>', got {raw!r}")
        attr_name, _, value = raw.partition(":")
        attribute_values.append((attr_name, value))
    return Query(
        mode=mode,
        occasions=tuple(params.get("occasion", [])),
        genders=tuple(params.get("gender", [])),
        categories=tuple(params.get("category", [])),
        attribute_values=tuple(attribute_values),
        hashtags=tuple(t.lstrip("#").lower() for t in params.get("hashtag", [])),
        locations=tuple(params.get("location", [])),
        time_from=_int_param(params, "time_from"),
        time_to=_int_param(params, "time_to"),
        min_likes=_int_param(params, "min_likes"),
        min_comments=_int_param(params, "min_comments"),
        offset=_int_param(params, "offset") or 0,
        limit=_int_param(params, "limit") or DEFAULT_LIMIT,
    )


class KbRequestHandler(BaseHTTPRequestHandler):
    server_version = "fashionkb"
    protocol_version = "HTTP/1.1"

    # injected by make_server
    kb: KnowledgeBase = None  # type: ignore[assignment]
    corpus: dict | None = None
    static_dir: Path | None = None

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, code: str, message: str, extra: dict | None = None) -> None:
        payload = {"error": code, "message": message}
        if extra:
            payload.update(extra)
        self._send_json(status, payload)

    def do_GET(self):  # noqa: N802  (http.server API)
        split = urlsplit(self.path)
        path = split.path
        params = parse_qs(split.query, keep_blank_values=True)
        try:
            if path == "/api/health":
                self._send_json(200, {"status": "ok", "instances": len(self.kb)})
            elif path == "/api/vocab":
                self._send_json(200, self.kb.vocab.to_dict())
            elif path == "/api/triplets":
                q = query_from_params(MODE_TRIPLETS, params)
                self._send_json(200, query_triplets(self.kb, q).to_json())
            elif path == "/api/posts":
                q = query_from_params(MODE_POSTS, params)
                self._send_json(200, query_posts(self.kb, self.corpus, q).to_json())
            elif path.startswith("/api/"):
                self._send_error_json(404, "not_found", f"no such endpoint: {path}")
            else:
                self._serve_static(path)
        except QueryError as exc:
            extra = {}
            if hasattr(exc, "facet"):
                extra = {"facet": exc.facet, "value": exc.value, "valid_values": exc.valid}
            self._send_error_json(400, exc.code, str(exc), extra)
        except BrokenPipeError:
            pass

    def _serve_static(self, path: str) -> None:
        if self.static_dir is None:
            if path == "/":
                self._send_json(
                    200,
                    {
                        "service": "fashionkb",
                        "endpoints": ["/api/health", "/api/vocab", "/api/triplets", "/api/posts"],
                    },
                )
            else:
                self._send_error_json(404, "not_found", f"no static content at {path}")
            return
        clean = posixpath.normpath(path.lstrip("/")) or "index.html"
        if clean.startswith(".."):
            self._send_error_json(404, "not_found", "path escapes static root")
            return
        target = self.static_dir / clean
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_error_json(404, "not_found", f"no static content at {path}")
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(
    kb: KnowledgeBase,
    corpus: dict | None = None,
    addr: str = "127.0.0.1:8080",
    static_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Bind the service; the caller decides when to serve_forever()."""
    host, _, port_str = addr.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_str)
    except ValueError as exc:
        raise ValueError(f"bad bind address {addr!r}; expected host:port") from exc
    handler = type(
        "BoundKbRequestHandler",
        (KbRequestHandler,),
        {
            "kb": kb,
            "corpus": corpus,
            "static_dir": Path(static_dir) if static_dir else None,
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(
    kb: KnowledgeBase,
    corpus: dict | None = None,
    addr: str = "127.0.0.1:8080",
    static_dir: str | Path | None = None,
) -> None:
    server = make_server(kb, corpus, addr, static_dir)
    log.info("serving on http://%s:%s/", *server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
