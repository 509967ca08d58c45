"""Read-only HTTP API over a frozen taxonomy snapshot.

Endpoints: ``/men2ent?mention=``, ``/getConcept?entity=``,
``/getEntity?concept=&offset=&limit=``.  Every response is a JSON
envelope ``{"status", "results", "total", "offset", "limit"}``.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .store import TaxonomyGraph

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 100
MAX_LIMIT = 1000

_ROUTES = {
    "/men2ent": ("mention", TaxonomyGraph.men2ent),
    "/getConcept": ("entity", TaxonomyGraph.get_concepts),
    "/getEntity": ("concept", TaxonomyGraph.get_entities),
}


class BadRequest(ValueError):
    pass


def _envelope(status: str, results: list, total: int, offset: int, limit: int, error: str | None = None) -> bytes:
    body = {"status": status, "results": results, "total": total, "offset": offset, "limit": limit}
    if error:
        body["error"] = error
    return json.dumps(body, ensure_ascii=False, sort_keys=True).encode("utf-8")


def _int_param(params: dict, name: str, default: int) -> int:
    values = params.get(name)
    if not values:
        return default
    try:
        value = int(values[0])
    except ValueError:
        raise BadRequest(f"{name} must be an integer") from None
    if value < 0:
        raise BadRequest(f"{name} must be non-negative")
    return value


def handle(graph: TaxonomyGraph, target: str) -> tuple[int, bytes]:
    """Answer one GET request target (path plus query string)."""
    url = urlsplit(target)
    route = _ROUTES.get(url.path)
    if route is None:
        return 404, _envelope("error", [], 0, 0, 0, f"unknown endpoint {url.path}")
    key, query = route
    params = parse_qs(url.query, keep_blank_values=True)
    try:
        values = params.get(key)
        if not values or not values[0]:
            raise BadRequest(f"missing query parameter {key!r}")
        offset = _int_param(params, "offset", 0)
        limit = min(_int_param(params, "limit", DEFAULT_LIMIT), MAX_LIMIT)
    except BadRequest as exc:
        return 400, _envelope("error", [], 0, 0, 0, str(exc))
    full = query(graph, values[0])
    return 200, _envelope("ok", full[offset:offset + limit], len(full), offset, limit)


class _Handler(BaseHTTPRequestHandler):
    server: "TaxonomyServer"

    def do_GET(self):
        status, body = handle(self.server.graph, self.path)
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        logger.debug("%s - " + fmt, self.address_string(), *args)


class TaxonomyServer(ThreadingHTTPServer):
    daemon_threads = False
    block_on_close = True  # shutdown drains in-flight requests

    def __init__(self, graph: TaxonomyGraph, address: tuple[str, int] = ("127.0.0.1", 8000)):
        self.graph = graph
        super().__init__(address, _Handler)

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def stop(self) -> None:
        self.shutdown()
        self.server_close()


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


def serve(graph: TaxonomyGraph, addr: str = "127.0.0.1:8000") -> None:
    server = TaxonomyServer(graph, parse_addr(addr))
    logger.info("serving %r on %s", graph, server.url)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
