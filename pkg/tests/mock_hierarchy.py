"""Local HTTP mock speaking the hierarchy wire contract.

``GET /hierarchy/{id}`` answers with the JSON array of nodes leaf first,
root last. The ``behavior`` knob simulates outages: ``error`` returns 500,
``timeout`` stalls past any sane client timeout, ``garbage`` returns broken
JSON. ``fail_next`` fails exactly N requests and then recovers, which is how
the retry budget is exercised.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args) -> None:  # keep test output quiet
        pass

    def do_GET(self) -> None:
        server: MockHierarchyServer = self.server.owner  # type: ignore[attr-defined]
        with server.lock:
            server.requests += 1
            fail_now = server.fail_next > 0
            if fail_now:
                server.fail_next -= 1
        behavior = server.behavior
        if fail_now or behavior == "error":
            self.send_error(500, "simulated outage")
            return
        if behavior == "timeout":
            time.sleep(server.stall_seconds)
        if behavior == "garbage":
            body = b"{not json"
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return

        prefix = "/hierarchy/"
        if not self.path.startswith(prefix):
            self.send_error(404, "unknown path")
            return
        external_id = self.path[len(prefix):]
        chain = []
        current: str | None = external_id
        while current is not None:
            node = server.nodes.get(current)
            if node is None:
                self.send_error(404, f"unknown entity {external_id}")
                return
            chain.append(
                {
                    "id": node["id"],
                    "label": node["label"],
                    "feature_code": node["feature_code"],
                    "parent_id": node.get("parent_id"),
                }
            )
            current = node.get("parent_id")
            if len(chain) > 64:
                self.send_error(500, "runaway chain")
                return
        body = json.dumps(chain).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class MockHierarchyServer:
    def __init__(self, nodes: dict[str, dict]):
        self.nodes = nodes
        self.behavior = "ok"
        self.stall_seconds = 1.0
        self.fail_next = 0
        self.requests = 0
        self.lock = threading.Lock()
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._httpd.owner = self  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    def start(self) -> "MockHierarchyServer":
        self._thread.start()
        return self

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
