"""Scriptable HTTP test backends for models and the fuser.

Each model gets a behavior script: a response template (with {prompt}
expansion), an artificial delay, and an HTTP status. Deterministic, so
tests can assert exact texts.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


@dataclass
class Behavior:
    text: str = "echo: {prompt}"
    delay: float = 0.0
    status: int = 200


class _Handler(BaseHTTPRequestHandler):
    server: "MockModelServer"

    def log_message(self, *args):  # quiet
        pass

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        return json.loads(self.rfile.read(length) or b"{}")

    def _send(self, status: int, body: dict) -> None:
        blob = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)

    def do_POST(self):
        parts = self.path.strip("/").split("/")
        req = self._read_json()
        if parts[:1] == ["fuse"]:
            beh = self.server.fuser_behavior
            if beh.delay:
                time.sleep(beh.delay)
            if beh.status != 200:
                self._send(beh.status, {"error": "scripted failure"})
                return
            cands = req.get("candidates", [])
            self._send(200, {"text": beh.text.format(
                prompt=req.get("query", ""), joined=" | ".join(cands))})
            return
        if len(parts) == 3 and parts[0] == "models" and parts[2] == "generate":
            name = parts[1]
            beh = self.server.behaviors.get(name, Behavior())
            if beh.delay:
                time.sleep(beh.delay)
            if beh.status != 200:
                self._send(beh.status, {"error": "scripted failure"})
                return
            self._send(200, {"text": beh.text.format(prompt=req.get("prompt", ""))})
            return
        self._send(404, {"error": f"unknown path {self.path}"})


class MockModelServer:
    """Thread-backed HTTP server with per-model scripted behavior."""

    def __init__(self, behaviors: dict[str, Behavior] | None = None,
                 fuser_behavior: Behavior | None = None):
        self.behaviors = behaviors or {}
        self.fuser_behavior = fuser_behavior or Behavior(text="fused({joined})")
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._httpd.behaviors = self.behaviors  # type: ignore[attr-defined]
        self._httpd.fuser_behavior = self.fuser_behavior  # type: ignore[attr-defined]
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, daemon=True
        )

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    def endpoint(self, model_name: str) -> str:
        return f"http://127.0.0.1:{self.port}/models/{model_name}/generate"

    @property
    def fuser_endpoint(self) -> str:
        return f"http://127.0.0.1:{self.port}/fuse"

    def start(self) -> "MockModelServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "MockModelServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
