from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from aeroagent.world import Boundary, Obstacle, Scenario, Target, VehicleState


# One verdict line per end-to-end release criterion, filled in by
# test_acceptance.py and printed after capture is released.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)


def make_scenario(obstacles=(), target=(3.5, 2.25), object_class="drone",
                  start=(0.5, 2.25, 0.0), seed=0) -> Scenario:
    """Hand-built scenario for controlled tests; defaults to the stock
    7 x 4.5 arena with the vehicle at the west wall facing East."""
    return Scenario(
        boundary=Boundary(),
        obstacles=tuple(Obstacle(cx, cy) for cx, cy in obstacles),
        target=Target(target[0], target[1], object_class),
        start=VehicleState(start[0], start[1], 0.0, start[2]),
        seed=seed,
    )


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        try:
            doc = json.loads(body) if body else {}
        except json.JSONDecodeError:
            doc = {}
        status, payload = self.server.behavior(self.path, doc)  # type: ignore[attr-defined]
        if status is None:
            return  # behavior already handled the socket (e.g. hung)
        if isinstance(payload, (dict, list)):
            payload = json.dumps(payload).encode()
        elif isinstance(payload, str):
            payload = payload.encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


class StubServer:
    """Local HTTP stub: `behavior(path, body_json) -> (status, payload)`."""

    def __init__(self, behavior):
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self._httpd.behavior = behavior
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        daemon=True)
        self._thread.start()
        self.base_url = f"http://127.0.0.1:{self._httpd.server_address[1]}"

    def close(self):
        self._httpd.shutdown()
        self._httpd.server_close()


@pytest.fixture
def stub_server():
    servers = []

    def start(behavior) -> StubServer:
        server = StubServer(behavior)
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()
