"""Shared fixtures: the fixture corpus, built pipelines, and a scripted HTTP stub."""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from durqa.corpus import Category, load_qa_dataset, parse_dur_csv
from durqa.pipeline import Pipeline

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


@pytest.fixture(scope="session")
def fixture_entries():
    entries = []
    for category in Category:
        raw = (FIXTURES / f"{category.value}.csv").read_bytes()
        entries.extend(parse_dur_csv(raw, category))
    return entries


@pytest.fixture(scope="session")
def fixture_dataset():
    return load_qa_dataset(FIXTURES / "qa_fixture.jsonl")


@pytest.fixture(scope="session")
def mock_pipeline(fixture_entries) -> Pipeline:
    return Pipeline.from_entries(fixture_entries)


class ScriptedHandler(BaseHTTPRequestHandler):
    """Plays back a per-test script of (status, body) responses."""

    script: list[tuple[int, dict]] = []
    requests: list[dict] = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        type(self).requests.append(
            {"path": self.path, "payload": payload, "headers": dict(self.headers)}
        )
        status, body = type(self).script.pop(0) if type(self).script else (200, {})
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *_args):
        pass


@pytest.fixture
def stub_server():
    handler = type("Handler", (ScriptedHandler,), {"script": [], "requests": []})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}", handler
    finally:
        server.shutdown()
        thread.join(timeout=5)
