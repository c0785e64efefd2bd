from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from nvscript.model import Emotion, NVPhrase, Polarity, Script, SeedWord, Session


class StubServer:
    """Scriptable local HTTP server recording every request it sees.

    Route handlers take the parsed JSON body and return (status, payload);
    payload may be a dict (sent as JSON) or a raw string.
    """

    def __init__(self):
        self.routes: dict[str, object] = {}
        self.requests: list[tuple[str, dict]] = []
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with stub._lock:
                    stub.requests.append((self.path, body))
                    handler = stub.routes.get(self.path) or stub.routes.get("*")
                if handler is None:
                    status, payload = 404, {"error": "no route"}
                else:
                    status, payload = handler(body)
                raw = payload if isinstance(payload, str) else json.dumps(payload)
                data = raw.encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def request_count(self, path: str | None = None) -> int:
        with self._lock:
            if path is None:
                return len(self.requests)
            return sum(1 for p, _ in self.requests if p == path)

    def start(self) -> "StubServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()


def completion(text: str) -> tuple[int, dict]:
    return 200, {"choices": [{"message": {"content": text}}]}


@pytest.fixture
def stub_server():
    server = StubServer().start()
    yield server
    server.stop()


@pytest.fixture
def seed_word():
    def make(surface="うれしい", polarity=Polarity.POSITIVE) -> SeedWord:
        return SeedWord(surface=surface, polarity=polarity)

    return make


@pytest.fixture
def make_script(seed_word):
    """Scored-script factory for selection and io tests."""

    def make(
        text: str,
        emotion: Emotion = Emotion.HAPPINESS,
        session: Session = Session.PHRASE_FREE,
        combined: float | None = None,
        phrase_surface: str | None = None,
    ) -> Script:
        phrase = None
        if phrase_surface is not None:
            phrase = NVPhrase(id=f"p-{phrase_surface}", surface=phrase_surface, emotion=emotion)
        return Script.create(
            text=text,
            emotion=emotion,
            session=session,
            seed_word=seed_word(),
            nv_phrase=phrase,
            emotion_score_raw=None if combined is None else combined / 2,
            fluency_score_raw=None if combined is None else combined / 2,
            combined_score=combined,
        )

    return make


@pytest.fixture
def dict_file(tmp_path):
    """A small polarity dictionary on disk: kana words, all three buckets."""
    path = tmp_path / "dictionary.tsv"
    rows = [
        ("うれしい", "p"), ("たのしい", "p"), ("すてき", "p"), ("しあわせ", "p"),
        ("さいこう", "p"), ("やさしい", "p"), ("おいしい", "p"), ("きれい", "p"),
        ("ひどい", "n"), ("こわい", "n"), ("きたない", "n"), ("かなしい", "n"),
        ("つらい", "n"), ("くさい", "n"), ("ふあん", "n"), ("むかつく", "n"),
        ("つくえ", "e"), ("まど", "e"), ("でんしゃ", "e"), ("かばん", "e"),
        ("とけい", "e"), ("さかな", "e"), ("やま", "e"), ("かわ", "e"),
    ]
    path.write_text("\n".join(f"{w}\t{p}" for w, p in rows) + "\n", "utf-8")
    return path
