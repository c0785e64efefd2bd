"""Chat-completions client with disk caching, retry, and batch dedup.

Speaks the OpenAI-compatible wire shape so any conforming endpoint works;
the endpoint URL is the full chat-completions URL. Responses are cached on
disk keyed by a content hash of (prompt, model, temperature), so recorded
batches replay offline with identical script ids.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import requests

from .model import Emotion, NVPhrase, Script, SeedWord, Session
from .promptgen import Exemplar, build_template, render_prompt

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class LLMError(Exception):
    pass


class LLMRequestError(LLMError):
    """Non-retryable HTTP failure or retries exhausted."""


class LLMResponseError(LLMError):
    """Response body did not match the chat-completions shape."""


class LLMBatchError(LLMError):
    """A whole batch produced no usable script."""


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    model_name: str
    temperature: float = 1.0
    max_tokens: int = 256

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @property
    def request_key(self) -> str:
        payload = json.dumps(
            [self.prompt, self.model_name, self.temperature],
            ensure_ascii=False, separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def body(self) -> dict:
        return {
            "model": self.model_name,
            "messages": [{"role": "user", "content": self.prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class GenerationBatchReport:
    requested: int
    returned: int
    deduplicated: int
    cached_hits: int
    failures: int

    def __post_init__(self) -> None:
        if self.returned != self.requested - self.failures:
            raise ValueError("returned must equal requested - failures")
        if self.deduplicated > self.returned:
            raise ValueError("deduplicated cannot exceed returned")

    def as_dict(self) -> dict:
        return {
            "requested": self.requested,
            "returned": self.returned,
            "deduplicated": self.deduplicated,
            "cached_hits": self.cached_hits,
            "failures": self.failures,
        }


class DiskCache:
    """One file per request key; file content is the raw response body."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def has(self, key: str) -> bool:
        return self._path(key).exists()

    def get(self, key: str) -> str | None:
        path = self._path(key)
        return path.read_text("utf-8") if path.exists() else None

    def put(self, key: str, body: str) -> None:
        with self._write_lock:
            self._path(key).write_text(body, "utf-8")


def _first_choice_text(body: str) -> str:
    try:
        parsed = json.loads(body)
        choice = parsed["choices"][0]
        if "message" in choice:
            return str(choice["message"]["content"])
        return str(choice["text"])
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise LLMResponseError(f"malformed completion body: {exc}") from None


def generate(
    req: GenerationRequest,
    endpoint: str,
    credentials: str,
    cache: DiskCache | None = None,
    *,
    max_attempts: int = 5,
    backoff_base: float = 1.0,
    backoff_factor: float = 2.0,
    timeout: float = 60.0,
    sleeper: Callable[[float], None] = time.sleep,
) -> str:
    """Return the first choice's text, consulting and filling the cache.

    429/5xx and transport timeouts are retried with exponential backoff
    (base 1 s, factor 2, at most max_attempts tries); other 4xx fail
    immediately. The credential value never appears in any error message.
    """
    if not endpoint:
        raise LLMRequestError("no endpoint configured")
    if not credentials:
        raise LLMRequestError("empty credentials")
    if cache is not None:
        cached = cache.get(req.request_key)
        if cached is not None:
            return _first_choice_text(cached)

    headers = {
        "Authorization": f"Bearer {credentials}",
        "Content-Type": "application/json",
    }
    last_error = "no attempt made"
    for attempt in range(max_attempts):
        try:
            response = requests.post(endpoint, json=req.body(), headers=headers, timeout=timeout)
        except (requests.Timeout, requests.ConnectionError) as exc:
            last_error = f"transport error: {type(exc).__name__}"
        else:
            if response.status_code == 200:
                body = response.text
                text = _first_choice_text(body)
                if cache is not None:
                    cache.put(req.request_key, body)
                return text
            if response.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {response.status_code}"
            else:
                raise LLMRequestError(
                    f"HTTP {response.status_code} from completion endpoint (not retried)"
                )
        if attempt < max_attempts - 1:
            sleeper(backoff_base * backoff_factor**attempt)
    raise LLMRequestError(f"giving up after {max_attempts} attempts: {last_error}")


_TEMPLATE_ECHO = re.compile(r"^(emotion|seed word|interjection)\s*[:：]", re.IGNORECASE)
_SCRIPT_LABEL = re.compile(r"^(script)\s*[:：]\s*", re.IGNORECASE)
_WRAPPING = [("「", "」"), ("『", "』"), ('"', '"'), ("“", "”")]


def extract_script(raw: str, expected_phrase: str | None = None) -> tuple[str | None, str]:
    """Trim a completion to the script text.

    Returns (text, "") on acceptance, (None, reason) on rejection.
    Rejections are data: batches count them, they never raise.
    """
    candidate = ""
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or _TEMPLATE_ECHO.match(line):
            continue
        candidate = _SCRIPT_LABEL.sub("", line).strip()
        if candidate:
            break
    for opening, closing in _WRAPPING:
        if candidate.startswith(opening) and candidate.endswith(closing) and len(candidate) > 1:
            candidate = candidate[len(opening) : -len(closing)].strip()
    if not candidate:
        return None, "empty"
    if expected_phrase is not None and expected_phrase not in candidate:
        return None, "phrase missing"
    return candidate, ""


@dataclass(frozen=True)
class GenerationSpec:
    emotion: Emotion
    session: Session
    seed: SeedWord
    phrase: NVPhrase | None = None

    def __post_init__(self) -> None:
        if self.session is Session.REGULAR and self.phrase is None:
            raise ValueError("regular generation spec needs a phrase")
        if self.session is Session.PHRASE_FREE and self.phrase is not None:
            raise ValueError("phrase in phrase-free generation spec")


class ScriptGenerator:
    """Drives prompt rendering and completion calls for batches of specs."""

    def __init__(
        self,
        endpoint: str,
        credentials: str,
        model_name: str,
        exemplars: dict[tuple[Emotion, Session], tuple[Exemplar, ...]],
        cache_dir: str | Path,
        temperature: float = 1.0,
        max_tokens: int = 256,
        exemplar_count: int = 3,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.credentials = credentials
        self.model_name = model_name
        self.exemplars = exemplars
        self.cache = DiskCache(cache_dir)
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.exemplar_count = exemplar_count
        self.sleeper = sleeper

    def request_for(self, spec: GenerationSpec) -> GenerationRequest:
        template = build_template(
            self.exemplars, spec.emotion, spec.session, n=self.exemplar_count
        )
        prompt = render_prompt(template, spec.emotion, spec.seed, spec.phrase)
        return GenerationRequest(
            prompt=prompt,
            model_name=self.model_name,
            temperature=self.temperature,
            max_tokens=self.max_tokens,
        )

    def _run_one(self, spec: GenerationSpec) -> tuple[Script | None, bool, str]:
        """Returns (script or None, was_cached, failure reason)."""
        req = self.request_for(spec)
        was_cached = self.cache.has(req.request_key)
        try:
            raw = generate(
                req, self.endpoint, self.credentials, self.cache, sleeper=self.sleeper
            )
        except LLMError as exc:
            return None, was_cached, str(exc)
        expected = spec.phrase.surface if spec.phrase is not None else None
        text, reason = extract_script(raw, expected_phrase=expected)
        if text is None:
            return None, was_cached, f"rejected: {reason}"
        script = Script.create(
            text=text,
            emotion=spec.emotion,
            session=spec.session,
            seed_word=spec.seed,
            nv_phrase=spec.phrase,
        )
        return script, was_cached, ""

    def run_batch(
        self, specs: list[GenerationSpec], concurrency: int = 1
    ) -> tuple[list[Script], GenerationBatchReport]:
        """Generate scripts for every spec, deduplicated by script id.

        At most `concurrency` requests are in flight. Per-spec failures are
        aggregated; the batch itself fails only when nothing was produced.
        """
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        if not specs:
            raise LLMBatchError("empty batch")
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            outcomes = list(pool.map(self._run_one, specs))

        scripts: list[Script] = []
        seen_ids: set[str] = set()
        cached_hits = 0
        failures = 0
        duplicates = 0
        for script, was_cached, _reason in outcomes:
            if was_cached:
                cached_hits += 1
            if script is None:
                failures += 1
            elif script.id in seen_ids:
                duplicates += 1
            else:
                seen_ids.add(script.id)
                scripts.append(script)
        report = GenerationBatchReport(
            requested=len(specs),
            returned=len(specs) - failures,
            deduplicated=duplicates,
            cached_hits=cached_hits,
            failures=failures,
        )
        if not scripts:
            reasons = sorted({reason for _, _, reason in outcomes if reason})
            raise LLMBatchError(f"batch produced no scripts: {reasons}")
        return scripts, report
