"""Provider access for every model-backed step, with deterministic offline modes.

Three modes share one call surface:
  live   - HTTPS chat-completion call with bounded retries and a concurrency
           cap; every successful response is written to the replay cache.
  replay - responses served from the on-disk cache by idempotency key; a cold
           key is an error, never a network call.
  stub   - canned deterministic responses per purpose, for tests.

The idempotency key hashes the request content (purpose, messages, decoding
parameters). Image attachments are hashed by reference, not pixel content.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import httpx

from chartkit._util import canonical_json, sha256_hex
from chartkit.errors import ProviderError, ReplayMiss, SchemaViolation, Timeout
from chartkit.prompts import PURPOSES

_ROLES = ("system", "user", "assistant")

ENV_ENDPOINT = "CHARTKIT_ENDPOINT"
ENV_API_KEY = "CHARTKIT_API_KEY"
ENV_MODEL = "CHARTKIT_MODEL"


@dataclass(frozen=True)
class Message:
    role: str
    text: str
    image_ref: str | None = None  # at most one image per message

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise SchemaViolation("role", f"unknown role {self.role!r}")
        if not isinstance(self.text, str):
            raise SchemaViolation("text", "must be a string")


@dataclass(frozen=True)
class ModelRequest:
    purpose: str
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_output_tokens: int = 2048

    def __post_init__(self) -> None:
        if self.purpose not in PURPOSES:
            raise SchemaViolation("purpose", f"unknown purpose {self.purpose!r}")
        if not self.messages:
            raise SchemaViolation("messages", "must be non-empty")

    def idempotency_key(self) -> str:
        doc = {
            "purpose": self.purpose,
            "messages": [
                {"role": m.role, "text": m.text, "image_ref": m.image_ref}
                for m in self.messages
            ],
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
        }
        return sha256_hex(canonical_json(doc))[:32]


@dataclass(frozen=True)
class ModelResponse:
    text: str
    finish: str = "stop"
    latency_s: float = 0.0
    provider: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.text, str):
            raise SchemaViolation("text", "must be a string")


# Canned plotting script for stub chart-to-code calls. Plain pyplot so the
# render harness can drive backend, DPI, and saving itself.
STUB_CHART_SCRIPT = """\
import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(4, 3))
ax.bar(["2020", "2021", "2022"], [3, 5, 4], color="#4878d0", label="north")
ax.set_title("Revenue")
ax.set_xlabel("Year")
ax.set_ylabel("USD")
ax.legend()
"""

# Canned "evolved" script: everything goes through standard artists so element
# locations are recoverable from the figure.
STUB_EVOLVED_SCRIPT = """\
import matplotlib.pyplot as plt

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
years = [2020, 2021, 2022]
ax1.bar([str(y) for y in years], [3, 5, 4], color="#4878d0", label="north")
ax1.set_title("Revenue")
ax1.set_xlabel("Year")
ax1.set_ylabel("USD")
ax1.legend()
ax2.plot(years, [1.0, 2.5, 2.0], marker="o", color="#d65f5f", label="west")
ax2.set_title("Growth")
ax2.set_xlabel("Year")
ax2.set_ylabel("Rate")
ax2.legend()
fig.tight_layout()
"""

_STUB_QA_PAIRS = [
    {"question": "What is the title of the left subplot?", "answer": "Revenue", "scope": "local"},
    {"question": "How many subplots does the chart contain?", "answer": "2", "scope": "global"},
    {"question": "What is the tallest bar's year?", "answer": "2021", "scope": "local"},
    {"question": "What is the y-axis label of the left subplot?", "answer": "USD", "scope": "local"},
    {"question": "What is the sum of all bar values?", "answer": "12", "scope": "global"},
    {"question": "Which series is shown in the right subplot?", "answer": "west", "scope": "local"},
    {"question": "What is the growth rate in 2021?", "answer": "2.5", "scope": "local"},
    {"question": "Do both subplots share the same x-axis label?", "answer": "yes", "scope": "global"},
    {"question": "What is the answer to everything?", "answer": "42", "scope": "global"},
    {"question": "What is the x-axis label of the right subplot?", "answer": "Year", "scope": "local"},
]

_STUB_JUDGE_VERDICT = json.dumps(
    {
        "data": 5,
        "plot type structure": 5,
        "axes scales and limits": 5,
        "text elements": 5,
        "styling": 5,
    }
)


def _find_json_array(text: str) -> list | None:
    decoder = json.JSONDecoder()
    idx = text.find("[")
    while idx != -1:
        try:
            doc, _ = decoder.raw_decode(text, idx)
            if isinstance(doc, list):
                return doc
        except json.JSONDecodeError:
            pass
        idx = text.find("[", idx + 1)
    return None


def _stub_text(req: ModelRequest) -> str:
    joined = "\n".join(m.text for m in req.messages)
    # Only basenames: callers pass paths, and directory names are noise.
    image_refs = " ".join(os.path.basename(m.image_ref or "") for m in req.messages)
    if req.purpose == "filter":
        if "faithful or distorted" in joined:
            return "distorted" if "distort" in image_refs else "faithful"
        return "non-chart" if "nonchart" in image_refs else "chart"
    if req.purpose == "chart_to_code":
        return f"```python\n{STUB_CHART_SCRIPT}```"
    if req.purpose == "evolve":
        return f"Here is the rewritten script.\n```python\n{STUB_EVOLVED_SCRIPT}```"
    if req.purpose == "qa_generate":
        return json.dumps(_STUB_QA_PAIRS, ensure_ascii=False)
    if req.purpose == "verify":
        pairs = _find_json_array(joined)
        n = len(pairs) if pairs is not None else 10
        return json.dumps([{"groundable": True, "answerable": True, "correct": True}] * n)
    if req.purpose == "judge":
        return _STUB_JUDGE_VERDICT
    # difficulty_probe
    return "<think>stub probe</think><answer>42</answer>"


class ModelClient:
    """Shareable client; live mode caps concurrent requests with a semaphore."""

    def __init__(
        self,
        mode: str = "stub",
        cache_dir: str | Path | None = None,
        endpoint: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        max_in_flight: int = 4,
        timeout_s: float = 60.0,
        retry_backoff_s: float = 0.5,
        purpose_endpoints: Mapping[str, str] | None = None,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        if mode not in ("live", "replay", "stub"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "replay" and cache_dir is None:
            raise ValueError("replay mode needs a cache_dir")
        self.mode = mode
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        self.api_key = api_key or os.environ.get(ENV_API_KEY)
        self.model = model or os.environ.get(ENV_MODEL, "default")
        self.timeout_s = timeout_s
        self.retry_backoff_s = retry_backoff_s
        self.purpose_endpoints = dict(purpose_endpoints or {})
        self._semaphore = threading.Semaphore(max_in_flight)
        self._transport = transport
        self._http: httpx.Client | None = None
        self._http_lock = threading.Lock()

    def complete(self, req: ModelRequest) -> ModelResponse:
        if self.mode == "stub":
            return ModelResponse(text=_stub_text(req), provider={"mode": "stub"})
        key = req.idempotency_key()
        if self.mode == "replay":
            cached = self._cache_read(key)
            if cached is None:
                raise ReplayMiss(key)
            return cached
        resp = self._complete_live(req)
        if self.cache_dir is not None:
            self._cache_write(key, req, resp)
        return resp

    # -- cache ---------------------------------------------------------------

    def _cache_path(self, key: str) -> Path:
        assert self.cache_dir is not None
        return self.cache_dir / f"{key}.json"

    def _cache_read(self, key: str) -> ModelResponse | None:
        path = self._cache_path(key)
        if not path.exists():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        r = doc["response"]
        return ModelResponse(
            text=r["text"],
            finish=r.get("finish", "stop"),
            latency_s=0.0,
            provider={"mode": "replay", "key": key},
        )

    def _cache_write(self, key: str, req: ModelRequest, resp: ModelResponse) -> None:
        assert self.cache_dir is not None
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        doc = {
            "request": {
                "purpose": req.purpose,
                "messages": [
                    {"role": m.role, "text": m.text, "image_ref": m.image_ref}
                    for m in req.messages
                ],
                "temperature": req.temperature,
                "max_output_tokens": req.max_output_tokens,
            },
            "response": {"text": resp.text, "finish": resp.finish},
        }
        # Atomic publish: a concurrent reader sees either nothing or the
        # complete file, never a torn write.
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, ensure_ascii=False)
            os.replace(tmp, self._cache_path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- live ----------------------------------------------------------------

    def _client(self) -> httpx.Client:
        with self._http_lock:
            if self._http is None:
                self._http = httpx.Client(
                    timeout=self.timeout_s, transport=self._transport
                )
            return self._http

    def _payload(self, req: ModelRequest) -> dict[str, Any]:
        messages = []
        for m in req.messages:
            if m.image_ref is None:
                content: Any = m.text
            else:
                content = [
                    {"type": "text", "text": m.text},
                    {"type": "image_url", "image_url": {"url": m.image_ref}},
                ]
            messages.append({"role": m.role, "content": content})
        return {
            "model": self.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }

    def _complete_live(self, req: ModelRequest) -> ModelResponse:
        endpoint = self.purpose_endpoints.get(req.purpose, self.endpoint)
        if not endpoint:
            raise ProviderError(0, f"no endpoint configured (set {ENV_ENDPOINT})")
        url = endpoint.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = self._payload(req)

        attempts = 3
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.retry_backoff_s * (2 ** (attempt - 1)))
            start = time.monotonic()
            try:
                with self._semaphore:
                    r = self._client().post(url, json=payload, headers=headers)
            except httpx.TimeoutException as e:
                last_error = Timeout(f"model call timed out after {self.timeout_s}s")
                last_error.__cause__ = e
                continue
            except httpx.HTTPError as e:
                last_error = ProviderError(0, f"transport failure: {e}")
                continue
            latency = time.monotonic() - start
            if r.status_code >= 500 or r.status_code == 429:
                last_error = ProviderError(r.status_code, r.text[:200])
                continue
            if r.status_code != 200:
                raise ProviderError(r.status_code, r.text[:200])
            try:
                doc = r.json()
                choice = doc["choices"][0]
                text = choice["message"]["content"]
                finish = choice.get("finish_reason", "stop")
                if not isinstance(text, str):
                    raise TypeError("content is not a string")
            except (KeyError, IndexError, TypeError, ValueError) as e:
                raise ProviderError(r.status_code, f"malformed provider response: {e}") from e
            return ModelResponse(
                text=text,
                finish=finish or "stop",
                latency_s=latency,
                provider={"mode": "live", "status": r.status_code},
            )
        assert last_error is not None
        raise last_error

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def __enter__(self) -> "ModelClient":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()
