"""Oracles: a live chat-completions client, fixture replay, and capture.

Every pipeline talks to an oracle through ``ask(OracleRequest) -> OracleResponse``.
Replay fixtures make runs reproducible offline; capture mode records a live
session into a fixture that later replays it exactly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Protocol

import httpx

log = logging.getLogger(__name__)


class Purpose(str, Enum):
    EXPAND = "expand"
    FOLLOWUPS = "followups"
    ANSWER = "answer"
    RATE = "rate"
    GENERALIZE = "generalize"
    SVO = "svo"


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleRequest:
    purpose: Purpose
    goal_text: str
    trace: tuple[str, ...] = ()
    params: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "purpose", Purpose(self.purpose))
        object.__setattr__(self, "trace", tuple(self.trace))
        if len(set(self.trace)) != len(self.trace):
            raise ValueError("trace contains duplicate goals")


@dataclass(frozen=True)
class OracleResponse:
    items: tuple[str, ...] = ()
    rating: float | None = None
    raw: str = ""

    def to_json(self) -> dict:
        d: dict = {"items": list(self.items), "raw": self.raw}
        if self.rating is not None:
            d["rating"] = self.rating
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "OracleResponse":
        return cls(tuple(d.get("items", ())), d.get("rating"), d.get("raw", ""))


class Oracle(Protocol):
    def ask(self, req: OracleRequest) -> OracleResponse: ...


def request_key(req: OracleRequest) -> str:
    """Canonical fixture key: purpose, goal, and a hash of trace and params."""
    ctx = json.dumps([list(req.trace), sorted(req.params.items())], ensure_ascii=False)
    h = hashlib.sha256(ctx.encode("utf-8")).hexdigest()[:16]
    return f"{req.purpose.value}|{req.goal_text}|{h}"


# ---------------------------------------------------------------- reply parsing

_BULLET = re.compile(r"^\s*(?:[-*•]+|\d+[.)]|\(\d+\))\s*")
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")


def parse_items(text: str) -> tuple[str, ...]:
    """One item per non-empty line, list bullets and enclosing quotes removed."""
    items = []
    for line in text.splitlines():
        s = _BULLET.sub("", line).strip()
        if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
            s = s[1:-1].strip()
        if s:
            items.append(s)
    return tuple(items)


def parse_rating(text: str) -> float:
    """First number in the reply, clamped to [0, 100]; yes/no map to 100/0."""
    m = _NUMBER.search(text)
    if m:
        return min(100.0, max(0.0, float(m.group())))
    word = text.strip().lower()
    if word.startswith("yes"):
        return 100.0
    if word.startswith("no"):
        return 0.0
    raise OracleError(f"no rating in reply: {text[:80]!r}")


def parse_reply(purpose: Purpose, text: str) -> OracleResponse:
    if purpose is Purpose.RATE:
        return OracleResponse((), parse_rating(text), text)
    return OracleResponse(parse_items(text), None, text)


def accept(rating: float, threshold: float) -> bool:
    """Rater decision; the boundary is inclusive."""
    for name, x in (("rating", rating), ("threshold", threshold)):
        if not 0 <= x <= 100:
            raise ValueError(f"{name} {x} outside [0, 100]")
    return rating >= threshold


# ---------------------------------------------------------------- templates

def load_templates(path: str | os.PathLike | None = None) -> dict:
    if path is None:
        text = resources.files("llmlogic").joinpath("prompts.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def render_prompt(templates: Mapping, req: OracleRequest) -> str:
    tpl = templates[req.purpose.value]
    if isinstance(tpl, Mapping):
        variant = req.params.get("mode") or req.params.get("agent")
        tpl = tpl.get(variant) or next(iter(tpl.values()))
    fields = defaultdict(str, req.params)
    fields["goal"] = req.goal_text
    fields["trace"] = " > ".join(req.trace) if req.trace else "none"
    fields.setdefault("branching", "5")
    return tpl.format_map(fields)


# ---------------------------------------------------------------- replay

class ReplayFixture:
    """Recorded request -> response map, stored as JSON."""

    def __init__(self, entries: dict[str, OracleResponse] | None = None,
                 recorded_from: str | None = None):
        self.entries: dict[str, OracleResponse] = dict(entries or {})
        self.recorded_from = recorded_from

    def record(self, req: OracleRequest, resp: OracleResponse) -> None:
        self.entries[request_key(req)] = resp

    def lookup(self, req: OracleRequest) -> OracleResponse:
        try:
            return self.entries[request_key(req)]
        except KeyError:
            raise OracleError(f"no fixture entry for {request_key(req)!r}") from None

    def to_json(self) -> str:
        d = {"recorded_from": self.recorded_from,
             "entries": {k: self.entries[k].to_json() for k in sorted(self.entries)}}
        return json.dumps(d, indent=1, ensure_ascii=False, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReplayFixture":
        d = json.loads(text)
        entries = {k: OracleResponse.from_json(v) for k, v in d.get("entries", {}).items()}
        return cls(entries, d.get("recorded_from"))

    @classmethod
    def load(cls, path) -> "ReplayFixture":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


class ReplayOracle:
    """Answers only from a fixture; never touches the network."""

    def __init__(self, fixture: ReplayFixture):
        self.fixture = fixture

    @classmethod
    def from_file(cls, path) -> "ReplayOracle":
        return cls(ReplayFixture.load(path))

    def ask(self, req: OracleRequest) -> OracleResponse:
        return self.fixture.lookup(req)


class CaptureOracle:
    """Forwards to ``inner`` and records every exchange into ``path``."""

    def __init__(self, inner: Oracle, path, recorded_from: str | None = None):
        self.inner = inner
        self.path = Path(path)
        self.fixture = (ReplayFixture.load(self.path) if self.path.exists()
                        else ReplayFixture(recorded_from=recorded_from))
        self._lock = threading.Lock()

    def ask(self, req: OracleRequest) -> OracleResponse:
        resp = self.inner.ask(req)
        with self._lock:
            self.fixture.record(req, resp)
            self.fixture.save(self.path)
        return resp


class ScriptedOracle:
    """Oracle driven by a plain mapping, for tests and building fixtures.

    ``script`` maps ``(purpose, goal_text)`` to reply text; the reply is parsed
    exactly as a live reply would be.
    """

    def __init__(self, script: Mapping[tuple[str, str], str]):
        self.script = {(Purpose(p).value, g): t for (p, g), t in script.items()}
        self.calls: list[OracleRequest] = []

    def ask(self, req: OracleRequest) -> OracleResponse:
        self.calls.append(req)
        try:
            text = self.script[(req.purpose.value, req.goal_text)]
        except KeyError:
            raise OracleError(f"no scripted reply for {req.purpose.value}: {req.goal_text!r}") from None
        return parse_reply(req.purpose, text)


# ---------------------------------------------------------------- live client

_TRANSIENT = {408, 409, 425, 429, 500, 502, 503, 504}


class ChatOracle:
    """OpenAI-compatible ``/v1/chat/completions`` client.

    Configuration falls back to ``LLMLOGIC_BASE_URL``/``OPENAI_BASE_URL``,
    ``LLMLOGIC_API_KEY``/``OPENAI_API_KEY`` and ``LLMLOGIC_MODEL``.
    Transient failures (timeouts, connection errors, 429 and 5xx) are retried
    with exponential backoff.  At most ``max_in_flight`` requests run at once.
    """

    def __init__(self, base_url: str | None = None, model: str | None = None,
                 api_key: str | None = None, *, timeout: float = 60.0,
                 max_retries: int = 3, backoff: float = 0.5, temperature: float = 0.0,
                 max_in_flight: int = 4, templates: Mapping | None = None,
                 transport: httpx.BaseTransport | None = None):
        base = (base_url or os.environ.get("LLMLOGIC_BASE_URL")
                or os.environ.get("OPENAI_BASE_URL") or "https://api.openai.com")
        base = base.rstrip("/")
        if base.endswith("/v1"):
            base = base[:-3]
        self.base_url = base
        self.model = model or os.environ.get("LLMLOGIC_MODEL") or "gpt-4o-mini"
        self.api_key = (api_key if api_key is not None else
                        os.environ.get("LLMLOGIC_API_KEY") or os.environ.get("OPENAI_API_KEY", ""))
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.temperature = temperature
        self.templates = templates if templates is not None else load_templates()
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def messages(self, req: OracleRequest) -> list[dict]:
        return [{"role": "system", "content": self.templates.get("system", "")},
                {"role": "user", "content": render_prompt(self.templates, req)}]

    def complete(self, messages: list[dict]) -> str:
        url = f"{self.base_url}/v1/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {"model": self.model, "messages": messages, "temperature": self.temperature}
        last: Exception | None = None
        with self._slots:
            for attempt in range(self.max_retries + 1):
                if attempt:
                    time.sleep(self.backoff * 2 ** (attempt - 1))
                try:
                    r = self._client.post(url, json=body, headers=headers)
                except httpx.TransportError as e:
                    last = e
                    log.warning("chat request failed (%s), attempt %d", e, attempt + 1)
                    continue
                if r.status_code in _TRANSIENT:
                    last = OracleError(f"HTTP {r.status_code}: {r.text[:200]}")
                    log.warning("chat request got HTTP %d, attempt %d", r.status_code, attempt + 1)
                    continue
                if r.status_code >= 400:
                    raise OracleError(f"HTTP {r.status_code}: {r.text[:200]}")
                try:
                    return r.json()["choices"][0]["message"]["content"] or ""
                except (ValueError, KeyError, IndexError, TypeError):
                    raise OracleError(f"malformed completion payload: {r.text[:200]}") from None
        raise OracleError(f"giving up after {self.max_retries + 1} attempts: {last}")

    def ask(self, req: OracleRequest) -> OracleResponse:
        text = self.complete(self.messages(req))
        resp = parse_reply(req.purpose, text)
        if req.purpose is not Purpose.RATE and not resp.items:
            raise OracleError(f"empty reply for {req.purpose.value}: {req.goal_text!r}")
        return resp


def make_oracle(source: str, **client_kw) -> Oracle:
    """Build an oracle from ``live``, ``replay:<file>`` or ``capture:<file>``."""
    if source == "live":
        return ChatOracle(**client_kw)
    kind, _, path = source.partition(":")
    if kind == "replay" and path:
        return ReplayOracle.from_file(path)
    if kind == "capture" and path:
        client = ChatOracle(**client_kw)
        return CaptureOracle(client, path, recorded_from=f"{client.base_url} {client.model}")
    raise ValueError(f"bad oracle source {source!r}; expected live, replay:<file> or capture:<file>")
