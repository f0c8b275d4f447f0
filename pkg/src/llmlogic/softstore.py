"""Sentence store with exact cosine KNN, soft unification and abduction.

A query soft-unifies with every stored sentence among its ``k`` nearest
neighbours whose cosine distance is at most ``d_percent / 100``.  Each match
is recorded in an :class:`AbducedLedger`; exporting the ledger gives the
clauses ``q :- s`` and ``s :- true`` that make a plain Horn program answer the
same query the same way.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import httpx
import numpy as np

from .clauses import FALSE, TRUE, Program, quote

log = logging.getLogger(__name__)

MAGIC = b"SSV1"
_HEADER = struct.Struct("<4sIQ")   # magic, dimension, row count: 16 bytes


class StoreError(RuntimeError):
    pass


class EmbeddingError(StoreError):
    """The embedding endpoint failed or returned unusable vectors."""


class EmbeddingBackend(Protocol):
    name: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


_WORD = re.compile(r"[0-9a-z]+")


class HashingBackend:
    """Deterministic bag-of-words embedding for tests and offline use.

    Lowercase, split on non-alphanumerics, hash each token into one of
    ``dimension`` buckets, count, L2-normalize.
    """

    def __init__(self, dimension: int = 256):
        self.dimension = dimension
        self.name = f"hashing-{dimension}"

    def bucket(self, token: str) -> int:
        h = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(h, "little") % self.dimension

    def embed_one(self, text: str) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=np.float64)
        for tok in _WORD.findall(text.lower()):
            v[self.bucket(tok)] += 1.0
        n = np.sqrt(np.dot(v, v))
        if n > 0:
            v /= n
        return v

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for i, t in enumerate(texts):
            out[i] = self.embed_one(t)
        return out


class HttpEmbeddingBackend:
    """Client for an OpenAI-compatible ``POST {base}/v1/embeddings`` endpoint."""

    def __init__(self, base_url: str | None = None, model: str | None = None,
                 api_key: str | None = None, dimension: int | None = None,
                 timeout: float = 60.0, transport: httpx.BaseTransport | None = None):
        base = (base_url or os.environ.get("LLMLOGIC_EMBED_BASE_URL")
                or os.environ.get("LLMLOGIC_BASE_URL") or "https://api.openai.com").rstrip("/")
        if base.endswith("/v1"):
            base = base[:-3]
        self.base_url = base
        self.model = model or os.environ.get("LLMLOGIC_EMBED_MODEL") or "text-embedding-3-small"
        self.api_key = (api_key if api_key is not None else
                        os.environ.get("LLMLOGIC_API_KEY") or os.environ.get("OPENAI_API_KEY", ""))
        self.name = f"http:{self.model}"
        self.dimension = dimension or 0
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            r = self._client.post(f"{self.base_url}/v1/embeddings",
                                  json={"model": self.model, "input": list(texts)},
                                  headers=headers)
        except httpx.TransportError as e:
            raise EmbeddingError(f"embedding request failed: {e}") from e
        if r.status_code >= 400:
            raise EmbeddingError(f"embedding endpoint HTTP {r.status_code}: {r.text[:200]}")
        try:
            data = sorted(r.json()["data"], key=lambda d: d.get("index", 0))
            vecs = np.asarray([d["embedding"] for d in data], dtype=np.float64)
        except (ValueError, KeyError, TypeError, AttributeError):
            raise EmbeddingError(f"malformed embeddings payload: {r.text[:200]}") from None
        if vecs.shape[0] != len(texts):
            raise EmbeddingError("embedding endpoint returned the wrong number of vectors")
        if not np.all(np.isfinite(vecs)):
            raise EmbeddingError("embedding endpoint returned non-finite values")
        if self.dimension and vecs.shape[1] != self.dimension:
            raise EmbeddingError(f"expected dimension {self.dimension}, got {vecs.shape[1]}")
        self.dimension = vecs.shape[1]
        return vecs


def make_backend(name: str, **kw) -> EmbeddingBackend:
    if name.startswith("hashing"):
        _, _, d = name.partition("-")
        return HashingBackend(int(d) if d else 256)
    if name == "http" or name.startswith("http:"):
        model = name.partition(":")[2] or None
        return HttpEmbeddingBackend(model=model, **kw)
    raise ValueError(f"unknown embedding backend {name!r}")


# ---------------------------------------------------------------- store

class SentenceStore:
    def __init__(self, backend: EmbeddingBackend):
        self.backend = backend
        self.backend_name = backend.name
        self.dimension = backend.dimension
        self.sentences: list[str] = []
        self.vectors = np.zeros((0, backend.dimension), dtype=np.float64)
        self._index: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self.sentences)

    def add_sentences(self, texts: Iterable[str]) -> int:
        """Embed and append the texts not already stored; returns how many were added."""
        texts = list(texts)
        if not texts:
            raise StoreError("nothing to add")
        if self.backend.name != self.backend_name:
            raise StoreError(f"store uses backend {self.backend_name!r}, not {self.backend.name!r}")
        fresh = []
        for t in texts:
            t = t.strip()
            if t and t not in self._index and t not in fresh:
                fresh.append(t)
        if not fresh:
            return 0
        vecs = self.backend.embed(fresh)
        if self.dimension == 0:
            self.dimension = vecs.shape[1]
            self.vectors = np.zeros((0, self.dimension))
        if vecs.shape != (len(fresh), self.dimension):
            raise StoreError(f"backend produced vectors of shape {vecs.shape}, "
                             f"store dimension is {self.dimension}")
        for t in fresh:
            self._index[t] = len(self.sentences)
            self.sentences.append(t)
        self.vectors = np.vstack([self.vectors, vecs])
        return len(fresh)

    def distances(self, q: str) -> np.ndarray:
        """Cosine distance ``1 - cos`` from ``q`` to every stored sentence."""
        qv = self.backend.embed([q])[0]
        qn = np.sqrt((qv * qv).sum())
        norms = np.sqrt((self.vectors * self.vectors).sum(axis=1))
        denom = norms * qn
        # elementwise product + reduce avoids BLAS, whose summation order varies by platform
        dots = (self.vectors * qv).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            sim = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
        return np.clip(1.0 - sim, 0.0, 2.0)

    def knn(self, q: str, k: int) -> list[tuple[str, float]]:
        """Exact nearest neighbours, ascending distance, ties by insertion order."""
        if not self.sentences:
            raise StoreError("empty store")
        if k < 1:
            raise ValueError("k must be positive")
        d = self.distances(q)
        order = np.argsort(d, kind="stable")[:k]
        return [(self.sentences[i], float(d[i])) for i in order]

    # persistence: <stem>.sentences.txt and <stem>.vectors.bin

    @staticmethod
    def paths(stem) -> tuple[Path, Path]:
        stem = str(stem)
        return Path(stem + ".sentences.txt"), Path(stem + ".vectors.bin")

    def save(self, stem) -> None:
        spath, vpath = self.paths(stem)
        lines = [f"#!sentence-store backend={self.backend_name} dim={self.dimension}"]
        lines += [_escape_line(s) for s in self.sentences]
        spath.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with open(vpath, "wb") as f:
            f.write(_HEADER.pack(MAGIC, self.dimension, len(self.sentences)))
            f.write(np.ascontiguousarray(self.vectors, dtype="<f4").tobytes())

    @classmethod
    def load(cls, stem, backend: EmbeddingBackend | None = None) -> "SentenceStore":
        spath, vpath = cls.paths(stem)
        lines = spath.read_text(encoding="utf-8").split("\n")
        m = re.match(r"#!sentence-store backend=(\S+) dim=(\d+)$", lines[0])
        if not m:
            raise StoreError(f"{spath}: missing store header")
        name, dim = m.group(1), int(m.group(2))
        if backend is None:
            backend = make_backend(name)
        if backend.name != name:
            raise StoreError(f"store was built with backend {name!r}, not {backend.name!r}")
        sentences = [_unescape_line(x) for x in lines[1:] if x != ""]
        raw = vpath.read_bytes()
        magic, vdim, rows = _HEADER.unpack_from(raw)
        if magic != MAGIC or vdim != dim or rows != len(sentences):
            raise StoreError(f"{vpath}: header does not match {spath}")
        vecs = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=rows * dim)
        store = cls(backend)
        store.dimension = dim
        store.sentences = sentences
        store._index = {s: i for i, s in enumerate(sentences)}
        store.vectors = vecs.astype(np.float64).reshape(rows, dim)
        return store


def _escape_line(s: str) -> str:
    s = s.replace("\\", "\\\\").replace("\n", "\\n")
    return "\\" + s if s.startswith("#") else s


def _unescape_line(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: "\n" if m.group(1) == "n" else m.group(1), s)


def add_sentences(store: SentenceStore, texts: Iterable[str]) -> SentenceStore:
    store.add_sentences(texts)
    return store


def knn(store: SentenceStore, q: str, k: int) -> list[tuple[str, float]]:
    return store.knn(q, k)


# ---------------------------------------------------------------- soft unification

@dataclass(frozen=True)
class SoftQuery:
    q: str
    k: int = 3
    d_percent: int = 70

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0 <= self.d_percent <= 100:
            raise ValueError("d_percent outside [0, 100]")

    @property
    def bound(self) -> float:
        return self.d_percent / 100


class AbducedLedger:
    """``(query, sentence) -> distance`` for every soft match made so far."""

    def __init__(self):
        self.entries: dict[tuple[str, str], float] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, q: str, sentence: str, dist: float) -> None:
        self.entries[(q, sentence)] = dist

    def to_json(self) -> str:
        rows = [[q, s, d] for (q, s), d in self.entries.items()]
        return json.dumps(rows, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AbducedLedger":
        led = cls()
        for q, s, d in json.loads(text):
            led.record(q, s, float(d))
        return led

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "AbducedLedger":
        p = Path(path)
        return cls.from_json(p.read_text(encoding="utf-8")) if p.exists() else cls()


def soft_unify(store: SentenceStore, ledger: AbducedLedger | None, sq: SoftQuery) -> list[str]:
    """Sentences soft-unifying with ``sq.q``, closest first."""
    out = []
    for sent, dist in store.knn(sq.q, sq.k):
        if dist <= sq.bound:
            if ledger is not None:
                ledger.record(sq.q, sent, dist)
            out.append(sent)
    return out


def probability(dist: float) -> float:
    return max(0.0, 1.0 - dist)


def export_abduced(ledger: AbducedLedger) -> tuple[Program, str]:
    """Abduced clauses as a Horn program, plus a probability-annotated listing.

    A sentence that is itself used as a query elsewhere becomes a fact of the
    exported program, so keep query and sentence vocabularies apart when an
    exact replay of unanswered queries matters.
    """
    clauses: dict[tuple[str, str], None] = {}
    facts: dict[str, None] = {}
    for (q, s) in ledger.entries:
        for t in (q, s):
            if t.strip() in (TRUE, FALSE):
                raise StoreError(f"reserved atom {t!r} cannot be abduced")
        clauses[(q, s)] = None
        facts[s] = None
    pairs = [(q, [s]) for q, s in clauses] + [(s, ["true"]) for s in facts]
    program = Program.horn(pairs)
    lines = ["% abduced clauses; p = max(0, 1 - cosine distance)"]
    for (q, s) in clauses:
        lines.append(f"{probability(ledger.entries[(q, s)]):.4f} :: {quote(q)} :- {quote(s)}.")
    for s in facts:
        lines.append(f"1.0000 :: {quote(s)} :- 'true'.")
    return program, "\n".join(lines) + "\n"
