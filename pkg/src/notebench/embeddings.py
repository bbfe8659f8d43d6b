"""Embedding-based semantic similarity with pluggable providers.

Each provider is declared by an :class:`EmbeddingProviderSpec` (id, dim,
endpoint, timeout).  A deterministic hashing provider ships with the
package so the whole pipeline runs offline; an HTTP provider talks to any
embeddings endpoint that accepts ``{"model": ..., "input": ...}`` and
returns ``data[0].embedding``.  Scores are reported per provider and are
never averaged across providers.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AllProvidersFailedError,
    DimMismatchError,
    EmptyTextError,
    ProviderUnavailableError,
    ZeroVectorError,
)
from .notes import EncounterPair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingProviderSpec:
    provider_id: str
    dim: int
    endpoint: str = ""
    model: str = ""
    credential_env: str = ""
    timeout_s: float = 30.0
    max_batch: int = 1
    max_chars: int = 32768

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")


@dataclass(frozen=True)
class EmbeddingVector:
    provider_id: str
    values: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


class VectorCache:
    """Content-addressed vector files: little-endian uint32 dim + float32s.

    Writes go through a temp file and an atomic rename, so concurrent
    readers never observe a torn file.
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()

    def _path(self, provider_id: str, content_hash: str) -> Path:
        return self.root / provider_id / f"{content_hash}.vec"

    def get(self, provider_id: str, content_hash: str) -> tuple[float, ...] | None:
        path = self._path(provider_id, content_hash)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            return None
        if len(blob) < 4:
            return None
        (dim,) = struct.unpack("<I", blob[:4])
        if len(blob) != 4 + 4 * dim:
            return None
        return struct.unpack(f"<{dim}f", blob[4:])

    def put(self, provider_id: str, content_hash: str, values: tuple[float, ...]) -> None:
        path = self._path(provider_id, content_hash)
        blob = struct.pack("<I", len(values)) + struct.pack(f"<{len(values)}f", *values)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp-{os.getpid()}-{threading.get_ident()}")
            tmp.write_bytes(blob)
            os.replace(tmp, path)


class EmbeddingProvider:
    """Base provider: spec plus a transport; counts outbound calls."""

    def __init__(self, spec: EmbeddingProviderSpec) -> None:
        self.spec = spec
        self.call_count = 0
        self._count_lock = threading.Lock()

    @property
    def provider_id(self) -> str:
        return self.spec.provider_id

    def _request(self, text: str) -> list[float]:
        raise NotImplementedError

    def fetch(self, text: str) -> list[float]:
        with self._count_lock:
            self.call_count += 1
        return self._request(text)


class HashingEmbeddingProvider(EmbeddingProvider):
    """Deterministic offline provider: signed token buckets, L2-normalized.

    Every token is hashed with sha256; bytes 0-3 (little-endian) pick the
    bucket, bit 0 of byte 4 picks the sign.  The accumulated vector is
    L2-normalized and cast to float32, so identical text always yields
    bit-identical vectors on every platform.
    """

    def __init__(
        self, provider_id: str = "hash-16", dim: int = 16, max_chars: int = 32768
    ) -> None:
        super().__init__(
            EmbeddingProviderSpec(provider_id=provider_id, dim=dim, max_chars=max_chars)
        )

    def _request(self, text: str) -> list[float]:
        dim = self.spec.dim
        acc = [0.0] * dim
        for token in text.lower().split():
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:4], "little") % dim
            sign = 1.0 if (digest[4] & 1) == 0 else -1.0
            acc[idx] += sign
        norm = sum(x * x for x in acc) ** 0.5
        if norm > 0.0:
            acc = [x / norm for x in acc]
        return [float(np.float32(x)) for x in acc]


class HttpEmbeddingProvider(EmbeddingProvider):
    """Client for an embeddings endpoint; credentials come from the env."""

    def _request(self, text: str) -> list[float]:
        import httpx

        headers = {}
        if self.spec.credential_env:
            token = os.environ.get(self.spec.credential_env, "")
            if not token:
                raise ProviderUnavailableError(
                    f"credential env var {self.spec.credential_env} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = httpx.post(
                self.spec.endpoint,
                json={"model": self.spec.model or self.spec.provider_id, "input": text},
                headers=headers,
                timeout=self.spec.timeout_s,
            )
            resp.raise_for_status()
            payload = resp.json()
        except ProviderUnavailableError:
            raise
        except Exception as exc:  # network, auth, malformed payload
            raise ProviderUnavailableError(str(exc)) from exc
        try:
            return [float(v) for v in payload["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailableError(f"malformed embedding payload: {exc}") from exc


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def embed(
    text: str,
    provider: EmbeddingProvider,
    cache: VectorCache | None = None,
) -> EmbeddingVector:
    """Embed one text, enforcing the provider's declared dimension.

    Text longer than the provider's max input is truncated (logged);
    results are cached keyed by (provider_id, content hash).
    """
    trimmed = text.strip()
    if not trimmed:
        raise EmptyTextError("cannot embed empty text")
    if len(trimmed) > provider.spec.max_chars:
        logger.warning(
            "truncating %d-char text to %d chars for provider %s",
            len(trimmed),
            provider.spec.max_chars,
            provider.provider_id,
        )
        trimmed = trimmed[: provider.spec.max_chars]

    key = content_hash(trimmed)
    if cache is not None:
        hit = cache.get(provider.provider_id, key)
        if hit is not None:
            return EmbeddingVector(provider_id=provider.provider_id, values=hit)

    values = tuple(provider.fetch(trimmed))
    if len(values) != provider.spec.dim:
        raise DimMismatchError(
            f"provider {provider.provider_id} returned dim {len(values)}, "
            f"declared {provider.spec.dim}"
        )
    if not all(np.isfinite(values)):
        raise ProviderUnavailableError(
            f"provider {provider.provider_id} returned non-finite values"
        )
    if cache is not None:
        cache.put(provider.provider_id, key, values)
    return EmbeddingVector(provider_id=provider.provider_id, values=values)


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """dot(u,v) / (‖u‖·‖v‖), clamped to [-1, 1] against rounding."""
    if u.dim != v.dim:
        raise DimMismatchError(f"dim {u.dim} vs {v.dim}")
    if u.provider_id != v.provider_id:
        raise DimMismatchError(
            f"vectors from different providers: {u.provider_id} vs {v.provider_id}"
        )
    ua, va = u.as_array(), v.as_array()
    nu = float(np.linalg.norm(ua))
    nv = float(np.linalg.norm(va))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine undefined for an all-zero vector")
    return float(np.clip(np.dot(ua, va) / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True)
class SemanticProfile:
    """Per-provider cosine scores for one pair, with isolated failures."""

    scores: dict[str, float] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)


def semantic_profile(
    pair: EncounterPair,
    providers: list[EmbeddingProvider],
    cache: VectorCache | None = None,
) -> SemanticProfile:
    """One cosine score per provider over the pair's raw texts.

    A failing provider is recorded with its reason and never aborts the
    others; only if every provider fails is the error raised.
    """
    if not providers:
        raise ValueError("providers must be non-empty")
    scores: dict[str, float] = {}
    failures: dict[str, str] = {}
    for provider in providers:
        try:
            u = embed(pair.machine_note.raw_text, provider, cache)
            v = embed(pair.clinician_note.raw_text, provider, cache)
            scores[provider.provider_id] = cosine(u, v)
        except Exception as exc:
            failures[provider.provider_id] = f"{type(exc).__name__}: {exc}"
    if not scores:
        raise AllProvidersFailedError(
            f"all providers failed for {pair.encounter_id}: {failures}"
        )
    return SemanticProfile(scores=scores, failures=failures)
