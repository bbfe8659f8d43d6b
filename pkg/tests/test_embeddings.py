"""Embedding providers, caching, and cosine similarity."""

from __future__ import annotations

import hashlib
import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from notebench.embeddings import (
    EmbeddingProvider,
    EmbeddingProviderSpec,
    EmbeddingVector,
    HashingEmbeddingProvider,
    VectorCache,
    cosine,
    embed,
    semantic_profile,
)
from notebench.errors import (
    AllProvidersFailedError,
    DimMismatchError,
    EmptyTextError,
    ProviderUnavailableError,
    ZeroVectorError,
)
from notebench.notes import Author, EncounterPair, parse_soap


class WrongDimProvider(EmbeddingProvider):
    """Declares dim 16 but returns 8 values."""

    def __init__(self):
        super().__init__(EmbeddingProviderSpec(provider_id="wrong", dim=16))

    def _request(self, text):
        return [0.1] * 8


class FailingProvider(EmbeddingProvider):
    def __init__(self, provider_id="down"):
        super().__init__(EmbeddingProviderSpec(provider_id=provider_id, dim=4))

    def _request(self, text):
        raise ProviderUnavailableError("synthetic outage")


def reference_hash_embedding(text: str, dim: int) -> list[float]:
    """Independent recomputation of the published hashing scheme."""
    acc = [0.0] * dim
    for token in text.lower().split():
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "little") % dim
        acc[bucket] += 1.0 if digest[4] % 2 == 0 else -1.0
    norm = math.sqrt(sum(v * v for v in acc))
    if norm:
        acc = [v / norm for v in acc]
    return [float(np.float32(v)) for v in acc]


class TestEmbed:
    def test_equal_texts_give_equal_vectors(self):
        provider = HashingEmbeddingProvider(dim=16)
        u = embed("sore throat for one week", provider)
        v = embed("sore throat for one week", provider)
        assert u.values == v.values
        assert u.dim == 16

    def test_dim_mismatch_detected(self):
        with pytest.raises(DimMismatchError):
            embed("anything", WrongDimProvider())

    def test_cache_serves_second_call(self, tmp_path):
        provider = HashingEmbeddingProvider(dim=16)
        cache = VectorCache(tmp_path / "cache")
        first = embed("cached text", provider, cache)
        assert provider.call_count == 1
        second = embed("cached text", provider, cache)
        assert provider.call_count == 1  # served from cache
        assert second.values == pytest.approx(first.values, abs=0)

    def test_cache_file_layout(self, tmp_path):
        provider = HashingEmbeddingProvider(dim=4)
        cache = VectorCache(tmp_path / "cache")
        vector = embed("abc def", provider, cache)
        files = list((tmp_path / "cache" / provider.provider_id).glob("*.vec"))
        assert len(files) == 1
        blob = files[0].read_bytes()
        (dim,) = struct.unpack("<I", blob[:4])
        assert dim == 4
        values = struct.unpack("<4f", blob[4:])
        assert values == pytest.approx(vector.values, abs=0)

    def test_empty_text_rejected(self):
        with pytest.raises(EmptyTextError):
            embed("   ", HashingEmbeddingProvider())

    def test_overlong_text_truncated(self, caplog):
        provider = HashingEmbeddingProvider(provider_id="tiny", dim=8, max_chars=10)
        with caplog.at_level("WARNING"):
            vector = embed("a " * 25, provider)
        assert vector.dim == 8
        assert any("truncating" in r.getMessage() for r in caplog.records)


class TestCosine:
    def _vec(self, values, pid="p"):
        return EmbeddingVector(provider_id=pid, values=tuple(float(v) for v in values))

    def test_identity(self):
        u = self._vec([0.3, 0.4, 0.5])
        assert cosine(u, u) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        assert cosine(self._vec([1, 0]), self._vec([0, 1])) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed(self):
        # dot = 32, norms sqrt(14) and sqrt(77)
        value = cosine(self._vec([1, 2, 3]), self._vec([4, 5, 6]))
        assert value == pytest.approx(0.9746318461970762, abs=1e-9)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            cosine(self._vec([0, 0]), self._vec([1, 1]))

    def test_dim_mismatch_rejected(self):
        with pytest.raises(DimMismatchError):
            cosine(self._vec([1, 2]), self._vec([1, 2, 3]))

    def test_provider_mismatch_rejected(self):
        with pytest.raises(DimMismatchError):
            cosine(self._vec([1, 2], "a"), self._vec([1, 2], "b"))

    @given(
        values=st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False).map(
                lambda x: round(x, 3)
            ),
            min_size=2,
            max_size=8,
        ),
        alpha=st.floats(min_value=0.01, max_value=100),
    )
    @settings(max_examples=150, deadline=None)
    def test_scale_invariance_and_bounds(self, values, alpha):
        if all(v == 0 for v in values) or all(v == -1.0 for v in values):
            return
        u = self._vec(values)
        v = self._vec([x + 1.0 for x in values])
        scaled = self._vec([alpha * x for x in values])
        assert abs(cosine(u, v)) <= 1.0
        assert cosine(scaled, v) == pytest.approx(cosine(u, v), abs=1e-9)
        assert cosine(u, v) == cosine(v, u)


class TestHashingProvider:
    def test_matches_independent_recomputation(self, appendix_pairs):
        provider = HashingEmbeddingProvider(dim=16)
        pair = appendix_pairs[1]
        got = embed(pair.machine_note.raw_text, provider)
        want = reference_hash_embedding(pair.machine_note.raw_text.strip(), 16)
        assert list(got.values) == want

    def test_bit_identical_across_instances(self):
        text = "Assessment: flank pain\nPlan: observation"
        a = embed(text, HashingEmbeddingProvider(dim=16)).values
        b = embed(text, HashingEmbeddingProvider(dim=16)).values
        assert a == b


class TestSemanticProfile:
    def _pair(self):
        note = "Assessment: flu\nPlan: rest and fluids"
        return EncounterPair(
            encounter_id="e1",
            machine_note=parse_soap(note, Author.MACHINE),
            clinician_note=parse_soap(note, Author.CLINICIAN),
        )

    def test_identical_texts_score_one(self):
        profile = semantic_profile(self._pair(), [HashingEmbeddingProvider(dim=16)])
        assert profile.scores["hash-16"] == pytest.approx(1.0, abs=1e-9)
        assert profile.failures == {}

    def test_failures_are_isolated(self):
        providers = [HashingEmbeddingProvider(dim=16), FailingProvider()]
        profile = semantic_profile(self._pair(), providers)
        assert set(profile.scores) == {"hash-16"}
        assert "down" in profile.failures

    def test_all_providers_failing_raises(self):
        with pytest.raises(AllProvidersFailedError):
            semantic_profile(self._pair(), [FailingProvider("a"), FailingProvider("b")])
