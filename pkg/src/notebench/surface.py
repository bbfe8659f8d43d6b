"""Surface-level textual similarity: TF-IDF cosine, Jaccard, Levenshtein ratio.

All three metrics operate on raw note text, are symmetric, and map into
[0, 1].  Tokenization is lowercase split-on-non-alphanumeric; TF is raw
counts; IDF is the smoothed dataset-wide form ln((1+N)/(1+df)) + 1.
Levenshtein distance is exact unit-cost dynamic programming (no bands or
heuristics); the inner recurrence is vectorized with a prefix-minimum so
multi-kilobyte notes stay fast.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyCorpusError
from .notes import Corpus, EncounterPair

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> Counter:
    """Lowercase token multiset, splitting on any non-alphanumeric run."""
    return Counter(t for t in _TOKEN_RE.split(text.lower()) if t)


def token_set(text: str) -> frozenset[str]:
    """Distinct lowercased tokens of one document."""
    return frozenset(tokenize(text))


@dataclass(frozen=True)
class IdfTable:
    """Smoothed inverse document frequencies over the evaluation corpus."""

    idf: Mapping[str, float]
    n_docs: int

    def __call__(self, token: str) -> float:
        default = math.log(1.0 + self.n_docs) + 1.0  # df = 0
        return self.idf.get(token, default)


def build_idf(corpus: Corpus | Sequence[str]) -> IdfTable:
    """Build the IDF table over every note in the corpus (both authors).

    idf(t) = ln((1 + N) / (1 + df(t))) + 1 with N the document count.
    """
    docs: Sequence[str]
    if isinstance(corpus, Corpus):
        docs = corpus.all_texts()
    else:
        docs = list(corpus)
    if not docs:
        raise EmptyCorpusError("IDF table needs at least one document")
    n = len(docs)
    df: Counter = Counter()
    for doc in docs:
        df.update(token_set(doc))
    table = {t: math.log((1.0 + n) / (1.0 + d)) + 1.0 for t, d in df.items()}
    return IdfTable(idf=table, n_docs=n)


def tfidf_cosine(a: Counter, b: Counter, idf: IdfTable) -> float:
    """Cosine of the two TF·IDF-weighted vectors; 0 if either is all-zero.

    The shared vocabulary is iterated in sorted order so the score is
    bitwise symmetric in its arguments.
    """
    if not a or not b:
        return 0.0
    dot = 0.0
    for token in sorted(a.keys() & b.keys()):
        w = idf(token)
        dot += (a[token] * w) * (b[token] * w)
    norm_a = math.sqrt(sum((c * idf(t)) ** 2 for t, c in sorted(a.items())))
    norm_b = math.sqrt(sum((c * idf(t)) ** 2 for t, c in sorted(b.items())))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """|a ∩ b| / |a ∪ b| over token sets; 1.0 when both sets are empty."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def _codepoints(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)


def levenshtein_distance(a: str, b: str) -> int:
    """Exact unit-cost edit distance over characters.

    Row-wise DP; the in-row dependency cur[j] = min(m[j], cur[j-1]+1) is
    resolved with a prefix minimum over m[k]-k, which is algebraically
    identical to the scalar recurrence.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    # keep the shorter string on the vectorized axis's complement
    if len(b) < len(a):
        a, b = b, a
    bv = _codepoints(b)
    lb = len(b)
    offsets = np.arange(lb + 1, dtype=np.int64)
    prev = offsets.copy()
    base = np.empty(lb + 1, dtype=np.int64)
    for i, ch in enumerate(a, start=1):
        cost = (bv != ord(ch)).astype(np.int64)
        base[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=base[1:])
        np.minimum.accumulate(base - offsets, out=base)
        base += offsets
        prev, base = base, prev
    return int(prev[-1])


def levenshtein_ratio(a: str, b: str) -> float:
    """1 − d(a,b)/max(|a|,|b|); 1.0 when both strings are empty."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / longest


@dataclass(frozen=True)
class SurfaceScores:
    """The three surface similarity scores for one note pair."""

    tfidf_cosine: float
    jaccard: float
    levenshtein_ratio: float

    def as_dict(self) -> dict[str, float]:
        return {
            "tfidf_cosine": self.tfidf_cosine,
            "jaccard": self.jaccard,
            "levenshtein_ratio": self.levenshtein_ratio,
        }


def surface_profile(pair: EncounterPair, idf: IdfTable) -> SurfaceScores:
    """All three surface scores over the pair's raw texts."""
    text_m = pair.machine_note.raw_text
    text_c = pair.clinician_note.raw_text
    return SurfaceScores(
        tfidf_cosine=tfidf_cosine(tokenize(text_m), tokenize(text_c), idf),
        jaccard=jaccard(token_set(text_m), token_set(text_c)),
        levenshtein_ratio=levenshtein_ratio(text_m, text_c),
    )
