"""Corpus preprocessing: tokenization, bigram merging, frequencies and TF-IDF."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SemshiftError

_TOKEN = re.compile(r"\w+")

SparseVector = dict  # word -> weight, zero weights never stored


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class FrequencyTable:
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, word: str) -> int:
        return self.counts.get(word, 0)


@dataclass(frozen=True)
class DocumentFrequencies:
    df: dict[str, int]
    n_docs: int

    def idf(self, word: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df.get(word, 0))) + 1.0


def tokenize(text: str) -> list[str]:
    """Lowercase and split on anything other than letters, digits and underscore."""
    return _TOKEN.findall(text.lower())


def read_corpus(path: str | Path) -> list[Document]:
    """Read ``id<TAB>label<TAB>raw text`` lines; an empty label means unlabeled."""
    docs = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise SemshiftError(f"{path}:{lineno}: expected 'id<TAB>label<TAB>text'")
            doc_id, label, text = parts
            docs.append(Document(doc_id, tokenize(text), label or None))
    return docs


def write_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(f"{d.id}\t{d.label or ''}\t{' '.join(d.tokens)}\n")


def bigram_scores(docs: Sequence[Document], delta: float = 5.0) -> dict[tuple[str, str], float]:
    """``(count(ab) - delta) / (count(a) * count(b))`` for every adjacent pair."""
    unigrams: Counter = Counter()
    bigrams: Counter = Counter()
    for d in docs:
        unigrams.update(d.tokens)
        bigrams.update(zip(d.tokens, d.tokens[1:]))
    return {(a, b): (c - delta) / (unigrams[a] * unigrams[b]) for (a, b), c in bigrams.items()}


def detect_phrases(docs: Sequence[Document], delta: float = 5.0,
                   threshold: float = 1e-4) -> list[Document]:
    """Merge adjacent pairs scoring above ``threshold`` into ``a_b`` tokens.

    One scoring pass over the whole corpus, then a greedy left-to-right,
    non-overlapping merge inside each document.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    scores = bigram_scores(docs, delta)
    out = []
    for d in docs:
        toks = d.tokens
        merged = []
        i = 0
        while i < len(toks):
            if i + 1 < len(toks) and scores.get((toks[i], toks[i + 1]), -math.inf) > threshold:
                merged.append(f"{toks[i]}_{toks[i + 1]}")
                i += 2
            else:
                merged.append(toks[i])
                i += 1
        out.append(replace(d, tokens=tuple(merged)))
    return out


def count_frequencies(docs: Iterable[Document]) -> FrequencyTable:
    counts: Counter = Counter()
    for d in docs:
        counts.update(d.tokens)
    return FrequencyTable(dict(counts))


def document_frequencies(docs: Sequence[Document]) -> DocumentFrequencies:
    df: Counter = Counter()
    for d in docs:
        df.update(set(d.tokens))
    return DocumentFrequencies(dict(df), len(docs))


def tfidf_vector(doc: Document, df_table: DocumentFrequencies) -> SparseVector:
    if not doc.tokens:
        return {}
    length = len(doc.tokens)
    tf = Counter(doc.tokens)
    return {w: c * df_table.idf(w) / length for w, c in sorted(tf.items())}


def tfidf_vectorize(docs: Sequence[Document], df_table: DocumentFrequencies) -> list[SparseVector]:
    """Length-normalized TF-IDF with smoothed idf ``ln((1 + N) / (1 + df)) + 1``."""
    return [tfidf_vector(d, df_table) for d in docs]
