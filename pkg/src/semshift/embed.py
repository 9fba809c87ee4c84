"""Embedding spaces: loading, vocabulary intersection and exact nearest neighbors."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmbeddingFormatError, UnknownWordError

logger = logging.getLogger(__name__)

FORMATS = ("word2vec-text", "headerless-text")

# rows scored per block when building neighbor lists; bounds memory at block * n floats
_BLOCK = 1024


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """Vocabulary plus a dense float64 matrix for one viewpoint."""

    id: str
    words: tuple[str, ...]
    vectors: np.ndarray
    vocab: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64, copy=True)
        if vectors.ndim != 2 or vectors.shape[0] != len(self.words):
            raise EmbeddingFormatError(
                f"vector matrix shape {vectors.shape} does not match {len(self.words)} words")
        if vectors.shape[1] < 1:
            raise EmbeddingFormatError("embedding dimension must be positive")
        vocab: dict[str, int] = {}
        for i, w in enumerate(self.words):
            if w in vocab:
                raise EmbeddingFormatError(f"duplicate word {w!r}")
            vocab[w] = i
        if not np.all(np.isfinite(vectors)):
            raise EmbeddingFormatError("non-finite value in vectors")
        zero = np.flatnonzero(np.linalg.norm(vectors, axis=1) == 0)
        if zero.size:
            raise EmbeddingFormatError(f"zero vector for word {self.words[zero[0]]!r}")
        vectors.setflags(write=False)
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "vocab", vocab)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def vector(self, word: str) -> np.ndarray:
        try:
            return self.vectors[self.vocab[word]]
        except KeyError:
            raise UnknownWordError(word, self.id) from None

    def rows(self, words: Iterable[str]) -> np.ndarray:
        """Stack the vectors of ``words`` (in order) into a matrix."""
        return self.vectors[[self._index(w) for w in words]]

    def unit_rows(self, words: Iterable[str]) -> np.ndarray:
        x = self.rows(words)
        return x / np.linalg.norm(x, axis=1, keepdims=True)

    def _index(self, word: str) -> int:
        try:
            return self.vocab[word]
        except KeyError:
            raise UnknownWordError(word, self.id) from None


@dataclass(frozen=True, eq=False)
class SharedVocab:
    """Lexicographically sorted intersection of two vocabularies."""

    words: tuple[str, ...]
    index0: dict[str, int]
    index1: dict[str, int]

    def __len__(self) -> int:
        return len(self.words)

    def position(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """Top-m neighbor lists for every shared word, restricted to the shared vocabulary.

    ``neighbors[i]`` holds positions into ``words`` for the neighbors of ``words[i]``,
    ordered by descending cosine, ties by ascending word. ``sims`` holds the matching
    cosine values. All lists have the same length ``k = min(m, len(words) - 1)``.
    """

    space_id: str
    m: int
    words: tuple[str, ...]
    neighbors: np.ndarray
    sims: np.ndarray

    @property
    def k(self) -> int:
        return self.neighbors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def neighbors_of(self, word: str) -> list[tuple[str, float]]:
        try:
            i = self._position[word]
        except KeyError:
            raise UnknownWordError(word, self.space_id) from None
        return [(self.words[j], float(s)) for j, s in zip(self.neighbors[i], self.sims[i])]

    @property
    def entries(self) -> dict[str, list[tuple[str, float]]]:
        return {w: self.neighbors_of(w) for w in self.words}

    @property
    def _position(self) -> dict[str, int]:
        pos = self.__dict__.get("_pos_cache")
        if pos is None:
            pos = {w: i for i, w in enumerate(self.words)}
            object.__setattr__(self, "_pos_cache", pos)
        return pos


def _parse_row(line: str, lineno: int, dim: int | None) -> tuple[str, list[float]]:
    parts = line.rstrip("\r\n").split(" ")
    parts = [p for p in parts if p != ""]
    if len(parts) < 2:
        raise EmbeddingFormatError("row has no values", lineno)
    word, values = parts[0], parts[1:]
    if dim is not None and len(values) != dim:
        raise EmbeddingFormatError(
            f"row arity {len(values)} != dim {dim}", lineno)
    try:
        floats = [float(v) for v in values]
    except ValueError as exc:
        raise EmbeddingFormatError(f"unparseable value ({exc})", lineno) from None
    if not all(math.isfinite(v) for v in floats):
        raise EmbeddingFormatError(f"non-finite value for {word!r}", lineno)
    if not any(floats):
        raise EmbeddingFormatError(f"zero vector for {word!r}", lineno)
    return word, floats


def load_embeddings(path: str | Path, format: str = "word2vec-text",
                    space_id: str | None = None) -> EmbeddingSpace:
    """Read a text embedding file.

    ``word2vec-text`` expects a ``"<n> <dim>"`` header; ``headerless-text`` infers
    the dimension from the first row. Every malformed row raises
    :class:`EmbeddingFormatError` carrying its 1-based line number.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    words: list[str] = []
    rows: list[list[float]] = []
    seen: dict[str, int] = {}
    dim = None
    expected_n = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and format == "word2vec-text":
                header = line.split()
                try:
                    expected_n, dim = (int(x) for x in header)
                except ValueError:
                    raise EmbeddingFormatError(
                        f"malformed header {line.strip()!r}; expected '<n> <dim>'", lineno) from None
                if expected_n < 0 or dim < 1:
                    raise EmbeddingFormatError(f"malformed header {line.strip()!r}", lineno)
                continue
            if not line.strip():
                continue
            word, values = _parse_row(line, lineno, dim)
            if dim is None:
                dim = len(values)
            if word in seen:
                raise EmbeddingFormatError(
                    f"duplicate word {word!r} (first seen on line {seen[word]})", lineno)
            seen[word] = lineno
            words.append(word)
            rows.append(values)
    if expected_n is not None and expected_n != len(words):
        raise EmbeddingFormatError(
            f"header declares {expected_n} rows but file has {len(words)}", 1)
    if not words:
        raise EmbeddingFormatError(f"no vectors in {path}")
    return EmbeddingSpace(space_id if space_id is not None else path.stem, tuple(words),
                          np.asarray(rows, dtype=np.float64))


def save_embeddings(space: EmbeddingSpace, path: str | Path,
                    format: str = "word2vec-text") -> None:
    """Write ``space`` as text using shortest round-trip float formatting."""
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}")
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        if format == "word2vec-text":
            fh.write(f"{len(space)} {space.dim}\n")
        for word, row in zip(space.words, space.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in row) + "\n")


def intersect_vocab(s0: EmbeddingSpace, s1: EmbeddingSpace) -> SharedVocab:
    words = tuple(sorted(set(s0.vocab) & set(s1.vocab)))
    return SharedVocab(words,
                       {w: s0.vocab[w] for w in words},
                       {w: s1.vocab[w] for w in words})


def cosine(space: EmbeddingSpace, a: str, b: str) -> float:
    u = space.vector(a)
    v = space.vector(b)
    c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return min(1.0, max(-1.0, c))


def _top_k_row(row: np.ndarray, k: int) -> np.ndarray:
    # candidates tied with the k-th value must all be kept so the stable sort
    # below can break ties by position (== lexicographic order of the shared vocab)
    if k < row.size:
        kth = np.partition(row, row.size - k)[row.size - k]
        cand = np.flatnonzero(row >= kth)
    else:
        cand = np.arange(row.size)
    order = np.argsort(-row[cand], kind="stable")
    return cand[order[:k]]


def build_neighbor_index(space: EmbeddingSpace, shared: SharedVocab, m: int) -> NeighborIndex:
    """Exact exhaustive top-``m`` cosine neighbors of each shared word, within the shared vocabulary."""
    if m < 1:
        raise ValueError(f"neighbor count m must be >= 1, got {m}")
    n = len(shared)
    if n == 0:
        raise ValueError("shared vocabulary is empty")
    unit = space.unit_rows(shared.words)
    k = min(m, n - 1)
    neighbors = np.empty((n, k), dtype=np.int64)
    sims = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, _BLOCK):
        stop = min(n, start + _BLOCK)
        block = unit[start:stop] @ unit.T
        np.clip(block, -1.0, 1.0, out=block)
        for r in range(stop - start):
            i = start + r
            row = block[r]
            row[i] = -np.inf
            top = _top_k_row(row, k)
            neighbors[i] = top
            sims[i] = row[top]
    neighbors.setflags(write=False)
    sims.setflags(write=False)
    return NeighborIndex(space.id, m, shared.words, neighbors, sims)


def generate_synthetic_space(n: int, dim: int, seed: int, space_id: str = "synthetic") -> EmbeddingSpace:
    """Deterministic unit-norm Gaussian directions named ``w0000``, ``w0001``, ..."""
    if n < 2 or dim < 2:
        raise ValueError("need n >= 2 and dim >= 2")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return EmbeddingSpace(space_id, synthetic_words(n), x)


def synthetic_words(n: int) -> tuple[str, ...]:
    width = max(4, len(str(n - 1)))
    return tuple(f"w{i:0{width}d}" for i in range(n))


def subspace(space: EmbeddingSpace, words: Sequence[str], space_id: str | None = None) -> EmbeddingSpace:
    return EmbeddingSpace(space_id or space.id, tuple(words), space.rows(words))
