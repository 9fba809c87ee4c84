"""Downstream uses of stability scores.

Contrastive summaries, class-conditional document expansion with a linear
hinge-loss text classifier, precision/recall/F1, and correlation of
instability with frequency, polysemy and concreteness.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Document, DocumentFrequencies, FrequencyTable, document_frequencies, tfidf_vectorize
from .embed import NeighborIndex
from .errors import SemshiftError, UnknownWordError
from .stability import StabilityReport

logger = logging.getLogger(__name__)


# --- contrastive summaries --------------------------------------------------

@dataclass(frozen=True)
class ViewpointSummary:
    concept: str
    side0: tuple[str, ...]
    side1: tuple[str, ...]
    threshold: float

    def to_dict(self) -> dict:
        return {"concept": self.concept, "threshold": self.threshold,
                "side0": list(self.side0), "side1": list(self.side1)}

    def to_text(self, width: int = 24) -> str:
        rows = [f"{'side0':<{width}}side1"]
        for i in range(max(len(self.side0), len(self.side1))):
            a = self.side0[i] if i < len(self.side0) else ""
            b = self.side1[i] if i < len(self.side1) else ""
            rows.append(f"{a:<{width}}{b}")
        return "\n".join(rows)


def _summary_side(concept: str, index: NeighborIndex, report: StabilityReport,
                  threshold: float, l: int) -> tuple[str, ...]:
    picked = []
    for word, _sim in index.neighbors_of(concept):
        if len(picked) >= l:
            break
        if word in report and report.score(word) <= threshold:
            picked.append(word)
    return tuple(picked)


def summarize_viewpoints(concept: str, idx0: NeighborIndex, idx1: NeighborIndex,
                         report: StabilityReport, threshold: float, l: int = 5) -> ViewpointSummary:
    """Up to ``l`` unstable neighbors of ``concept`` per side, most similar first.

    The indexes only hold shared-vocabulary words, so the overlap filter is
    implicit; the stability filter keeps words scoring at most ``threshold``.
    """
    if l < 0:
        raise ValueError("summary length must be >= 0")
    if concept not in report:
        raise UnknownWordError(concept, "stability report")
    return ViewpointSummary(concept,
                            _summary_side(concept, idx0, report, threshold, l),
                            _summary_side(concept, idx1, report, threshold, l),
                            threshold)


def summary_is_sound(summary: ViewpointSummary, idx0: NeighborIndex, idx1: NeighborIndex,
                     report: StabilityReport, l: int) -> bool:
    """Post-hoc check: every word is a top-m neighbor of its side and at most the threshold."""
    for side, idx in ((summary.side0, idx0), (summary.side1, idx1)):
        if len(side) > l:
            return False
        neigh = [w for w, _ in idx.neighbors_of(summary.concept)]
        pos = {w: i for i, w in enumerate(neigh)}
        if any(w not in pos or report.score(w) > summary.threshold for w in side):
            return False
        if [pos[w] for w in side] != sorted(pos[w] for w in side):
            return False
    return True


# --- document expansion -----------------------------------------------------

@dataclass(frozen=True)
class ExpandConfig:
    theta: float = 0.25
    n: int = 5

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")


def expand_document(doc: Document, class_index: NeighborIndex, report: StabilityReport,
                    cfg: ExpandConfig) -> Document:
    """Append, for every unstable token, its ``n`` most similar unstable neighbors.

    A token is unstable when its score is at most ``theta``. Each occurrence is
    expanded. Tokens absent from the report or the class index stay unexpanded.
    The appended block follows the original tokens, in neighbor order.
    """
    if cfg.n == 0:
        return doc
    words = set(class_index.words)
    extra: list[str] = []
    cache: dict[str, list[str]] = {}
    for tok in doc.tokens:
        if tok not in words or tok not in report or report.score(tok) > cfg.theta:
            continue
        if tok not in cache:
            picked = []
            for nb, _sim in class_index.neighbors_of(tok):
                if nb in report and report.score(nb) <= cfg.theta:
                    picked.append(nb)
                    if len(picked) == cfg.n:
                        break
            cache[tok] = picked
        extra.extend(cache[tok])
    if not extra:
        return doc
    return replace(doc, tokens=doc.tokens + tuple(extra))


# --- linear classifier ------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    reg: float = 1e-4
    batch_size: int = 16
    seed: int = 0


@dataclass(frozen=True, eq=False)
class LinearTextModel:
    vocab: tuple[str, ...]
    coef: np.ndarray
    bias: float
    classes: tuple[str, str]
    df_table: DocumentFrequencies
    epochs: int = 0
    final_hinge_loss: float = float("nan")

    @property
    def weights(self) -> dict[str, float]:
        return {w: float(c) for w, c in zip(self.vocab, self.coef)}

    def decision(self, doc: Document) -> float:
        vec = tfidf_vectorize([doc], self.df_table)[0]
        pos = self.__dict__.get("_pos")
        if pos is None:
            pos = {w: i for i, w in enumerate(self.vocab)}
            object.__setattr__(self, "_pos", pos)
        norm = math.sqrt(sum(x * x for x in vec.values()))
        if norm == 0:
            return self.bias
        return float(sum(self.coef[pos[w]] * x for w, x in vec.items() if w in pos) / norm + self.bias)


def _design_matrix(vectors, vocab_pos) -> sp.csr_matrix:
    indptr, indices, data = [0], [], []
    for vec in vectors:
        for w, x in vec.items():
            j = vocab_pos.get(w)
            if j is not None:
                indices.append(j)
                data.append(x)
        indptr.append(len(indices))
    X = sp.csr_matrix((data, indices, indptr), shape=(len(vectors), len(vocab_pos)))
    # unit rows: keeps the constant bias feature on the same scale as the text features
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    return sp.diags(1.0 / norms) @ X


def train_classifier(train: Sequence[Document], cfg: TrainConfig = TrainConfig()) -> LinearTextModel:
    """L2-regularized hinge loss, mini-batch subgradient descent with 1/(reg*t) steps.

    TF-IDF rows are scaled to unit length before training and prediction.
    The bias is an extra, regularized, constant feature. Batches follow a
    seeded permutation per epoch, so a fixed seed gives identical weights.
    The returned weights average the iterates of the second half of training.
    """
    labels = sorted({d.label for d in train if d.label is not None})
    if len(labels) != 2:
        raise SemshiftError(f"need exactly two classes, found {labels}")
    docs = [d for d in train if d.label is not None]
    empty = [d.id for d in docs if not d.tokens]
    if empty:
        raise SemshiftError(f"labeled training document {empty[0]!r} has no tokens")
    df_table = document_frequencies(docs)
    vocab = tuple(sorted(df_table.df))
    pos = {w: i for i, w in enumerate(vocab)}
    X = _design_matrix(tfidf_vectorize(docs, df_table), pos)
    X = sp.hstack([X, np.ones((X.shape[0], 1))], format="csr")
    y = np.array([1.0 if d.label == labels[1] else -1.0 for d in docs])

    rng = np.random.default_rng(cfg.seed)
    n, dim = X.shape
    w = np.zeros(dim)
    radius = 1.0 / math.sqrt(cfg.reg)
    t = 0
    avg = np.zeros(dim)
    n_avg = 0
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for s in range(0, n, cfg.batch_size):
            batch = perm[s:s + cfg.batch_size]
            t += 1
            eta = 1.0 / (cfg.reg * t)
            Xb, yb = X[batch], y[batch]
            viol = yb * (Xb @ w) < 1.0
            grad = cfg.reg * w
            if viol.any():
                grad = grad - (Xb[viol].T @ yb[viol]) / len(batch)
            w = w - eta * grad
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            if 2 * epoch >= cfg.epochs:
                avg += w
                n_avg += 1
    w = avg / n_avg if n_avg else w
    hinge = float(np.mean(np.maximum(0.0, 1.0 - y * (X @ w))))
    return LinearTextModel(vocab, w[:-1].copy(), float(w[-1]), (labels[0], labels[1]), df_table,
                           cfg.epochs, hinge)


def classify(model: LinearTextModel, doc: Document) -> str:
    """Positive decision value -> second class; zero or negative -> first class."""
    return model.classes[1] if model.decision(doc) > 0 else model.classes[0]


def evaluate_prf(pairs: Sequence[tuple[str, str]], positive: str) -> tuple[float, float, float]:
    """Precision, recall and F1 of ``positive`` from (gold, predicted) pairs."""
    if not pairs:
        raise ValueError("no predictions to evaluate")
    tp = sum(1 for g, p in pairs if g == positive and p == positive)
    pred_pos = sum(1 for _, p in pairs if p == positive)
    gold_pos = sum(1 for g, _ in pairs if g == positive)
    precision = tp / pred_pos if pred_pos else 0.0
    recall = tp / gold_pos if gold_pos else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


# --- expansion experiment ---------------------------------------------------

THETA_PERCENTILES = tuple(range(10, 100, 10))


@dataclass
class ExpansionResult:
    method: str
    precision: float
    recall: float
    f1: float
    theta: float | None
    dev_f1: dict[float, float] = field(default_factory=dict)
    # (gold, predicted) for every test document, in input order
    predictions: list[tuple[str, str]] = field(default_factory=list, repr=False)


def split_documents(docs: Sequence[Document], seed: int, dev_frac: float = 0.1,
                    test_frac: float = 0.1) -> tuple[list[Document], list[Document], list[Document]]:
    """Seeded shuffle into train / dev / test."""
    order = np.random.default_rng(seed).permutation(len(docs))
    n_test = int(round(len(docs) * test_frac))
    n_dev = int(round(len(docs) * dev_frac))
    shuffled = [docs[i] for i in order]
    return shuffled[n_test + n_dev:], shuffled[n_test:n_test + n_dev], shuffled[:n_test]


def expand_training_set(train: Sequence[Document], class_indexes: Mapping[str, NeighborIndex],
                        report: StabilityReport, cfg: ExpandConfig) -> list[Document]:
    return [expand_document(d, class_indexes[d.label], report, cfg) if d.label in class_indexes else d
            for d in train]


def _fit_and_score(train, evaluate, positive, train_cfg):
    model = train_classifier(train, train_cfg)
    pairs = [(d.label, classify(model, d)) for d in evaluate]
    return evaluate_prf(pairs, positive), pairs


def theta_grid(report: StabilityReport, percentiles: Sequence[int] = THETA_PERCENTILES) -> list[float]:
    return [float(np.percentile(report.values, q)) for q in percentiles]


def run_expansion(train: Sequence[Document], dev: Sequence[Document], test: Sequence[Document],
                  class_indexes: Mapping[str, NeighborIndex], report: StabilityReport | None,
                  positive: str, n: int = 5, theta: float | None = None,
                  train_cfg: TrainConfig = TrainConfig(), method: str | None = None) -> ExpansionResult:
    """Train on (optionally expanded) training documents; test documents stay raw.

    Without a report this is the unexpanded baseline. With a report and no
    ``theta``, theta is picked by dev-set F1 over a percentile grid of the
    scores (ties keep the lower threshold).
    """
    if report is None:
        (p, r, f1), pairs = _fit_and_score(train, test, positive, train_cfg)
        return ExpansionResult(method or "none", p, r, f1, None, predictions=pairs)
    dev_f1: dict[float, float] = {}
    if theta is None:
        best = None
        for cand in theta_grid(report):
            if cand in dev_f1:
                continue
            expanded = expand_training_set(train, class_indexes, report, ExpandConfig(cand, n))
            (_, _, f1), _ = _fit_and_score(expanded, dev, positive, train_cfg)
            dev_f1[cand] = f1
            if best is None or f1 > dev_f1[best]:
                best = cand
        theta = best
    expanded = expand_training_set(train, class_indexes, report, ExpandConfig(theta, n))
    (p, r, f1), pairs = _fit_and_score(expanded, test, positive, train_cfg)
    return ExpansionResult(method or report.method, p, r, f1, theta, dev_f1, pairs)


def unstable_fraction(doc: Document, report: StabilityReport, theta: float) -> float:
    scored = [t for t in doc.tokens if t in report]
    if not scored:
        return 0.0
    return sum(1 for t in scored if report.score(t) < theta) / len(scored)


def accuracy_by_bin(pairs: Sequence[tuple[str, str]], fractions: Sequence[float],
                    n_bins: int = 10) -> list[tuple[float, float, int, float]]:
    """(lo, hi, count, accuracy) per equal-width bin of unstable-token fraction."""
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    rows = []
    for b in range(n_bins):
        lo, hi = edges[b], edges[b + 1]
        members = [i for i, f in enumerate(fractions)
                   if lo <= f < hi or (b == n_bins - 1 and f == hi)]
        acc = (sum(1 for i in members if pairs[i][0] == pairs[i][1]) / len(members)
               if members else float("nan"))
        rows.append((float(lo), float(hi), len(members), acc))
    return rows


# --- laws of semantic change ------------------------------------------------

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise ValueError("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class LawReport:
    method: str
    correlations: dict[str, float]
    counts: dict[str, int]


def _instability_vs(report: StabilityReport, lexicon: Mapping[str, float], name: str,
                    transform=None) -> tuple[float, int]:
    words = [w for w in report.words if w in lexicon]
    if len(words) < 2:
        raise SemshiftError(f"{name}: lexicon overlaps the vocabulary on {len(words)} words (need >= 2)")
    inst = [1.0 - report.score(w) for w in words]
    vals = [lexicon[w] if transform is None else transform(lexicon[w]) for w in words]
    return pearson(inst, vals), len(words)


def law_correlations(report: StabilityReport, freq: FrequencyTable | Mapping[str, int] | None = None,
                     polysemy: Mapping[str, float] | None = None,
                     concreteness: Mapping[str, float] | None = None,
                     log_frequency: bool = True) -> LawReport:
    """Pearson r of instability (1 - stability) against each supplied lexicon.

    Only words present in both the report and the lexicon enter a correlation.
    Frequencies are log-transformed unless ``log_frequency`` is false.
    """
    corr: dict[str, float] = {}
    counts: dict[str, int] = {}
    if freq is not None:
        table = freq.counts if isinstance(freq, FrequencyTable) else freq
        table = {w: c for w, c in table.items() if c > 0}
        corr["conformity"], counts["conformity"] = _instability_vs(
            report, table, "frequency", math.log if log_frequency else None)
    if polysemy is not None:
        corr["innovation"], counts["innovation"] = _instability_vs(report, polysemy, "polysemy")
    if concreteness is not None:
        corr["concreteness"], counts["concreteness"] = _instability_vs(report, concreteness, "concreteness")
    return LawReport(report.method, corr, counts)


def read_lexicon(path: str | Path) -> dict[str, float]:
    """``word<TAB>value`` lines; '#' comments and blank lines skipped."""
    lex = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.rstrip("\r\n").split("\t")
            if len(parts) != 2:
                raise SemshiftError(f"{path}:{lineno}: expected 'word<TAB>value'")
            try:
                lex[parts[0]] = float(parts[1])
            except ValueError:
                raise SemshiftError(f"{path}:{lineno}: bad value {parts[1]!r}") from None
    return lex


# --- rank comparison --------------------------------------------------------

@dataclass(frozen=True)
class RankDelta:
    deltas: dict[str, int]
    mean_rank_a: float
    mean_rank_b: float


def rank_delta(rank_a: Sequence[str], rank_b: Sequence[str], probes: Sequence[str]) -> RankDelta:
    """Per-probe ``rank_a(w) - rank_b(w)`` (zero-based) and each ranking's mean probe rank."""
    pa = {w: i for i, w in enumerate(rank_a)}
    pb = {w: i for i, w in enumerate(rank_b)}
    for w in probes:
        if w not in pa or w not in pb:
            raise UnknownWordError(w, "ranking")
    if not probes:
        raise ValueError("no probe words")
    deltas = {w: pa[w] - pb[w] for w in probes}
    return RankDelta(deltas, float(np.mean([pa[w] for w in probes])),
                     float(np.mean([pb[w] for w in probes])))
