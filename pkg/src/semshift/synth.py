"""Synthetic viewpoint fixtures with known ground truth.

The pair generator plants a clustered vocabulary in a low-dimensional
subspace, gives every word an intrinsic drift level, and derives two
viewpoints by independent drift noise. Viewpoint 1 is additionally rotated,
and a chosen set of words is replaced by unrelated random directions there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import EmbeddingSpace, synthetic_words


@dataclass(frozen=True)
class PairConfig:
    n: int = 2000
    dim: int = 50
    n_clusters: int = 40
    # dimension of the subspace holding cluster structure
    rank: int = 20
    spread: float = 0.35
    drift_max: float = 0.6
    n_perturbed: int = 20
    n_anchors: int = 200
    rotate: bool = True

    def __post_init__(self):
        if self.n < 2 or self.dim < 1:
            raise ValueError("need n >= 2 and dim >= 1")
        if self.n_anchors + self.n_perturbed > self.n:
            raise ValueError("n_anchors + n_perturbed exceeds n")


@dataclass(frozen=True, eq=False)
class ViewpointPair:
    space0: EmbeddingSpace
    space1: EmbeddingSpace
    anchors: tuple[str, ...]
    perturbed: tuple[str, ...]
    drift: np.ndarray
    rotation: np.ndarray


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def make_viewpoint_pair(cfg: PairConfig = PairConfig(), base_seed: int = 0,
                        noise_seed: int = 0) -> ViewpointPair:
    """Build two viewpoint spaces over the same vocabulary.

    ``base_seed`` fixes the structure (clusters, drift levels, perturbed set,
    anchors, rotation); ``noise_seed`` only redraws the per-viewpoint drift
    noise, so two pairs sharing a base seed are independent re-runs of one
    underlying vocabulary.
    """
    rng = np.random.default_rng([base_seed, 0])
    n, dim = cfg.n, cfg.dim
    rank = min(cfg.rank, dim)
    basis = random_orthogonal(dim, rng)[:, :rank]
    centroids = rng.standard_normal((cfg.n_clusters, rank)) @ basis.T
    centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)
    cluster = rng.integers(0, cfg.n_clusters, size=n)
    within = rng.standard_normal((n, rank)) @ basis.T * (cfg.spread / np.sqrt(rank))
    base = centroids[cluster] + within
    drift = cfg.drift_max * rng.random(n) ** 2

    order = np.argsort(drift, kind="stable")
    anchors_idx = np.sort(order[: cfg.n_anchors])
    candidates = order[cfg.n_anchors:]
    perturbed_idx = np.sort(rng.choice(candidates, size=cfg.n_perturbed, replace=False))
    R = random_orthogonal(dim, rng) if cfg.rotate else np.eye(dim)

    nrng = np.random.default_rng([base_seed, 1, noise_seed])
    scale = drift[:, None] / np.sqrt(dim)
    v0 = base + scale * nrng.standard_normal((n, dim))
    v1 = base + scale * nrng.standard_normal((n, dim))
    rand = nrng.standard_normal((len(perturbed_idx), dim))
    rand *= (np.linalg.norm(v1[perturbed_idx], axis=1) / np.linalg.norm(rand, axis=1))[:, None]
    v1[perturbed_idx] = rand
    v1 = v1 @ R.T

    words = synthetic_words(n)
    return ViewpointPair(
        EmbeddingSpace("view0", words, v0),
        EmbeddingSpace("view1", words, v1),
        tuple(words[i] for i in anchors_idx),
        tuple(words[i] for i in perturbed_idx),
        drift,
        R,
    )


@dataclass(frozen=True)
class CorpusConfig:
    docs_per_class: int = 500
    dim: int = 30
    n_general: int = 600
    n_general_clusters: int = 30
    n_concepts: int = 12
    # class-flavoured context words per concept and class
    n_context: int = 200
    # number of general (noise) tokens per document
    doc_len: tuple[int, int] = (10, 30)
    concepts_per_doc: tuple[int, int] = (1, 3)
    context_per_concept: tuple[int, int] = (3, 5)
    # Zipf exponent of context-word frequencies within a pool (0 = uniform)
    context_zipf: float = 0.0
    spread: float = 0.3
    labels: tuple[str, str] = ("con", "lab")


@dataclass(frozen=True, eq=False)
class ClassificationFixture:
    docs: tuple
    spaces: dict
    anchors: tuple[str, ...]
    concepts: tuple[str, ...]


def _zipf_weights(n: int, s: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def make_classification_fixture(cfg: CorpusConfig = CorpusConfig(), seed: int = 0) -> ClassificationFixture:
    """Two-class corpus plus one embedding space per class.

    Concepts are used by both classes, but each class surrounds a concept with
    its own context words. In a class's space the concept sits inside that
    class's context cluster while the other class's context words are
    scattered, so concepts and context words come out unstable and general
    words (identical clusters in both spaces, used as anchors) stable.

    The context pools are large relative to the training set, so many context
    words seen at test time never occur in a training document. Their
    embedding neighbors do, which is the vocabulary gap expansion can close.
    """
    from .corpus import Document

    rng = np.random.default_rng([seed, 2])
    dim = cfg.dim
    la, lb = cfg.labels
    general = [f"gen{i:04d}" for i in range(cfg.n_general)]
    concepts = [f"con{i:03d}" for i in range(cfg.n_concepts)]
    context = {lab: [[f"{lab}_{c}_{j:02d}" for j in range(cfg.n_context)] for c in concepts]
               for lab in cfg.labels}

    def unit(x):
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def cluster(center, k):
        return center + rng.standard_normal((k, dim)) * (cfg.spread / np.sqrt(dim))

    gen_centers = unit(rng.standard_normal((cfg.n_general_clusters, dim)))
    gen_vecs = gen_centers[rng.integers(0, cfg.n_general_clusters, cfg.n_general)]
    gen_vecs = gen_vecs + rng.standard_normal((cfg.n_general, dim)) * (cfg.spread / np.sqrt(dim))

    vecs = {lab: {} for lab in cfg.labels}
    for i, w in enumerate(general):
        for lab in cfg.labels:
            vecs[lab][w] = gen_vecs[i] + rng.standard_normal(dim) * (0.02 / np.sqrt(dim))
    for ci, c in enumerate(concepts):
        centers = {lab: unit(rng.standard_normal(dim)) for lab in cfg.labels}
        for lab in cfg.labels:
            vecs[lab][c] = cluster(centers[lab], 1)[0]
            own = cluster(centers[lab], cfg.n_context)
            for j, w in enumerate(context[lab][ci]):
                vecs[lab][w] = own[j]
        for lab, other in ((la, lb), (lb, la)):
            for w in context[other][ci]:
                vecs[lab][w] = unit(rng.standard_normal(dim))

    R = random_orthogonal(dim, rng)
    words = sorted(vecs[la])
    spaces = {
        la: EmbeddingSpace(la, tuple(words), np.array([vecs[la][w] for w in words])),
        lb: EmbeddingSpace(lb, tuple(words), np.array([vecs[lb][w] for w in words]) @ R.T),
    }

    gen_p = _zipf_weights(cfg.n_general)
    ctx_p = _zipf_weights(cfg.n_context, cfg.context_zipf)
    docs = []
    for lab in cfg.labels:
        for d in range(cfg.docs_per_class):
            length = int(rng.integers(cfg.doc_len[0], cfg.doc_len[1] + 1))
            toks = list(rng.choice(general, size=length, p=gen_p))
            for ci in rng.choice(cfg.n_concepts, size=int(rng.integers(*cfg.concepts_per_doc, endpoint=True)),
                                 replace=False):
                toks.append(concepts[ci])
                k = int(rng.integers(*cfg.context_per_concept, endpoint=True))
                toks.extend(rng.choice(context[lab][ci], size=k, p=ctx_p))
            rng.shuffle(toks)
            docs.append(Document(f"{lab}{d:04d}", tuple(str(t) for t in toks), lab))
    anchors = tuple(general[:200])
    return ClassificationFixture(tuple(docs), spaces, anchors, tuple(concepts))
