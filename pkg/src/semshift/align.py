"""Linear maps between embedding spaces, learned from anchor words by gradient descent."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embed import EmbeddingSpace
from .errors import AnchorError, DivergenceError, EmbeddingFormatError, SemshiftError, UnknownWordError

logger = logging.getLogger(__name__)

MAP_MAGIC = "semshift-map"
MAP_VERSION = "v1"

# learning-rate halvings tolerated before a non-finite/increasing loss is declared divergence
_MAX_HALVINGS = 60


@dataclass
class AlignConfig:
    learning_rate: float = 0.01
    max_iterations: int = 50_000
    convergence_tol: float = 1e-9
    seed: int = 0
    anchor_source: str | None = None
    checkpoint_every: int = 100

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")


@dataclass(frozen=True, eq=False)
class LinearMap:
    source_id: str
    target_id: str
    W: np.ndarray
    anchors_used: int = 0
    final_loss: float = float("nan")
    iterations_run: int = 0
    loss_trace: tuple[float, ...] = ()
    trace_iterations: tuple[int, ...] = ()
    learning_rate: float = float("nan")

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64, copy=True)
        if W.ndim != 2:
            raise ValueError("W must be a matrix")
        if not np.all(np.isfinite(W)):
            raise ValueError("W has non-finite entries")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def source_dim(self) -> int:
        return self.W.shape[1]

    @property
    def target_dim(self) -> int:
        return self.W.shape[0]

    @classmethod
    def identity(cls, dim: int, source_id: str = "0", target_id: str = "1") -> "LinearMap":
        return cls(source_id, target_id, np.eye(dim))


def read_word_list(path: str | Path) -> list[str]:
    """One word per line; blank lines and ``#`` comments ignored."""
    words = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                words.append(line)
    return words


def default_anchors() -> list[str]:
    """The bundled English stopword list used as default anchor set."""
    text = resources.files("semshift").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    return [w for w in (line.split("#", 1)[0].strip() for line in text.splitlines()) if w]


def usable_anchors(src: EmbeddingSpace, dst: EmbeddingSpace, anchors: Iterable[str]) -> list[str]:
    """Deduplicate, drop anchors missing from either space (with a warning), and sort."""
    anchors = list(dict.fromkeys(anchors))
    kept = sorted(w for w in anchors if w in src and w in dst)
    dropped = len(anchors) - len(kept)
    if dropped:
        msg = f"{dropped} of {len(anchors)} anchors missing from {src.id!r} or {dst.id!r}; dropped"
        logger.warning(msg)
        warnings.warn(msg, stacklevel=3)
    if len(kept) < 2:
        raise AnchorError(f"fewer than 2 usable anchors ({len(kept)} present in both spaces)")
    if len(kept) < src.dim:
        msg = f"only {len(kept)} anchors for source dim {src.dim}; the map is underdetermined"
        logger.warning(msg)
        warnings.warn(msg, stacklevel=3)
    return kept


def _anchor_matrices(src, dst, anchors):
    try:
        return src.rows(anchors), dst.rows(anchors)
    except UnknownWordError as exc:
        raise UnknownWordError(exc.word, "anchor set") from None


def train_map(src: EmbeddingSpace, dst: EmbeddingSpace, anchors: Sequence[str],
              cfg: AlignConfig | None = None) -> LinearMap:
    """Fit ``W`` (dst_dim x src_dim) minimizing the mean of ``||W x - y||^2`` over anchors.

    Full-batch gradient descent starting from the identity (equal dims) or zeros.
    A step that raises the loss is retried with half the learning rate, so the
    recorded loss trace never increases. Stops after ``max_iterations`` accepted
    steps or once the relative loss decrease drops below ``convergence_tol``.
    """
    cfg = cfg or AlignConfig()
    words = usable_anchors(src, dst, anchors)
    X, Y = _anchor_matrices(src, dst, words)
    n = len(words)
    # sufficient statistics: loss and gradient only need these
    G = X.T @ X / n
    C = Y.T @ X / n
    yy = float(np.sum(Y * Y)) / n
    scale = max(yy, float(np.trace(G)), 1e-300)

    W = np.eye(dst.dim) if src.dim == dst.dim else np.zeros((dst.dim, src.dim))

    def loss_grad(W):
        WG = W @ G
        loss = float(np.sum(WG * W) - 2.0 * np.sum(W * C) + yy)
        return max(loss, 0.0), 2.0 * (WG - C)

    lr = cfg.learning_rate
    loss, grad = loss_grad(W)
    if not np.isfinite(loss):
        raise DivergenceError(0, loss)
    trace, trace_it = [loss], [0]
    it = 0
    halvings = 0
    while it < cfg.max_iterations:
        if loss <= 1e-15 * scale:
            break
        W_new = W - lr * grad
        loss_new, grad_new = loss_grad(W_new)
        if not np.isfinite(loss_new) or loss_new > loss:
            if np.isfinite(loss_new) and loss_new - loss <= 1e-13 * scale:
                break  # rounding floor reached
            halvings += 1
            if halvings > _MAX_HALVINGS:
                raise DivergenceError(it + 1, loss_new)
            lr *= 0.5
            logger.debug("loss rose at iteration %d; learning rate halved to %g", it + 1, lr)
            continue
        it += 1
        rel = (loss - loss_new) / loss if loss > 0 else 0.0
        W, loss, grad = W_new, loss_new, grad_new
        if it % cfg.checkpoint_every == 0:
            trace.append(loss)
            trace_it.append(it)
        if rel < cfg.convergence_tol:
            break
    if trace_it[-1] != it:
        trace.append(loss)
        trace_it.append(it)

    final = _residual_loss(W, X, Y)
    fitted = LinearMap(src.id, dst.id, W, anchors_used=n, final_loss=final, iterations_run=it,
                       loss_trace=tuple(trace), trace_iterations=tuple(trace_it),
                       learning_rate=lr)
    logger.info("trained %s->%s on %d anchors: %d iterations, loss %.3e",
                src.id, dst.id, n, it, final)
    return fitted


def _residual_loss(W: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    R = X @ W.T - Y
    return float(np.mean(np.sum(R * R, axis=1)))


def map_loss(map: LinearMap, src: EmbeddingSpace, dst: EmbeddingSpace, anchors: Sequence[str]) -> float:
    """Mean squared residual of ``map`` over ``anchors``."""
    X, Y = _anchor_matrices(src, dst, anchors)
    _check_dims(map.W, X.shape[1], Y.shape[1])
    return _residual_loss(map.W, X, Y)


def map_gradient(src: EmbeddingSpace, dst: EmbeddingSpace, anchors: Sequence[str],
                 W: np.ndarray) -> np.ndarray:
    """Analytic gradient of the mean loss: ``(2/n) sum (W x - y) x^T``."""
    X, Y = _anchor_matrices(src, dst, anchors)
    W = np.asarray(W, dtype=np.float64)
    _check_dims(W, X.shape[1], Y.shape[1])
    return 2.0 * (X @ W.T - Y).T @ X / len(X)


def gradient_check(src: EmbeddingSpace, dst: EmbeddingSpace, anchors: Sequence[str],
                   W: np.ndarray, epsilon: float = 1e-5) -> float:
    """Max entry-wise relative error between the analytic gradient and central differences."""
    if not 0 < epsilon <= 1e-2:
        raise ValueError("epsilon must lie in (0, 1e-2]")
    X, Y = _anchor_matrices(src, dst, anchors)
    W = np.array(W, dtype=np.float64)
    analytic = map_gradient(src, dst, anchors, W)
    numeric = np.empty_like(W)
    for idx in np.ndindex(W.shape):
        orig = W[idx]
        W[idx] = orig + epsilon
        up = _residual_loss(W, X, Y)
        W[idx] = orig - epsilon
        down = _residual_loss(W, X, Y)
        W[idx] = orig
        numeric[idx] = (up - down) / (2 * epsilon)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def _check_dims(W, src_dim, dst_dim):
    if W.shape != (dst_dim, src_dim):
        raise SemshiftError(f"map shape {W.shape} incompatible with dims src={src_dim}, dst={dst_dim}")


def apply_map(map: LinearMap, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != map.source_dim:
        raise SemshiftError(f"vector has {v.shape[-1]} entries, map expects {map.source_dim}")
    return v @ map.W.T if v.ndim > 1 else map.W @ v


def _row_cos(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    num = np.sum(a * b, axis=-1)
    den = np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return np.clip(out, -1.0, 1.0)


def one_way_similarities(map: LinearMap, src: EmbeddingSpace, dst: EmbeddingSpace,
                         words: Sequence[str]) -> np.ndarray:
    """``cos(W x_w, y_w)`` for each word."""
    return _row_cos(apply_map(map, src.rows(words)), dst.rows(words))


def one_way_similarity(map01: LinearMap, s0: EmbeddingSpace, s1: EmbeddingSpace, w: str) -> float:
    return float(one_way_similarities(map01, s0, s1, [w])[0])


def _check_pair(map01: LinearMap, map10: LinearMap):
    if map01.W.shape != map10.W.T.shape:
        raise SemshiftError(
            f"maps are not inverse-shaped: {map01.W.shape} vs {map10.W.shape}")


def round_trip_similarities(map01: LinearMap, map10: LinearMap, s0: EmbeddingSpace,
                            s1: EmbeddingSpace, words: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Per-word cosines after mapping there and back: (0 -> 1 -> 0, 1 -> 0 -> 1)."""
    _check_pair(map01, map10)
    x0 = s0.rows(words)
    x1 = s1.rows(words)
    back0 = apply_map(map10, apply_map(map01, x0))
    back1 = apply_map(map01, apply_map(map10, x1))
    return _row_cos(back0, x0), _row_cos(back1, x1)


def round_trip_stability(map01: LinearMap, map10: LinearMap, s0: EmbeddingSpace,
                         s1: EmbeddingSpace, w: str) -> float:
    sim01, sim10 = round_trip_similarities(map01, map10, s0, s1, [w])
    return float((sim01[0] + sim10[0]) / 2)


def save_map(map: LinearMap, path: str | Path) -> None:
    """Header ``semshift-map v1 <src_dim> <dst_dim>``, '#' metadata lines, then dst_dim rows."""
    meta = {
        "source": map.source_id,
        "target": map.target_id,
        "anchors_used": map.anchors_used,
        "iterations_run": map.iterations_run,
        "final_loss": repr(float(map.final_loss)),
    }
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MAP_MAGIC} {MAP_VERSION} {map.source_dim} {map.target_dim}\n")
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        for row in map.W:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_map(path: str | Path) -> LinearMap:
    path = Path(path)
    meta: dict[str, str] = {}
    rows = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != MAP_MAGIC or header[1] != MAP_VERSION:
            raise EmbeddingFormatError(f"{path}: not a {MAP_MAGIC} {MAP_VERSION} file", 1)
        try:
            src_dim, dst_dim = int(header[2]), int(header[3])
        except ValueError:
            raise EmbeddingFormatError(f"{path}: malformed map header", 1) from None
        for lineno, line in enumerate(fh, start=2):
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            if not line.strip():
                continue
            try:
                row = [float(x) for x in line.split()]
            except ValueError:
                raise EmbeddingFormatError("unparseable map row", lineno) from None
            if len(row) != src_dim:
                raise EmbeddingFormatError(f"map row arity {len(row)} != {src_dim}", lineno)
            rows.append(row)
    if len(rows) != dst_dim:
        raise EmbeddingFormatError(f"{path}: expected {dst_dim} rows, found {len(rows)}")
    return LinearMap(
        meta.get("source", "0"), meta.get("target", "1"), np.asarray(rows),
        anchors_used=int(meta.get("anchors_used", 0)),
        iterations_run=int(meta.get("iterations_run", 0)),
        final_loss=float(meta.get("final_loss", "nan")),
    )
