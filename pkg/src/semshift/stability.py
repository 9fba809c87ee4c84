"""Per-word stability across two viewpoints: linear, neighbor-based and combined scores.

All iterative scores are bulk-synchronous: iteration ``t`` reads only the
scores of iteration ``t - 1``, and every iteration ends with min-max
normalization over the shared vocabulary.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .align import LinearMap, round_trip_similarities
from .embed import EmbeddingSpace, NeighborIndex, SharedVocab
from .errors import SemshiftError, UnknownWordError

METHODS = ("linear", "neighbor", "combination")

# rows processed together when gathering (n, k, k) / (n, k, dim) blocks
_CHUNK = 256


@dataclass(frozen=True)
class StabilityParams:
    m: int = 100
    T: int = 5
    sim_floor: float = 0.4
    prior_epsilon: float = 1e-6

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not -1.0 <= self.sim_floor <= 1.0:
            raise ValueError("sim_floor must lie in [-1, 1]")
        if not self.prior_epsilon > 0:
            raise ValueError("prior_epsilon must be > 0")


@dataclass(frozen=True, eq=False)
class StabilityReport:
    method: str
    iterations: int
    params: StabilityParams
    spaces: tuple[str, str]
    words: tuple[str, ...]
    values: np.ndarray
    # normalized scores after each iteration, aligned with ``words``
    history: tuple[np.ndarray, ...] = field(default=(), repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != (len(self.words),):
            raise ValueError("values must align with words")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def scores(self) -> dict[str, float]:
        return {w: float(v) for w, v in zip(self.words, self.values)}

    @property
    def _positions(self) -> dict[str, int]:
        pos = self.__dict__.get("_pos")
        if pos is None:
            pos = {w: i for i, w in enumerate(self.words)}
            object.__setattr__(self, "_pos", pos)
        return pos

    def score(self, word: str) -> float:
        try:
            return float(self.values[self._positions[word]])
        except KeyError:
            raise UnknownWordError(word, f"{self.method} report") from None

    def __contains__(self, word: str) -> bool:
        return word in self._positions

    def __len__(self) -> int:
        return len(self.words)


def _minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi == lo:
        return np.ones_like(x)
    out = (x - lo) / (hi - lo)
    # guard the endpoints against rounding
    out[x == lo] = 0.0
    out[x == hi] = 1.0
    return np.clip(out, 0.0, 1.0)


def minmax_normalize(scores):
    """Rescale to [0, 1]; uniform inputs map to all ones.

    Accepts a ``word -> value`` mapping (returns a dict) or an array.
    """
    if isinstance(scores, Mapping):
        if not scores:
            raise ValueError("cannot normalize an empty score map")
        keys = list(scores)
        vals = _minmax(np.array([scores[k] for k in keys], dtype=np.float64))
        return {k: float(v) for k, v in zip(keys, vals)}
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty score vector")
    return _minmax(arr.copy())


def _check_indexes(idx0: NeighborIndex, idx1: NeighborIndex):
    if idx0.words != idx1.words:
        raise SemshiftError("neighbor indexes were built over different vocabularies")
    if idx0.m != idx1.m or idx0.k != idx1.k:
        raise SemshiftError(f"neighbor indexes disagree on m ({idx0.m} vs {idx1.m})")
    if len(idx0.words) < 2:
        raise SemshiftError("shared vocabulary needs at least two words")


def _gather_dot(A: np.ndarray, B: np.ndarray, nb: np.ndarray) -> np.ndarray:
    """out[w, p] = A[nb[w, p]] . B[w]"""
    out = np.empty(nb.shape, dtype=np.float64)
    for s in range(0, len(nb), _CHUNK):
        e = s + _CHUNK
        out[s:e] = np.einsum("wpd,wd->wp", A[nb[s:e]], B[s:e])
    return out


def _unit(x: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norm, out=np.zeros_like(x), where=norm > 0)


def _safe_mean(total: np.ndarray, count: np.ndarray) -> np.ndarray:
    return np.divide(total, count, out=np.zeros_like(total), where=count > 0)


def linear_stability(s0: EmbeddingSpace, s1: EmbeddingSpace, shared: SharedVocab,
                     map01: LinearMap, map10: LinearMap,
                     params: StabilityParams | None = None) -> StabilityReport:
    """Round-trip cosine averaged over both directions.

    No min-max step: the raw average is reported, clipped to [0, 1].
    """
    params = params or StabilityParams()
    if len(shared) == 0:
        raise SemshiftError("shared vocabulary is empty")
    sim01, sim10 = round_trip_similarities(map01, map10, s0, s1, shared.words)
    values = np.clip((sim01 + sim10) / 2.0, 0.0, 1.0)
    return StabilityReport("linear", 1, params, (s0.id, s1.id), shared.words, values, (values,))


def neighbor_stability(s0: EmbeddingSpace, s1: EmbeddingSpace, idx0: NeighborIndex,
                       idx1: NeighborIndex, params: StabilityParams | None = None) -> StabilityReport:
    """Iterative neighbor-agreement score.

    For direction 0<-1, the neighbors of ``w`` in space 1 (kept only when their
    space-1 similarity reaches ``sim_floor``) are scored by their space-0 cosine
    to ``w``, weighted by their previous score and averaged. The two directions
    are averaged, then normalized.
    """
    params = params or StabilityParams()
    _check_indexes(idx0, idx1)
    words = idx0.words
    U0 = s0.unit_rows(words)
    U1 = s1.unit_rows(words)

    # direction 01 walks space-1 lists and measures cosines in space 0
    mask01 = idx1.sims >= params.sim_floor
    cos01 = np.where(mask01, _gather_dot(U0, U0, idx1.neighbors), 0.0)
    cnt01 = mask01.sum(axis=1).astype(np.float64)
    mask10 = idx0.sims >= params.sim_floor
    cos10 = np.where(mask10, _gather_dot(U1, U1, idx0.neighbors), 0.0)
    cnt10 = mask10.sum(axis=1).astype(np.float64)

    s = np.ones(len(words))
    history = []
    for _ in range(params.T):
        sim01 = _safe_mean((cos01 * s[idx1.neighbors]).sum(axis=1), cnt01)
        sim10 = _safe_mean((cos10 * s[idx0.neighbors]).sum(axis=1), cnt10)
        s = _minmax((sim01 + sim10) / 2.0)
        history.append(s.copy())
    return StabilityReport("neighbor", params.T, params, (s0.id, s1.id), words, s, tuple(history))


def overlap_count(Ni: Sequence[str], Nj: Sequence[str], priors: Mapping[str, float] | None = None,
                  epsilon: float = 1e-6) -> float:
    """Rank-weighted neighbor overlap of list ``Ni`` against ``Nj``.

    ``|Ni| * |Ni & Nj| - sum(rank_j(w) / max(prior(w), epsilon))`` over the shared
    neighbors, with zero-based ranks in ``Nj``. Missing priors count as 1.
    """
    pos_j = {w: r for r, w in enumerate(Nj)}
    common = [w for w in dict.fromkeys(Ni) if w in pos_j]
    penalty = 0.0
    for w in common:
        prior = 1.0 if priors is None else priors.get(w, 1.0)
        penalty += pos_j[w] / max(prior, epsilon)
    return len(Ni) * len(common) - penalty


def lambda_select(N0: Sequence[str], N1: Sequence[str], C01: float, C10: float) -> float:
    """Mixing weight between overlap and mapped-similarity signals."""
    if set(N0) == set(N1):
        return 1.0
    if C01 == 0 and C10 == 0:
        return 0.0
    return 0.5


@dataclass
class _Direction:
    """Static per-direction structure for the combined score (i -> j)."""

    nb: np.ndarray        # neighbors of w in space i
    shared: np.ndarray    # nb[w, p] also in space-j list
    rank: np.ndarray      # zero-based position of nb[w, p] in the space-j list
    n_shared: np.ndarray
    n_diff: np.ndarray
    mapped_cos: np.ndarray  # cos(W_ij v_i[nb[w, p]], v_j[w])


def _direction(idx_i: NeighborIndex, idx_j: NeighborIndex, Ui: np.ndarray, Uj: np.ndarray,
               W: np.ndarray) -> _Direction:
    nb_i, nb_j = idx_i.neighbors, idx_j.neighbors
    n, k = nb_i.shape
    shared = np.zeros((n, k), dtype=bool)
    rank = np.zeros((n, k), dtype=np.int64)
    for s in range(0, n, _CHUNK):
        e = s + _CHUNK
        eq = nb_i[s:e, :, None] == nb_j[s:e, None, :]
        shared[s:e] = eq.any(axis=2)
        rank[s:e] = eq.argmax(axis=2)
    mapped = _unit(Ui @ W.T)
    mapped_cos = np.where(shared, 0.0, _gather_dot(mapped, Uj, nb_i))
    n_shared = shared.sum(axis=1)
    return _Direction(nb_i, shared, rank, n_shared, k - n_shared, mapped_cos)


def combination_stability(s0: EmbeddingSpace, s1: EmbeddingSpace, idx0: NeighborIndex,
                          idx1: NeighborIndex, map01: LinearMap, map10: LinearMap,
                          params: StabilityParams | None = None) -> StabilityReport:
    """Mix of rank-weighted neighbor overlap and mapped similarity of non-shared neighbors."""
    params = params or StabilityParams()
    _check_indexes(idx0, idx1)
    if map01.W.shape != (s1.dim, s0.dim) or map10.W.shape != (s0.dim, s1.dim):
        raise SemshiftError(
            f"map shapes {map01.W.shape}/{map10.W.shape} do not match space dims {s0.dim}/{s1.dim}")
    words = idx0.words
    U0 = s0.unit_rows(words)
    U1 = s1.unit_rows(words)
    d01 = _direction(idx0, idx1, U0, U1, map01.W)
    d10 = _direction(idx1, idx0, U1, U0, map10.W)
    k = idx0.k
    denom = 2.0 * (k * (k + 1) / 2.0)
    same_sets = d01.n_shared == k
    eps = params.prior_epsilon

    def count(d: _Direction, s: np.ndarray) -> np.ndarray:
        clamped = np.maximum(s, eps)
        penalty = np.where(d.shared, d.rank / clamped[d.nb], 0.0).sum(axis=1)
        return k * d.n_shared - penalty

    def mapped_sim(d: _Direction, s: np.ndarray) -> np.ndarray:
        return _safe_mean((d.mapped_cos * s[d.nb]).sum(axis=1), d.n_diff.astype(np.float64))

    s = np.ones(len(words))
    history = []
    for _ in range(params.T):
        c01, c10 = count(d01, s), count(d10, s)
        s_nei = (c01 + c10) / denom
        s_lin = (mapped_sim(d01, s) + mapped_sim(d10, s)) / 2.0
        lam = np.where(same_sets, 1.0, np.where((c01 == 0) & (c10 == 0), 0.0, 0.5))
        s = _minmax(lam * s_nei + (1.0 - lam) * s_lin)
        history.append(s.copy())
    return StabilityReport("combination", params.T, params, (s0.id, s1.id), words, s, tuple(history))


def rank_by_instability(report: StabilityReport) -> list[str]:
    """Most unstable first; ties broken alphabetically."""
    order = sorted(range(len(report.words)), key=lambda i: (report.values[i], report.words[i]))
    return [report.words[i] for i in order]


def tail_jaccard(rank_a: Sequence[str], rank_b: Sequence[str], k: int) -> float:
    """Jaccard similarity of the last ``k`` entries (the most stable words) of two rankings."""
    if not 1 <= k <= min(len(rank_a), len(rank_b)):
        raise ValueError(f"tail size {k} out of range for rankings of length "
                         f"{len(rank_a)} and {len(rank_b)}")
    a, b = set(rank_a[-k:]), set(rank_b[-k:])
    return len(a & b) / len(a | b)


# --- report files -----------------------------------------------------------

def _header(report: StabilityReport) -> dict:
    return {
        "method": report.method,
        "T": report.iterations,
        "m": report.params.m,
        "sim_floor": report.params.sim_floor,
        "prior_epsilon": report.params.prior_epsilon,
        "space0": report.spaces[0],
        "space1": report.spaces[1],
    }


def write_report(report: StabilityReport, path: str | Path, format: str = "tsv",
                 extra: Mapping[str, object] | None = None) -> None:
    """TSV ("word<TAB>score", ascending) with '#' key=value header lines, or JSON."""
    header = _header(report)
    if extra:
        header.update(extra)
    ordered = rank_by_instability(report)
    scores = report.scores
    path = Path(path)
    if format == "tsv":
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for key, val in header.items():
                fh.write(f"# {key}={val}\n")
            for w in ordered:
                fh.write(f"{w}\t{scores[w]!r}\n")
    elif format == "json":
        doc = dict(header)
        doc["scores"] = [[w, scores[w]] for w in ordered]
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path: str | Path) -> StabilityReport:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        header = {k: v for k, v in doc.items() if k != "scores"}
        pairs = [(w, float(v)) for w, v in doc["scores"]]
    else:
        header, pairs = {}, []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
            elif line.strip():
                parts = line.split("\t")
                if len(parts) != 2:
                    raise SemshiftError(f"{path}:{lineno}: expected 'word<TAB>score'")
                pairs.append((parts[0], float(parts[1])))
    if "T" not in header and "iterations" in header:
        header["T"] = header["iterations"]
    missing = {"method", "T", "m", "sim_floor", "space0", "space1"} - set(header)
    if missing:
        raise SemshiftError(f"{path}: report header lacks {sorted(missing)}")
    params = StabilityParams(m=int(header["m"]), T=max(1, int(header["T"])),
                             sim_floor=float(header["sim_floor"]),
                             prior_epsilon=float(header.get("prior_epsilon", 1e-6)))
    pairs.sort(key=lambda p: p[0])
    words = tuple(w for w, _ in pairs)
    return StabilityReport(str(header["method"]), int(header["T"]), params,
                           (str(header["space0"]), str(header["space1"])), words,
                           np.array([v for _, v in pairs]))


def params_dict(params: StabilityParams) -> dict:
    return asdict(params)
