"""Command-line entry point: ``semshift <subcommand> [options]``.

Every option can also come from a JSON file given with ``--config``. Keys are
option names with underscores (``"sim_floor": 0.4``); a key may sit at the top
level or inside a section named after the subcommand. Flags given on the
command line win over the config file, which wins over the built-in defaults.

Exit status is 0 on success, 1 for bad input (missing files, malformed data,
inconsistent arguments) and 2 when an internal consistency check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import align as al
from . import analysis as an
from . import corpus as cp
from . import embed as em
from . import stability as st
from . import synth
from .errors import InvariantError, SemshiftError

logger = logging.getLogger("semshift")

COMMANDS = ("align", "stability", "rank", "summarize", "expand-classify", "laws", "neighbors", "synth")

# Built-in defaults per subcommand; keys are argparse destinations.
_COMMON = {"seed": 0, "format": "tsv", "embedding_format": "word2vec-text", "out": None}
DEFAULTS: dict[str, dict] = {
    "align": {"space0": None, "space1": None, "anchors": None, "map01": "map01.txt",
              "map10": "map10.txt", "learning_rate": 0.01, "max_iterations": 50_000,
              "convergence_tol": 1e-9},
    "stability": {"space0": None, "space1": None, "method": "combination", "map01": None,
                  "map10": None, "m": 100, "iterations": 5, "sim_floor": 0.4, "prior_epsilon": 1e-6},
    "rank": {"report": None, "probes": None, "against": None, "tail_k": None},
    "summarize": {"space0": None, "space1": None, "report": None, "concept": [], "concepts": None,
                  "threshold": None, "length": 5, "allow_any_T": False},
    "expand-classify": {"corpus": None, "space": [], "report": [], "n": 5, "theta": None, "m": 100,
                        "positive": None, "dev_frac": 0.1, "test_frac": 0.1, "min_doc_len": 0,
                        "epochs": 30, "reg": 1e-4, "batch_size": 16, "bins_out": None,
                        "phrases": False, "phrase_delta": 5.0, "phrase_threshold": 1e-4},
    "laws": {"report": [], "freq": None, "corpus": None, "polysemy": None, "concreteness": None,
             "linear_frequency": False},
    "neighbors": {"space0": None, "space1": None, "side": 0, "m": 100, "word": []},
    "synth": {"kind": "pair", "out_dir": ".", "n": 2000, "dim": 50, "n_perturbed": 20,
              "n_anchors": 200, "noise_seed": 0},
}

# option -> is a path that must exist before the command runs
_INPUT_PATHS = ("space0", "space1", "anchors", "map01", "map10", "report", "probes", "against",
                "concepts", "corpus", "freq", "polysemy", "concreteness", "space")
_OUTPUT_ONLY = {"align": ("map01", "map10")}
# options given as NAME=PATH
_NAMED_PATHS = {"expand-classify": ("space", "report")}


@dataclass
class RunConfig:
    """Resolved settings for one invocation."""

    command: str
    options: dict
    seed: int = 0
    out: str | None = None
    format: str = "tsv"
    stability: st.StabilityParams = field(default_factory=st.StabilityParams)
    align: al.AlignConfig = field(default_factory=al.AlignConfig)
    expand: an.ExpandConfig = field(default_factory=an.ExpandConfig)

    def __getitem__(self, key):
        return self.options[key]

    def input_paths(self) -> list[str]:
        skip = _OUTPUT_ONLY.get(self.command, ())
        named = _NAMED_PATHS.get(self.command, ())
        found = []
        for key in _INPUT_PATHS:
            if key in skip or key not in self.options:
                continue
            val = self.options[key]
            for v in val if isinstance(val, list) else [val]:
                if v is None:
                    continue
                found.append(v.partition("=")[2] or v if key in named else v)
        return found

    def validate(self) -> None:
        for p in self.input_paths():
            if not Path(p).exists():
                raise SemshiftError(f"no such file: {p}")


def _read_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise SemshiftError(f"no such file: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SemshiftError(f"{path}: invalid JSON config ({exc})") from None
    if not isinstance(data, dict):
        raise SemshiftError(f"{path}: config must be a JSON object")
    return data


def resolve_config(command: str, flags: dict, config_file: dict) -> RunConfig:
    """Merge defaults, config-file values and explicit flags (in rising priority)."""
    merged = dict(_COMMON)
    merged.update(DEFAULTS[command])
    known = set(merged)
    section = config_file.get(command, {})
    for source in ({k: v for k, v in config_file.items() if k not in COMMANDS}, section):
        for key, val in source.items():
            key = key.replace("-", "_")
            if key not in known:
                if source is section:
                    raise SemshiftError(f"unknown config key {key!r} for {command}")
                continue
            merged[key] = val
    merged.update({k: v for k, v in flags.items() if k in known})

    cfg = RunConfig(command, merged, seed=int(merged["seed"]), out=merged["out"], format=merged["format"])
    if cfg.format not in ("tsv", "json"):
        raise SemshiftError(f"unknown output format {cfg.format!r}")
    try:
        if command in ("stability",):
            cfg.stability = st.StabilityParams(m=int(merged["m"]), T=int(merged["iterations"]),
                                               sim_floor=float(merged["sim_floor"]),
                                               prior_epsilon=float(merged["prior_epsilon"]))
        if command == "align":
            cfg.align = al.AlignConfig(learning_rate=float(merged["learning_rate"]),
                                       max_iterations=int(merged["max_iterations"]),
                                       convergence_tol=float(merged["convergence_tol"]),
                                       seed=cfg.seed, anchor_source=merged["anchors"])
        if command == "expand-classify":
            theta = merged["theta"]
            cfg.expand = an.ExpandConfig(theta=0.0 if theta is None else float(theta), n=int(merged["n"]))
    except ValueError as exc:
        raise SemshiftError(str(exc)) from None
    return cfg


# --- shared helpers ---------------------------------------------------------

def _require(cfg: RunConfig, *keys: str) -> None:
    for key in keys:
        if not cfg[key]:
            raise SemshiftError(f"{cfg.command}: --{key.replace('_', '-')} is required")


def _space(path: str, fmt: str) -> em.EmbeddingSpace:
    return em.load_embeddings(path, fmt, space_id=Path(path).stem)


def _spaces(cfg: RunConfig) -> tuple[em.EmbeddingSpace, em.EmbeddingSpace]:
    _require(cfg, "space0", "space1")
    s0 = _space(cfg["space0"], cfg["embedding_format"])
    s1 = _space(cfg["space1"], cfg["embedding_format"])
    if s0.id == s1.id:
        s0 = em.EmbeddingSpace(s0.id + "0", s0.words, s0.vectors)
        s1 = em.EmbeddingSpace(s1.id + "1", s1.words, s1.vectors)
    return s0, s1


def _pairs(values: Sequence[str], what: str) -> dict[str, str]:
    out = {}
    for v in values:
        key, sep, path = v.partition("=")
        if not sep or not key or not path:
            raise SemshiftError(f"{what} must look like NAME=PATH, got {v!r}")
        if key in out:
            raise SemshiftError(f"{what} {key!r} given twice")
        out[key] = path
    return out


def _header_lines(params: dict) -> str:
    return "".join(f"# {k}={_fmt(v)}\n" for k, v in params.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _write(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _check_report(report: st.StabilityReport, words: Sequence[str]) -> None:
    if tuple(report.words) != tuple(words):
        raise InvariantError("report is not keyed by the shared vocabulary")
    if not np.all((report.values >= 0.0) & (report.values <= 1.0)):
        raise InvariantError(f"{report.method} scores left [0, 1]")
    for i, h in enumerate(report.history, start=1):
        if report.method != "linear" and len(np.unique(h)) > 1 and (h.min() != 0.0 or h.max() != 1.0):
            raise InvariantError(f"iteration {i} is not min-max normalized")


def _load_maps(cfg: RunConfig) -> tuple[al.LinearMap, al.LinearMap]:
    if not cfg["map01"] or not cfg["map10"]:
        raise SemshiftError(f"--method {cfg['method']} needs both --map01 and --map10")
    return al.load_map(cfg["map01"]), al.load_map(cfg["map10"])


def _frequency_table(cfg: RunConfig) -> cp.FrequencyTable | None:
    if cfg["freq"]:
        lex = an.read_lexicon(cfg["freq"])
        return cp.FrequencyTable({w: int(v) for w, v in lex.items()})
    if cfg["corpus"]:
        return cp.count_frequencies(cp.read_corpus(cfg["corpus"]))
    return None


def _shipped(name: str) -> str:
    return str(resources.files("semshift").joinpath(f"data/{name}"))


# --- subcommands ------------------------------------------------------------

def cmd_align(cfg: RunConfig) -> int:
    s0, s1 = _spaces(cfg)
    anchors = al.read_word_list(cfg["anchors"]) if cfg["anchors"] else al.default_anchors()
    map01 = al.train_map(s0, s1, anchors, cfg.align)
    map10 = al.train_map(s1, s0, anchors, cfg.align)
    al.save_map(map01, cfg["map01"])
    al.save_map(map10, cfg["map10"])
    shared = em.intersect_vocab(s0, s1)
    if len(shared) == 0:
        raise SemshiftError("the two spaces share no words")
    ow01 = al.one_way_similarities(map01, s0, s1, shared.words)
    ow10 = al.one_way_similarities(map10, s1, s0, shared.words)
    rt01, rt10 = al.round_trip_similarities(map01, map10, s0, s1, shared.words)
    if not (np.all(np.abs(rt01) <= 1.0) and np.all(np.abs(rt10) <= 1.0)):
        raise InvariantError("round-trip cosine outside [-1, 1]")
    rows = {
        "one_way_01": float(ow01.mean()), "one_way_10": float(ow10.mean()),
        "one_way_mean": float((ow01.mean() + ow10.mean()) / 2),
        "round_trip_01": float(rt01.mean()), "round_trip_10": float(rt10.mean()),
        "round_trip_mean": float((rt01.mean() + rt10.mean()) / 2),
    }
    params = {"command": "align", "space0": s0.id, "space1": s1.id, "shared_words": len(shared),
              "anchors_used": map01.anchors_used, "learning_rate": cfg.align.learning_rate,
              "max_iterations": cfg.align.max_iterations, "convergence_tol": cfg.align.convergence_tol,
              "iterations_01": map01.iterations_run, "iterations_10": map10.iterations_run,
              "final_loss_01": map01.final_loss, "final_loss_10": map10.final_loss}
    if cfg.format == "json":
        text = _dump_json({**params, "diagnostics": rows})
    else:
        text = _header_lines(params) + "".join(f"{k}\t{v!r}\n" for k, v in rows.items())
    sys.stdout.write(text)
    if cfg.out:
        _write(cfg.out, text)
    return 0


def cmd_stability(cfg: RunConfig) -> int:
    method = cfg["method"]
    if method not in st.METHODS:
        raise SemshiftError(f"unknown method {method!r}; choose from {', '.join(st.METHODS)}")
    maps = _load_maps(cfg) if method in ("linear", "combination") else None
    s0, s1 = _spaces(cfg)
    shared = em.intersect_vocab(s0, s1)
    if len(shared) < 2:
        raise SemshiftError("the two spaces share fewer than two words")
    params = cfg.stability
    if method == "linear":
        report = st.linear_stability(s0, s1, shared, *maps, params)
    else:
        idx0 = em.build_neighbor_index(s0, shared, params.m)
        idx1 = em.build_neighbor_index(s1, shared, params.m)
        if method == "neighbor":
            report = st.neighbor_stability(s0, s1, idx0, idx1, params)
        else:
            report = st.combination_stability(s0, s1, idx0, idx1, *maps, params)
    _check_report(report, shared.words)
    out = cfg.out or f"{method}.{cfg.format}"
    st.write_report(report, out, cfg.format)
    print(f"wrote {len(report)} {method} scores to {out}")
    return 0


def cmd_rank(cfg: RunConfig) -> int:
    _require(cfg, "report")
    report = st.read_report(cfg["report"])
    ranking = st.rank_by_instability(report)
    scores = report.scores
    lines = [_header_lines({"command": "rank", "report": cfg["report"], "method": report.method,
                            "T": report.iterations, "words": len(ranking)})]
    if cfg["probes"]:
        probes = al.read_word_list(cfg["probes"])
        other = st.rank_by_instability(st.read_report(cfg["against"])) if cfg["against"] else ranking
        delta = an.rank_delta(ranking, other, probes)
        pos = {w: i for i, w in enumerate(ranking)}
        lines.append("word\trank\tscore" + ("\tdelta" if cfg["against"] else "") + "\n")
        for w in probes:
            row = f"{w}\t{pos[w]}\t{scores[w]!r}"
            if cfg["against"]:
                row += f"\t{delta.deltas[w]}"
            lines.append(row + "\n")
        lines.append(f"# mean_rank={delta.mean_rank_a!r}\n")
        if cfg["against"]:
            lines.append(f"# mean_rank_against={delta.mean_rank_b!r}\n")
    else:
        lines.append("rank\tword\tscore\n")
        lines += [f"{i}\t{w}\t{scores[w]!r}\n" for i, w in enumerate(ranking)]
    if cfg["against"] and cfg["tail_k"]:
        other = st.rank_by_instability(st.read_report(cfg["against"]))
        lines.append(f"# tail_jaccard_{cfg['tail_k']}={st.tail_jaccard(ranking, other, int(cfg['tail_k']))!r}\n")
    _write(cfg.out, "".join(lines))
    return 0


def cmd_neighbors(cfg: RunConfig) -> int:
    s0, s1 = _spaces(cfg)
    shared = em.intersect_vocab(s0, s1)
    space = s0 if int(cfg["side"]) == 0 else s1
    index = em.build_neighbor_index(space, shared, int(cfg["m"]))
    words = cfg["word"] or list(shared.words)
    lines = [_header_lines({"command": "neighbors", "space": space.id, "m": index.m, "k": index.k})]
    lines.append("word\trank\tneighbor\tcosine\n")
    for w in words:
        for r, (nb, sim) in enumerate(index.neighbors_of(w)):
            lines.append(f"{w}\t{r}\t{nb}\t{sim!r}\n")
    _write(cfg.out, "".join(lines))
    return 0


def cmd_summarize(cfg: RunConfig) -> int:
    _require(cfg, "report")
    report = st.read_report(cfg["report"])
    if report.method != "linear" and report.iterations != 1 and not cfg["allow_any_T"]:
        raise SemshiftError(f"summaries use T=1 reports, {cfg['report']} has T={report.iterations} "
                            "(pass --allow-any-T to override)")
    s0, s1 = _spaces(cfg)
    shared = em.intersect_vocab(s0, s1)
    m = report.params.m
    idx0 = em.build_neighbor_index(s0, shared, m)
    idx1 = em.build_neighbor_index(s1, shared, m)
    concepts = list(cfg["concept"]) + (al.read_word_list(cfg["concepts"]) if cfg["concepts"] else [])
    if not concepts:
        raise SemshiftError("summarize: give at least one --concept or a --concepts file")
    threshold = cfg["threshold"]
    if threshold is None:
        threshold = float(np.percentile(report.values, 25))
    length = int(cfg["length"])
    summaries = []
    for c in concepts:
        summ = an.summarize_viewpoints(c, idx0, idx1, report, float(threshold), length)
        if not an.summary_is_sound(summ, idx0, idx1, report, length):
            raise InvariantError(f"summary of {c!r} violates its filters")
        summaries.append(summ)
    doc = {"command": "summarize", "report": cfg["report"], "method": report.method, "T": report.iterations,
           "m": m, "length": length, "threshold": float(threshold), "space0": s0.id, "space1": s1.id,
           "summaries": [s.to_dict() for s in summaries]}
    if len(summaries) == 1:
        doc.update(summaries[0].to_dict())
    _write(cfg.out, _dump_json(doc))
    for s in summaries:
        print(f"== {s.concept}")
        print(s.to_text())
    return 0


def cmd_expand_classify(cfg: RunConfig) -> int:
    _require(cfg, "corpus")
    spaces = {label: _space(p, cfg["embedding_format"]) for label, p in _pairs(cfg["space"], "--space").items()}
    if len(spaces) != 2:
        raise SemshiftError("expand-classify needs exactly two --space LABEL=PATH options")
    reports = {method: st.read_report(p) for method, p in _pairs(cfg["report"], "--report").items()}
    docs = cp.read_corpus(cfg["corpus"])
    if cfg["phrases"]:
        docs = cp.detect_phrases(docs, float(cfg["phrase_delta"]), float(cfg["phrase_threshold"]))
    labels = sorted({d.label for d in docs if d.label})
    if set(labels) != set(spaces):
        raise SemshiftError(f"corpus labels {labels} do not match space labels {sorted(spaces)}")
    positive = cfg["positive"] or labels[0]
    if positive not in labels:
        raise SemshiftError(f"positive label {positive!r} not among {labels}")
    la, lb = labels
    shared = em.intersect_vocab(spaces[la], spaces[lb])
    m = int(cfg["m"])
    indexes = {lab: em.build_neighbor_index(spaces[lab], shared, m) for lab in labels}

    train, dev, test = an.split_documents([d for d in docs if d.label], cfg.seed,
                                          float(cfg["dev_frac"]), float(cfg["test_frac"]))
    min_len = int(cfg["min_doc_len"])
    test = [d for d in test if len(d) >= min_len]
    if not test or not dev:
        raise SemshiftError("empty dev or test split; adjust the fractions or --min-doc-len")
    tcfg = an.TrainConfig(epochs=int(cfg["epochs"]), reg=float(cfg["reg"]),
                          batch_size=int(cfg["batch_size"]), seed=cfg.seed)
    theta = cfg["theta"]
    results = [an.run_expansion(train, dev, test, indexes, None, positive, train_cfg=tcfg)]
    for method, report in reports.items():
        results.append(an.run_expansion(train, dev, test, indexes, report, positive, n=cfg.expand.n,
                                        theta=None if theta is None else cfg.expand.theta,
                                        train_cfg=tcfg, method=method))
    params = {"command": "expand-classify", "corpus": cfg["corpus"], "seed": cfg.seed, "positive": positive,
              "n": cfg.expand.n, "m": m, "theta": "dev-sweep" if theta is None else float(theta),
              "dev_frac": float(cfg["dev_frac"]), "test_frac": float(cfg["test_frac"]),
              "min_doc_len": min_len, "epochs": tcfg.epochs, "reg": tcfg.reg, "batch_size": tcfg.batch_size,
              "train_docs": len(train), "dev_docs": len(dev), "test_docs": len(test)}
    if cfg.format == "json":
        text = _dump_json({**params, "results": [
            {"method": r.method, "precision": r.precision, "recall": r.recall, "f1": r.f1,
             "theta": r.theta} for r in results]})
    else:
        text = _header_lines(params) + "method\tprecision\trecall\tf1\ttheta\n" + "".join(
            f"{r.method}\t{r.precision!r}\t{r.recall!r}\t{r.f1!r}\t{'' if r.theta is None else repr(r.theta)}\n"
            for r in results)
    _write(cfg.out, text)
    if cfg["bins_out"]:
        lines = [_header_lines({**params, "bins": "deciles of unstable-token fraction"}),
                 "method\tlo\thi\tdocs\taccuracy\n"]
        for r in results[1:]:
            fractions = [an.unstable_fraction(d, reports[r.method], r.theta) for d in test]
            for lo, hi, count, acc in an.accuracy_by_bin(r.predictions, fractions):
                lines.append(f"{r.method}\t{lo!r}\t{hi!r}\t{count}\t{'' if math.isnan(acc) else repr(acc)}\n")
        _write(cfg["bins_out"], "".join(lines))
    return 0


def cmd_laws(cfg: RunConfig) -> int:
    if not cfg["report"]:
        raise SemshiftError("laws: give at least one --report")
    freq = _frequency_table(cfg)
    pol_path = cfg["polysemy"] or _shipped("polysemy.tsv")
    con_path = cfg["concreteness"] or _shipped("concreteness.tsv")
    polysemy, concreteness = an.read_lexicon(pol_path), an.read_lexicon(con_path)
    rows = []
    for path in cfg["report"]:
        report = st.read_report(path)
        law = an.law_correlations(report, freq, polysemy, concreteness,
                                  log_frequency=not cfg["linear_frequency"])
        for name in ("conformity", "innovation", "concreteness"):
            if name in law.correlations:
                r = law.correlations[name]
                if not -1.0 <= r <= 1.0:
                    raise InvariantError(f"correlation {r} outside [-1, 1]")
                rows.append((law.method, name, r, law.counts[name]))
    params = {"command": "laws", "reports": cfg["report"], "polysemy": pol_path, "concreteness": con_path,
              "frequency": cfg["freq"] or cfg["corpus"] or "none",
              "frequency_scale": "linear" if cfg["linear_frequency"] else "log"}
    if cfg.format == "json":
        text = _dump_json({**params, "correlations": [
            {"method": m, "law": n, "r": r, "words": c} for m, n, r, c in rows]})
    else:
        text = _header_lines(params) + "method\tlaw\tr\twords\n" + "".join(
            f"{m}\t{n}\t{r!r}\t{c}\n" for m, n, r, c in rows)
    _write(cfg.out, text)
    return 0


def cmd_synth(cfg: RunConfig) -> int:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    kind = cfg["kind"]
    written = []
    if kind == "pair":
        pcfg = synth.PairConfig(n=int(cfg["n"]), dim=int(cfg["dim"]), n_perturbed=int(cfg["n_perturbed"]),
                                n_anchors=int(cfg["n_anchors"]))
        pair = synth.make_viewpoint_pair(pcfg, cfg.seed, int(cfg["noise_seed"]))
        em.save_embeddings(pair.space0, out / "space0.txt")
        em.save_embeddings(pair.space1, out / "space1.txt")
        _write(out / "anchors.txt", "".join(w + "\n" for w in pair.anchors))
        _write(out / "probes.txt", "".join(w + "\n" for w in pair.perturbed))
        # lexicons tied to the planted drift: frequent words drift less
        rng = np.random.default_rng([cfg.seed, 3])
        words = pair.space0.words
        freq = np.maximum(1, np.round(1e5 * np.exp(-6.0 * pair.drift) * rng.uniform(0.8, 1.25, len(words))))
        senses = 1 + rng.poisson(1.0 + 8.0 * pair.drift)
        concrete = np.clip(4.5 - 4.0 * pair.drift + rng.normal(0, 0.4, len(words)), 1.0, 5.0)
        _write(out / "freq.tsv", "".join(f"{w}\t{int(f)}\n" for w, f in zip(words, freq)))
        _write(out / "polysemy.tsv", "".join(f"{w}\t{int(s)}\n" for w, s in zip(words, senses)))
        _write(out / "concreteness.tsv", "".join(f"{w}\t{c:.3f}\n" for w, c in zip(words, concrete)))
        written = ["space0.txt", "space1.txt", "anchors.txt", "probes.txt", "freq.tsv", "polysemy.tsv",
                   "concreteness.tsv"]
    elif kind == "classification":
        fx = synth.make_classification_fixture(synth.CorpusConfig(), cfg.seed)
        for label, space in fx.spaces.items():
            em.save_embeddings(space, out / f"{label}.txt")
            written.append(f"{label}.txt")
        cp.write_corpus(fx.docs, out / "corpus.tsv")
        _write(out / "anchors.txt", "".join(w + "\n" for w in fx.anchors))
        _write(out / "concepts.txt", "".join(w + "\n" for w in fx.concepts))
        written += ["corpus.tsv", "anchors.txt", "concepts.txt"]
    else:
        raise SemshiftError(f"unknown fixture kind {kind!r}; choose 'pair' or 'classification'")
    print("\n".join(str(out / f) for f in written))
    return 0


HANDLERS = {
    "align": cmd_align, "stability": cmd_stability, "rank": cmd_rank, "summarize": cmd_summarize,
    "expand-classify": cmd_expand_classify, "laws": cmd_laws, "neighbors": cmd_neighbors, "synth": cmd_synth,
}


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="semshift", description="Word stability across two embedding spaces.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def command(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=S)
        p.add_argument("--config", help="JSON file of option values")
        p.add_argument("--seed", type=int, help="seed for all randomness (default 0)")
        p.add_argument("--out", help="output file (default: stdout or a per-command name)")
        p.add_argument("--format", choices=("tsv", "json"), help="output format (default tsv)")
        return p

    def spaces(p):
        p.add_argument("--space0", help="embedding file of viewpoint 0")
        p.add_argument("--space1", help="embedding file of viewpoint 1")
        p.add_argument("--embedding-format", choices=em.FORMATS, help="default word2vec-text")

    p = command("align", "train both linear maps and report one-way / round-trip similarity")
    spaces(p)
    p.add_argument("--anchors", help="anchor word file (default: bundled stopword list)")
    p.add_argument("--map01", help="output path of the 0->1 map (default map01.txt)")
    p.add_argument("--map10", help="output path of the 1->0 map (default map10.txt)")
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--convergence-tol", type=float)

    p = command("stability", "score every shared word")
    spaces(p)
    p.add_argument("--method", choices=st.METHODS)
    p.add_argument("--map01")
    p.add_argument("--map10")
    p.add_argument("--m", type=int, help="neighbors per word (default 100)")
    p.add_argument("--iterations", "-T", type=int, help="iterations T (default 5)")
    p.add_argument("--sim-floor", type=float, help="neighbor similarity floor (default 0.4)")
    p.add_argument("--prior-epsilon", type=float)

    p = command("rank", "rank words by instability; optionally report probe ranks")
    p.add_argument("--report")
    p.add_argument("--probes", help="file of probe words")
    p.add_argument("--against", help="second report to compare ranks with")
    p.add_argument("--tail-k", type=int, help="tail size for Jaccard against --against")

    p = command("summarize", "contrastive per-viewpoint summaries of concepts")
    spaces(p)
    p.add_argument("--report", help="stability report computed with T=1")
    p.add_argument("--concept", action="append", help="concept word (repeatable)")
    p.add_argument("--concepts", help="file of concept words")
    p.add_argument("--threshold", type=float, help="stability cutoff (default: 25th percentile)")
    p.add_argument("--length", "-l", type=int, help="words per side (default 5)")
    p.add_argument("--allow-any-T", action="store_true", dest="allow_any_T")

    p = command("expand-classify", "expand training documents and classify")
    p.add_argument("--corpus", help="id<TAB>label<TAB>text file")
    p.add_argument("--space", action="append", help="LABEL=PATH embedding of one class (twice)")
    p.add_argument("--report", action="append", help="METHOD=PATH stability report (repeatable)")
    p.add_argument("--embedding-format", choices=em.FORMATS)
    p.add_argument("--n", type=int, help="expansion words per unstable token (default 5)")
    p.add_argument("--theta", type=float, help="fixed threshold (default: dev-set sweep)")
    p.add_argument("--m", type=int, help="neighbors per word (default 100)")
    p.add_argument("--positive", help="label scored by P/R/F1 (default: first label)")
    p.add_argument("--dev-frac", type=float)
    p.add_argument("--test-frac", type=float)
    p.add_argument("--min-doc-len", type=int, help="drop shorter test documents")
    p.add_argument("--epochs", type=int)
    p.add_argument("--reg", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--bins-out", help="write accuracy per unstable-fraction decile")
    p.add_argument("--phrases", action="store_true", help="merge detected bigrams first")
    p.add_argument("--phrase-delta", type=float)
    p.add_argument("--phrase-threshold", type=float)

    p = command("laws", "correlate instability with frequency, polysemy and concreteness")
    p.add_argument("--report", action="append", help="stability report (repeatable)")
    p.add_argument("--freq", help="word<TAB>count file")
    p.add_argument("--corpus", help="corpus to count frequencies from")
    p.add_argument("--polysemy", help="word<TAB>senses (default: bundled toy lexicon)")
    p.add_argument("--concreteness", help="word<TAB>rating (default: bundled toy lexicon)")
    p.add_argument("--linear-frequency", action="store_true", help="correlate raw instead of log counts")

    p = command("neighbors", "list nearest shared-vocabulary neighbors")
    spaces(p)
    p.add_argument("--side", type=int, choices=(0, 1))
    p.add_argument("--m", type=int)
    p.add_argument("--word", action="append", help="query word (repeatable; default all)")

    p = command("synth", "write a synthetic fixture")
    p.add_argument("--kind", choices=("pair", "classification"))
    p.add_argument("--out-dir")
    p.add_argument("--n", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--n-perturbed", type=int)
    p.add_argument("--n-anchors", type=int)
    p.add_argument("--noise-seed", type=int)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    verbose = ns.pop("verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        cfg = resolve_config(command, ns, _read_config_file(ns.get("config")))
        cfg.validate()
        return HANDLERS[command](cfg)
    except InvariantError as exc:
        print(f"semshift: internal check failed: {exc}", file=sys.stderr)
        return 2
    except (SemshiftError, FileNotFoundError, IsADirectoryError) as exc:
        msg = str(exc)
        if isinstance(exc, OSError) and exc.filename:
            msg = f"cannot open {exc.filename}: {exc.strerror}"
        print(f"semshift: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
