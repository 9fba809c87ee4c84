from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semshift.analysis import (
    ExpandConfig,
    LinearTextModel,
    TrainConfig,
    accuracy_by_bin,
    classify,
    evaluate_prf,
    expand_document,
    expand_training_set,
    law_correlations,
    pearson,
    rank_delta,
    read_lexicon,
    run_expansion,
    split_documents,
    summarize_viewpoints,
    summary_is_sound,
    theta_grid,
    train_classifier,
    unstable_fraction,
)
from semshift.corpus import Document, FrequencyTable, document_frequencies
from semshift.embed import EmbeddingSpace, NeighborIndex, build_neighbor_index, generate_synthetic_space, intersect_vocab
from semshift.errors import SemshiftError, UnknownWordError
from semshift.stability import StabilityParams, StabilityReport


def make_report(scores, method="combination", T=1):
    words = tuple(sorted(scores))
    return StabilityReport(method, T, StabilityParams(T=T), ("a", "b"), words,
                           np.array([scores[w] for w in words]))


def manual_index(lists, space_id="s"):
    """Build an index from word -> [(neighbor, sim)] lists of equal length."""
    words = tuple(sorted(lists))
    pos = {w: i for i, w in enumerate(words)}
    nb = np.array([[pos[o] for o, _ in lists[w]] for w in words], dtype=np.int64)
    sims = np.array([[s for _, s in lists[w]] for w in words], dtype=np.float64)
    return NeighborIndex(space_id, nb.shape[1], words, nb, sims)


def doc(tokens, i=0, label=None):
    return Document(f"d{i}", tuple(tokens), label)


# --- summaries --------------------------------------------------------------

def _summary_fixture():
    # concept c; side 0 neighbors in order n1..n6, side 1 in reverse
    names = ["c", "n1", "n2", "n3", "n4", "n5", "n6"]
    order0 = names[1:]
    lists0, lists1 = {}, {}
    for w in names:
        others = [o for o in names if o != w]
        lists0[w] = [(o, 0.9 - 0.1 * i) for i, o in enumerate(order0 if w == "c" else others)]
        lists1[w] = [(o, 0.9 - 0.1 * i) for i, o in enumerate(order0[::-1] if w == "c" else others)]
    scores = {"c": 0.5, "n1": 0.1, "n2": 0.8, "n3": 0.2, "n4": 0.9, "n5": 0.3, "n6": 0.7}
    return manual_index(lists0, "a"), manual_index(lists1, "b"), make_report(scores)


def test_summary_with_three_unstable_neighbors():
    idx0, idx1, report = _summary_fixture()
    s = summarize_viewpoints("c", idx0, idx1, report, threshold=0.4, l=5)
    assert s.side0 == ("n1", "n3", "n5")
    assert s.side1 == ("n5", "n3", "n1")
    assert summary_is_sound(s, idx0, idx1, report, 5)


def test_summary_threshold_extremes():
    idx0, idx1, report = _summary_fixture()
    assert summarize_viewpoints("c", idx0, idx1, report, 0.0).side0 == ()
    assert summarize_viewpoints("c", idx0, idx1, report, 0.0).side1 == ()
    full = summarize_viewpoints("c", idx0, idx1, report, 1.0, l=5)
    assert full.side0 == ("n1", "n2", "n3", "n4", "n5")
    assert full.side1 == ("n6", "n5", "n4", "n3", "n2")


def test_summary_length_cap_and_errors():
    idx0, idx1, report = _summary_fixture()
    assert len(summarize_viewpoints("c", idx0, idx1, report, 1.0, l=2).side0) == 2
    with pytest.raises(UnknownWordError):
        summarize_viewpoints("zzz", idx0, idx1, report, 0.5)
    with pytest.raises(ValueError):
        summarize_viewpoints("c", idx0, idx1, report, 0.5, l=-1)


def test_summary_serializations():
    idx0, idx1, report = _summary_fixture()
    s = summarize_viewpoints("c", idx0, idx1, report, 0.4, l=5)
    assert s.to_dict() == {"concept": "c", "threshold": 0.4,
                           "side0": ["n1", "n3", "n5"], "side1": ["n5", "n3", "n1"]}
    lines = s.to_text().splitlines()
    assert len(lines) == 4 and lines[1].split() == ["n1", "n5"]


def test_unsound_summary_detected():
    idx0, idx1, report = _summary_fixture()
    s = summarize_viewpoints("c", idx0, idx1, report, 0.4, l=5)
    assert not summary_is_sound(replace(s, side0=("n2",)), idx0, idx1, report, 5)
    assert not summary_is_sound(replace(s, side0=("n3", "n1")), idx0, idx1, report, 5)
    assert not summary_is_sound(s, idx0, idx1, report, 2)


@given(st.integers(0, 500), st.floats(0, 1), st.integers(0, 8))
def test_summary_soundness_property(seed, threshold, l):
    s0 = generate_synthetic_space(25, 4, seed)
    s1 = generate_synthetic_space(25, 4, seed + 1)
    shared = intersect_vocab(s0, s1)
    idx0, idx1 = build_neighbor_index(s0, shared, 6), build_neighbor_index(s1, shared, 6)
    rng = np.random.default_rng(seed)
    report = make_report(dict(zip(shared.words, rng.random(len(shared)))))
    for concept in shared.words[:5]:
        summary = summarize_viewpoints(concept, idx0, idx1, report, threshold, l)
        assert summary_is_sound(summary, idx0, idx1, report, l)


# --- expansion --------------------------------------------------------------

def _tax_fixture():
    lists = {
        "tax": [("cut", 0.9), ("rate", 0.8), ("burden", 0.7)],
        "cut": [("tax", 0.9), ("rate", 0.5), ("burden", 0.4)],
        "rate": [("tax", 0.8), ("cut", 0.5), ("burden", 0.3)],
        "burden": [("tax", 0.7), ("cut", 0.4), ("rate", 0.3)],
    }
    report = make_report({"tax": 0.1, "cut": 0.2, "rate": 0.9, "burden": 0.3})
    return manual_index(lists), report


def test_expand_tax_example():
    idx, report = _tax_fixture()
    out = expand_document(doc(["tax"]), idx, report, ExpandConfig(theta=0.5, n=2))
    assert out.tokens == ("tax", "cut", "burden")


def test_expand_each_occurrence_and_skips_unknown():
    idx, report = _tax_fixture()
    out = expand_document(doc(["tax", "hello", "tax", "rate"]), idx, report, ExpandConfig(0.5, 1))
    assert out.tokens == ("tax", "hello", "tax", "rate", "cut", "cut")


def test_expand_noops():
    idx, report = _tax_fixture()
    d = doc(["tax", "cut"])
    assert expand_document(d, idx, report, ExpandConfig(theta=0.0, n=5)) == d
    assert expand_document(d, idx, report, ExpandConfig(theta=0.5, n=0)) == d
    with pytest.raises(ValueError):
        ExpandConfig(n=-1)


def test_expand_training_set_uses_class_index_and_keeps_test_untouched():
    idx, report = _tax_fixture()
    train = [doc(["tax"], 0, "con"), doc(["tax"], 1, "lab")]
    test = [doc(["tax"], 2, "con")]
    snapshot = [d.tokens for d in test]
    out = expand_training_set(train, {"con": idx}, report, ExpandConfig(0.5, 2))
    assert out[0].tokens == ("tax", "cut", "burden")
    assert out[1] is train[1]
    assert [d.tokens for d in test] == snapshot


def _random_expansion_setting(seed):
    s = generate_synthetic_space(20, 4, seed)
    idx = build_neighbor_index(s, intersect_vocab(s, s), 6)
    rng = np.random.default_rng(seed)
    report = make_report(dict(zip(idx.words, rng.random(len(idx.words)))))
    d = doc(rng.choice(idx.words, size=8).tolist() + ["oov"])
    return idx, report, d


@given(st.integers(0, 1000), st.floats(0, 1), st.floats(0, 1))
def test_expansion_monotone_in_theta_when_n_covers_lists(seed, a, b):
    lo, hi = sorted((a, b))
    idx, report, d = _random_expansion_setting(seed)
    n = idx.k  # no truncation: eligible sets only grow with theta
    extra_lo = expand_document(d, idx, report, ExpandConfig(lo, n)).tokens[len(d):]
    extra_hi = expand_document(d, idx, report, ExpandConfig(hi, n)).tokens[len(d):]
    assert not Counter(extra_lo) - Counter(extra_hi)


@given(st.integers(0, 1000), st.floats(0, 1), st.floats(0, 1), st.integers(1, 6))
def test_expanded_sources_monotone_in_theta(seed, a, b, n):
    # with truncation to n the appended words may change, but every token that
    # triggered an expansion at a lower theta still triggers one at a higher theta
    lo, hi = sorted((a, b))
    idx, report, d = _random_expansion_setting(seed)

    def triggers(theta):
        return {t for t in d.tokens if t in report and report.score(t) <= theta
                and any(report.score(o) <= theta for o, _ in idx.neighbors_of(t))}

    assert triggers(lo) <= triggers(hi)
    out_lo = expand_document(d, idx, report, ExpandConfig(lo, n))
    out_hi = expand_document(d, idx, report, ExpandConfig(hi, n))
    assert out_lo.tokens[:len(d)] == d.tokens == out_hi.tokens[:len(d)]
    assert len(out_lo) <= len(out_hi)


# --- classifier -------------------------------------------------------------

def _synthetic_docs(n_docs, seed):
    rng = np.random.default_rng(seed)
    vocab = {"con": [f"c{i}" for i in range(10)], "lab": [f"l{i}" for i in range(10)]}
    noise = [f"z{i}" for i in range(50)]
    docs = []
    for i in range(n_docs):
        label = "con" if i % 2 == 0 else "lab"
        toks = list(rng.choice(vocab[label], 4)) + list(rng.choice(noise, 12))
        rng.shuffle(toks)
        docs.append(Document(f"d{i}", tuple(toks), label))
    return docs


def test_separable_toy_corpus():
    train = [doc(["red"] * (1 + i % 3), i, "A") for i in range(5)]
    train += [doc(["blue"] * (1 + i % 2), 10 + i, "B") for i in range(5)]
    model = train_classifier(train)
    assert all(classify(model, d) == d.label for d in train)
    assert classify(model, doc(["red", "red"])) == "A"
    assert model.classes == ("A", "B")
    assert np.all(np.isfinite(model.coef)) and model.epochs == TrainConfig().epochs


def test_classifier_determinism():
    docs = _synthetic_docs(60, 1)
    a, b = train_classifier(docs), train_classifier(list(docs))
    np.testing.assert_array_equal(a.coef, b.coef)
    assert a.bias == b.bias and a.weights == b.weights
    c = train_classifier(docs, TrainConfig(seed=7))
    assert not np.array_equal(a.coef, c.coef)


def test_classifier_heldout_f1():
    docs = _synthetic_docs(200, 2)
    train, test = docs[:160], docs[160:]
    model = train_classifier(train)
    pairs = [(d.label, classify(model, d)) for d in test]
    assert evaluate_prf(pairs, "lab")[2] > 0.9


def test_empty_doc_uses_bias_sign():
    docs = _synthetic_docs(40, 3)
    model = train_classifier(docs)
    assert model.decision(doc([])) == model.bias
    assert classify(model, doc([])) == (model.classes[1] if model.bias > 0 else model.classes[0])
    assert classify(model, doc(["never", "seen"])) == classify(model, doc([]))


def test_zero_model_picks_first_label():
    zero = LinearTextModel(("a",), np.zeros(1), 0.0, ("con", "lab"), document_frequencies([doc(["a"])]))
    assert classify(zero, doc(["a"])) == "con"


def test_classifier_errors():
    with pytest.raises(SemshiftError):
        train_classifier([doc(["a"], 0, "x"), doc(["b"], 1, "x")])
    with pytest.raises(SemshiftError):
        train_classifier([doc([], 0, "x"), doc(["b"], 1, "y")])


# --- evaluation -------------------------------------------------------------

def test_prf_examples():
    assert evaluate_prf([("+", "+"), ("-", "-")], "+") == (1.0, 1.0, 1.0)
    p, r, f = evaluate_prf([("+", "+"), ("+", "-"), ("-", "-")], "+")
    assert (p, r) == (1.0, 0.5) and f == pytest.approx(2 / 3)
    assert evaluate_prf([("-", "-")], "+") == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        evaluate_prf([], "+")


@given(st.lists(st.tuples(st.sampled_from("ab"), st.sampled_from("ab")), min_size=1))
def test_prf_bounds(pairs):
    p, r, f = evaluate_prf(pairs, "a")
    assert all(0 <= v <= 1 for v in (p, r, f))
    assert f <= max(p, r) + 1e-12


def test_split_documents_partition():
    docs = _synthetic_docs(50, 0)
    train, dev, test = split_documents(docs, seed=3)
    assert (len(train), len(dev), len(test)) == (40, 5, 5)
    assert sorted(d.id for d in train + dev + test) == sorted(d.id for d in docs)
    assert split_documents(docs, seed=3) == (train, dev, test)


def test_run_expansion_baseline_and_sweep():
    docs = _synthetic_docs(120, 4)
    train, dev, test = split_documents(docs, seed=0, dev_frac=0.2, test_frac=0.2)
    words = sorted({t for d in docs for t in d.tokens})
    rng = np.random.default_rng(0)
    report = make_report(dict(zip(words, rng.random(len(words)))))
    s = generate_synthetic_space(len(words), 4, 0)
    sp_ = EmbeddingSpace("x", tuple(words), s.vectors)
    idx = build_neighbor_index(sp_, intersect_vocab(sp_, sp_), 5)
    snapshot = [d.tokens for d in test]
    base = run_expansion(train, dev, test, {"con": idx, "lab": idx}, None, "lab")
    assert base.method == "none" and base.theta is None and len(base.predictions) == len(test)
    res = run_expansion(train, dev, test, {"con": idx, "lab": idx}, report, "lab", n=3)
    assert res.theta in theta_grid(report) and set(res.dev_f1) <= set(theta_grid(report))
    assert res.dev_f1[res.theta] == max(res.dev_f1.values())
    assert [d.tokens for d in test] == snapshot
    fixed = run_expansion(train, dev, test, {"con": idx, "lab": idx}, report, "lab", n=3, theta=0.5)
    assert fixed.theta == 0.5 and fixed.dev_f1 == {}


def test_unstable_fraction_and_bins():
    report = make_report({"a": 0.1, "b": 0.9})
    assert unstable_fraction(doc(["a", "b", "zz"]), report, 0.5) == 0.5
    assert unstable_fraction(doc(["zz"]), report, 0.5) == 0.0
    pairs = [("x", "x"), ("x", "y"), ("y", "y"), ("y", "y")]
    rows = accuracy_by_bin(pairs, [0.05, 0.05, 0.95, 1.0], n_bins=10)
    assert len(rows) == 10
    assert rows[0][2:] == (2, 0.5)
    assert rows[-1][2:] == (2, 1.0)
    assert rows[4][2] == 0 and np.isnan(rows[4][3])


# --- pearson and laws -------------------------------------------------------

def test_pearson_examples():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson(x, [2 * v + 1 for v in x]) == pytest.approx(1.0)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)
    assert pearson(x, [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-12)


@pytest.mark.parametrize("x, y", [([1, 2], [1, 2, 3]), ([1], [1]), ([1, 1, 1], [1, 2, 3]), ([1, 2, 3], [5, 5, 5])])
def test_pearson_errors(x, y):
    with pytest.raises(ValueError):
        pearson(x, y)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30),
       st.floats(0.1, 10), st.floats(-100, 100))
def test_pearson_affine_invariance(points, slope, shift):
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    r = pearson(x, y)
    assert -1 <= r <= 1
    assert pearson(slope * x + shift, y) == pytest.approx(r, abs=1e-9)
    assert pearson(x, slope * y + shift) == pytest.approx(r, abs=1e-9)


def test_pearson_affine_invariance_tight():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(50), rng.standard_normal(50)
    r = pearson(x, y)
    assert abs(pearson(3 * x + 2, y) - r) <= 1e-12
    assert abs(pearson(x, 0.5 * y - 7) - r) <= 1e-12


def test_conformity_on_monotone_fixture():
    words = [f"w{i:02d}" for i in range(30)]
    # instability falls as frequency rises
    report = make_report({w: i / 29 for i, w in enumerate(words)})
    freq = FrequencyTable({w: 2 ** (i + 1) for i, w in enumerate(words)})
    law = law_correlations(report, freq)
    assert law.correlations["conformity"] < -0.9
    assert law.counts == {"conformity": 30}
    raw = law_correlations(report, freq, log_frequency=False)
    assert raw.correlations["conformity"] < 0


def test_laws_use_overlap_only():
    report = make_report({"a": 0.1, "b": 0.5, "c": 0.9})
    law = law_correlations(report, polysemy={"a": 5, "b": 3, "c": 1, "zzz": 99},
                           concreteness={"a": 1.0, "c": 4.0})
    assert law.counts == {"innovation": 3, "concreteness": 2}
    assert law.correlations["innovation"] == pytest.approx(1.0)
    assert law.correlations["concreteness"] == pytest.approx(-1.0)
    with pytest.raises(SemshiftError):
        law_correlations(report, polysemy={"x": 1, "y": 2})


def test_read_lexicon(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("# header\nbank\t10\n\nrun\t2.5\n")
    assert read_lexicon(p) == {"bank": 10.0, "run": 2.5}
    p.write_text("bank 10\n")
    with pytest.raises(SemshiftError, match=":1:"):
        read_lexicon(p)


def test_shipped_lexicons_load():
    from importlib.resources import files
    data = files("semshift") / "data"
    for name in ("polysemy.tsv", "concreteness.tsv"):
        assert len(read_lexicon(data / name)) >= 20


# --- rank delta -------------------------------------------------------------

def test_rank_delta_examples():
    ranking = ["a", "b", "c", "d"]
    same = rank_delta(ranking, ranking, ["a", "c"])
    assert same.deltas == {"a": 0, "c": 0} and same.mean_rank_a == same.mean_rank_b == 1.0
    flip = rank_delta(ranking, ranking[::-1], ["a"])
    assert flip.deltas == {"a": -3}
    with pytest.raises(UnknownWordError):
        rank_delta(ranking, ["a"], ["b"])
