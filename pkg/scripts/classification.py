"""Document expansion for two-class classification, per stability method.

Generates the synthetic two-class corpus with one embedding space per class,
scores stability with each method, and reports test P/R/F1 without expansion
and with expansion (theta picked on the dev split) for several seeds.

    python scripts/classification.py --seeds 0 1 2 3 4
"""

import argparse

import numpy as np

from _common import emit, three_methods
from semshift.analysis import run_expansion, split_documents
from semshift.embed import build_neighbor_index, intersect_vocab
from semshift.synth import CorpusConfig, make_classification_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--n", type=int, default=5, help="expansion words per unstable token")
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--methods", nargs="+", default=["linear", "neighbor", "combination"])
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = CorpusConfig()
    la, lb = cfg.labels
    rows, f1 = [], {}
    for seed in args.seeds:
        fx = make_classification_fixture(cfg, seed)
        s0, s1 = fx.spaces[la], fx.spaces[lb]
        shared = intersect_vocab(s0, s1)
        indexes = {la: build_neighbor_index(s0, shared, args.m), lb: build_neighbor_index(s1, shared, args.m)}
        reports = three_methods(s0, s1, fx.anchors, args.m)
        train, dev, test = split_documents(list(fx.docs), seed)
        results = [run_expansion(train, dev, test, indexes, None, la)]
        results += [run_expansion(train, dev, test, indexes, reports[m], la, n=args.n) for m in args.methods]
        for r in results:
            rows.append((seed, r.method, r.precision, r.recall, r.f1, "" if r.theta is None else r.theta))
            f1.setdefault(r.method, []).append(r.f1)
    for method, vals in f1.items():
        rows.append(("mean", method, "", "", float(np.mean(vals)), ""))
    emit(rows, ("seed", "method", "precision", "recall", "f1", "theta"), args.out)


if __name__ == "__main__":
    main()
