"""Test F1 as a function of the number of expansion words n.

Uses combination stability with theta picked once per seed on the dev split
(at n=5), then sweeps n over 0..20 with that theta fixed.

    python scripts/expansion_sweep.py --seeds 0 1 --n-max 20
"""

import argparse
import warnings

import numpy as np

from _common import emit
from semshift.align import train_map
from semshift.analysis import run_expansion, split_documents
from semshift.embed import build_neighbor_index, intersect_vocab
from semshift.stability import StabilityParams, combination_stability
from semshift.synth import CorpusConfig, make_classification_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--n-max", type=int, default=20)
    ap.add_argument("--step", type=int, default=2)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = CorpusConfig()
    la, lb = cfg.labels
    grid = list(range(0, args.n_max + 1, args.step))
    scores = {n: [] for n in grid}
    for seed in args.seeds:
        fx = make_classification_fixture(cfg, seed)
        s0, s1 = fx.spaces[la], fx.spaces[lb]
        shared = intersect_vocab(s0, s1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m01, m10 = train_map(s0, s1, fx.anchors), train_map(s1, s0, fx.anchors)
        idx0, idx1 = build_neighbor_index(s0, shared, args.m), build_neighbor_index(s1, shared, args.m)
        report = combination_stability(s0, s1, idx0, idx1, m01, m10, StabilityParams(m=args.m))
        train, dev, test = split_documents(list(fx.docs), seed)
        indexes = {la: idx0, lb: idx1}
        theta = run_expansion(train, dev, test, indexes, report, la, n=5).theta
        for n in grid:
            res = run_expansion(train, dev, test, indexes, report, la, n=n, theta=theta)
            scores[n].append(res.f1)
    rows = [(n, float(np.mean(v)), float(np.min(v)), float(np.max(v))) for n, v in scores.items()]
    emit(rows, ("n", "mean_f1", "min_f1", "max_f1"), args.out)


if __name__ == "__main__":
    main()
