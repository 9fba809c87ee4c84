"""Average cosine after one-way and round-trip linear mappings.

Compares the one-way similarity cos(W x, y) with the round-trip similarity
cos(W' W x, x) on synthetic pairs of increasing drift, plus an identical-space
and a pure-rotation control.

    python scripts/mapping_diagnostics.py --drifts 0.2 0.6 1.0
"""

import argparse
import warnings

import numpy as np

from _common import emit
from semshift.align import one_way_similarities, round_trip_similarities, train_map
from semshift.embed import EmbeddingSpace, intersect_vocab
from semshift.synth import PairConfig, make_viewpoint_pair, random_orthogonal


def diagnose(s0, s1, anchors):
    words = intersect_vocab(s0, s1).words
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m01, m10 = train_map(s0, s1, anchors), train_map(s1, s0, anchors)
    ow = (one_way_similarities(m01, s0, s1, words).mean() + one_way_similarities(m10, s1, s0, words).mean()) / 2
    rt01, rt10 = round_trip_similarities(m01, m10, s0, s1, words)
    return float(ow), float((rt01.mean() + rt10.mean()) / 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--drifts", type=float, nargs="+", default=[0.2, 0.6, 1.0, 1.5])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    pair = make_viewpoint_pair(PairConfig(n=args.n), base_seed=args.seed)
    rows.append(("identical", *diagnose(pair.space0, pair.space0, pair.anchors)))
    R = random_orthogonal(pair.space0.dim, np.random.default_rng(args.seed))
    rotated = EmbeddingSpace("rot", pair.space0.words, pair.space0.vectors @ R.T)
    rows.append(("rotation", *diagnose(pair.space0, rotated, pair.anchors)))
    for d in args.drifts:
        pair = make_viewpoint_pair(PairConfig(n=args.n, drift_max=d), base_seed=args.seed)
        rows.append((f"drift_max={d:g}", *diagnose(pair.space0, pair.space1, pair.anchors)))
    emit(rows, ("setting", "one_way_mean", "round_trip_mean"), args.out)


if __name__ == "__main__":
    main()
