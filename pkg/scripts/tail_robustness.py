"""Agreement of the most stable words across independently noised re-runs.

For one underlying vocabulary, draws several noise seeds, scores each run and
reports the Jaccard overlap of the k most stable words for every pair of runs.

    python scripts/tail_robustness.py --noise-seeds 0 1 2 --k-frac 0.25
"""

import argparse
from itertools import combinations

from _common import emit, three_methods
from semshift.stability import rank_by_instability, tail_jaccard
from semshift.synth import PairConfig, make_viewpoint_pair


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--noise-seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--k-frac", type=float, default=0.25)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = PairConfig(n=args.n)
    rankings = {}
    for ns in args.noise_seeds:
        pair = make_viewpoint_pair(cfg, base_seed=args.base_seed, noise_seed=ns)
        for method, report in three_methods(pair.space0, pair.space1, pair.anchors, args.m).items():
            rankings[method, ns] = rank_by_instability(report)
    k = max(1, int(args.k_frac * args.n))
    rows = []
    for method in ("linear", "neighbor", "combination"):
        for a, b in combinations(args.noise_seeds, 2):
            rows.append((method, a, b, k, tail_jaccard(rankings[method, a], rankings[method, b], k)))
    emit(rows, ("method", "noise_a", "noise_b", "k", "tail_jaccard"), args.out)


if __name__ == "__main__":
    main()
