"""Helpers shared by the experiment scripts."""

from __future__ import annotations

import sys
import warnings

from semshift.align import train_map
from semshift.embed import build_neighbor_index, intersect_vocab
from semshift.stability import StabilityParams, combination_stability, linear_stability, neighbor_stability


def three_methods(s0, s1, anchors, m: int = 100, T: int = 5) -> dict:
    """Linear, neighbor and combination reports for one pair of spaces."""
    shared = intersect_vocab(s0, s1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m01 = train_map(s0, s1, anchors)
        m10 = train_map(s1, s0, anchors)
    idx0, idx1 = build_neighbor_index(s0, shared, m), build_neighbor_index(s1, shared, m)
    params = StabilityParams(m=m, T=T)
    return {
        "linear": linear_stability(s0, s1, shared, m01, m10, params),
        "neighbor": neighbor_stability(s0, s1, idx0, idx1, params),
        "combination": combination_stability(s0, s1, idx0, idx1, m01, m10, params),
    }


def emit(rows, header, out=None):
    """Write tab-separated rows to ``out`` (or stdout)."""
    fh = open(out, "w", encoding="utf-8") if out else sys.stdout
    try:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    finally:
        if out:
            fh.close()
