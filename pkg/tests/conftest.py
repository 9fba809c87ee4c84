import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from semshift.align import AlignConfig, train_map
from semshift.embed import EmbeddingSpace, build_neighbor_index, intersect_vocab
from semshift.stability import StabilityParams

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def space(words, rows, space_id="s"):
    return EmbeddingSpace(space_id, tuple(words), np.asarray(rows, dtype=float))


@pytest.fixture
def toy_space():
    return space(["cat", "dog", "fish"], [[1, 0, 0], [1, 1, 0], [0, 0, 2]])


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def random_setting(seed, n_max=30, T=5):
    """Two partially overlapping random spaces with trained maps and indexes."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, n_max + 1))
    dim = int(rng.integers(3, 6))
    base = rng.standard_normal((n, dim))
    words = [f"v{i:02d}" for i in range(n)]
    v1 = base + rng.normal(0, 0.6, (n, dim))
    v1[rng.random(n) < 0.3] = rng.standard_normal((1, dim))
    extra = int(rng.integers(0, 3))
    s0 = space(words + [f"x{i}" for i in range(extra)], np.vstack([base, rng.standard_normal((extra, dim))]), "a")
    s1 = space(words, v1, "b")
    shared = intersect_vocab(s0, s1)
    m = int(rng.integers(2, 8))
    idx0 = build_neighbor_index(s0, shared, m)
    idx1 = build_neighbor_index(s1, shared, m)
    cfg = AlignConfig(max_iterations=300)
    m01 = train_map(s0, s1, list(shared.words), cfg)
    m10 = train_map(s1, s0, list(shared.words), cfg)
    floor = float(rng.uniform(-0.2, 0.6))
    return s0, s1, shared, idx0, idx1, m01, m10, StabilityParams(m=m, T=T, sim_floor=floor)


def vec_dict(s):
    return {w: list(s.vector(w)) for w in s.words}


def lists(idx, with_sims=True):
    return {w: (lst if with_sims else [o for o, _ in lst]) for w, lst in idx.entries.items()}
