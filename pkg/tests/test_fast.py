from __future__ import annotations

import numpy as np
from hypothesis import given, settings, strategies as st

from shotgun._fast import level_counts, profile_hashes, refined_hashes, wl_fingerprints
from shotgun.graph_core import sample_configuration
from shotgun.neighborhood import canonical_code, extract_ball

# small n and larger d give many loops and multi-edges
graphs = st.builds(
    sample_configuration,
    st.sampled_from([4, 6, 8, 12, 30]),
    st.sampled_from([3, 4, 6]),
    st.integers(0, 10**6),
)


@settings(max_examples=120, deadline=None)
@given(graphs, st.integers(1, 3))
def test_invariants_constant_on_types(g, R):
    prof = profile_hashes(g, R)[:, R - 1]
    ref = refined_hashes(g, R)[:, R - 1]
    wl = wl_fingerprints(g, np.arange(g.n), R)
    seen: dict[bytes, tuple] = {}
    for v in range(g.n):
        c = canonical_code(extract_ball(g, v, R))
        key = (prof[v], ref[v], wl[v])
        assert seen.setdefault(c, key) == key


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(1, 4), st.integers(0, 2**16))
def test_invariants_follow_relabeling(g, R, seed):
    perm = np.random.default_rng(seed).permutation(g.n)
    h = g.relabel(perm)
    assert np.array_equal(profile_hashes(g, R)[:, R - 1], profile_hashes(h, R)[perm, R - 1])
    assert np.array_equal(refined_hashes(g, R)[:, R - 1], refined_hashes(h, R)[perm, R - 1])


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(1, 4))
def test_level_counts_match_ball(g, R):
    lc = level_counts(g, R)
    for v in range(g.n):
        b = extract_ball(g, v, R)
        assert lc[v, :, 0].tolist() == b.distance_sequence()
        inside = sum(1 for i, j in b.edges if b.depth[i] == b.depth[j])
        down = sum(1 for i, j in b.edges if b.depth[i] != b.depth[j])
        assert lc[v, :, 1].sum() == inside
        assert lc[v, :, 2].sum() == down


def test_prefix_property():
    g = sample_configuration(500, 3, 4)
    a = profile_hashes(g, 6)
    b = profile_hashes(g, 3)
    assert np.array_equal(a[:, :3], b)
