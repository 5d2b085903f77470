from __future__ import annotations

from collections import deque
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shotgun._fast import gamma_by_radius, level_counts
from shotgun.exploration import (
    NotFound, SeparatedDirections, ball_from_edges, bfs_explore, delta_recursion, directed_bfs,
    distance_sequence, extract_ball_restricted, find_separated_directions,
)
from shotgun.graph_core import (
    Multigraph, complete_graph_k4, k33_graph, prism_graph, sample_configuration,
)

graphs = st.builds(
    sample_configuration,
    st.sampled_from([10, 20, 40, 100]),
    st.sampled_from([3, 4]),
    st.integers(0, 10**6),
)


def _distances(g: Multigraph, sources) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    q = deque(sources)
    while q:
        x = q.popleft()
        for y in g.adjacency[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def _ball_oracle(g: Multigraph, v: int, R: int):
    """(vertex set, edge count) of B_R(v) straight from the definition."""
    dist = _distances(g, [v])
    inside = {x for x, k in dist.items() if k <= R}
    edges = [(a, b) for a, b in g.edges()
             if a in inside and b in inside and not (dist[a] == R and dist[b] == R)]
    return inside, len(edges)


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(0, 5), st.data())
def test_frontier_recursion(g, R, data):
    k = data.draw(st.integers(1, 3))
    sources = data.draw(st.lists(st.integers(0, g.n - 1), min_size=k, max_size=k, unique=True))
    dag = bfs_explore(g, sources, R)
    flags = [a.collision for a in dag.arrows]
    assert dag.delta_series == delta_recursion(g.d, flags, len(sources))


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(0, 6), st.data())
def test_euler_count_equals_collisions(g, R, data):
    v = data.draw(st.integers(0, g.n - 1))
    dag = bfs_explore(g, [v], R)
    assert dag.euler_count() == dag.num_collisions
    assert sum(dag.indeg.values()) == dag.num_steps
    for c in dag.collisions:
        assert abs(c.depth_u - c.depth_w) <= 1
        assert 2 * c.collision_depth == c.depth_u + c.depth_w + 1


@settings(max_examples=40, deadline=None)
@given(graphs, st.integers(1, 6), st.data())
def test_gamma_kernel_matches_exploration(g, rmax, data):
    k = data.draw(st.integers(1, 3))
    sources = data.draw(st.lists(st.integers(0, g.n - 1), min_size=k, max_size=k, unique=True))
    gam = gamma_by_radius(g, sources, rmax)
    for R in range(rmax + 1):
        assert gam[R] == bfs_explore(g, sources, R).num_collisions


def test_unbounded_exploration_k4():
    dag = bfs_explore(complete_graph_k4(), [0])
    assert dag.num_collisions == 3
    assert len(dag.depth) == 4
    assert dag.delta_series[0] == 3


def test_exploration_errors():
    g = prism_graph()
    with pytest.raises(ValueError):
        bfs_explore(g, [0, 0], 2)
    with pytest.raises(ValueError):
        bfs_explore(g, [0], -1)


def test_dag_json_has_all_arrows():
    dag = bfs_explore(prism_graph(), [0], 2)
    obj = dag.to_json()
    assert len(obj["arrows"]) == dag.num_steps
    assert obj["delta_series"] == dag.delta_series


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(0, 6), st.data())
def test_ball_matches_definition(g, R, data):
    v = data.draw(st.integers(0, g.n - 1))
    b = extract_ball_restricted(g, v, R, None)
    verts, ne = _ball_oracle(g, v, R)
    assert set(b.vertices) == verts
    assert b.num_edges == ne
    assert b.vertices[0] == v and b.depth[0] == 0
    dist = _distances(g, [v])
    assert all(dist[x] == k for x, k in zip(b.vertices, b.depth))


def test_boundary_edges_are_dropped():
    b = extract_ball_restricted(prism_graph(), 0, 1, None)
    assert sorted(b.vertices) == [0, 1, 2, 3]
    assert b.num_edges == 3  # the edge 1-2 joins two depth-1 vertices
    assert b.is_tree()


def test_distance_sequences_of_named_graphs():
    assert distance_sequence(prism_graph(), 0, 2) == [3, 2]
    assert distance_sequence(k33_graph(), 0, 2) == [3, 2]
    assert distance_sequence(complete_graph_k4(), 0, 3) == [3, 0, 0]
    with pytest.raises(ValueError):
        distance_sequence(prism_graph(), 0, 0)


@settings(max_examples=40, deadline=None)
@given(graphs, st.integers(1, 6), st.data())
def test_distance_sequence_matches_level_counts(g, R, data):
    v = data.draw(st.integers(0, g.n - 1))
    lc = level_counts(g, R, np.array([v]))[0, :, 0]
    assert distance_sequence(g, v, R) == lc.tolist()
    assert extract_ball_restricted(g, v, R, None).distance_sequence() == lc.tolist()


def test_directed_ball():
    g = prism_graph()
    h0 = list(g.half_edges(0))
    b = directed_bfs(g, 0, h0[:1], 1)
    assert b.num_vertices == 2
    full = directed_bfs(g, 0, h0, 3)
    assert full == extract_ball_restricted(g, 0, 3, None)
    with pytest.raises(ValueError):
        directed_bfs(g, 0, [], 2)
    with pytest.raises(ValueError):
        directed_bfs(g, 0, list(g.half_edges(1)), 2)


def test_ball_from_edges_and_relabel():
    b = ball_from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)], 2)
    assert b.num_edges == 4
    c = b.relabeled([0, 3, 1, 2])
    assert c.num_edges == 4 and c.depth[0] == 0
    with pytest.raises(ValueError):
        b.relabeled([1, 0, 2, 3])


def _check_separated(g, u, v, L, res):
    bu = directed_bfs(g, u, res.u_dir, L)
    bv = directed_bfs(g, v, res.v_dir, L)
    assert not set(bu.vertices) & set(bv.vertices)
    assert bu.is_tree() or bv.is_tree()
    assert len(res.u_dir) == len(res.v_dir) == g.d - 2


def _any_separated(g, u, v, L) -> bool:
    for cu in combinations(g.half_edges(u), g.d - 2):
        bu = directed_bfs(g, u, cu, L)
        for cv in combinations(g.half_edges(v), g.d - 2):
            bv = directed_bfs(g, v, cv, L)
            if not set(bu.vertices) & set(bv.vertices) and (bu.is_tree() or bv.is_tree()):
                return True
    return False


@pytest.mark.parametrize("seed", range(6))
def test_separated_directions_sound_and_complete(seed):
    g = sample_configuration(60, 4, seed)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        u, v = (int(x) for x in rng.choice(g.n, 2, replace=False))
        for L in (1, 2, 3):
            res = find_separated_directions(g, u, v, L)
            if isinstance(res, SeparatedDirections):
                _check_separated(g, u, v, L, res)
            else:
                assert isinstance(res, NotFound)
                assert not _any_separated(g, u, v, L)


def test_separated_directions_scenarios():
    g = sample_configuration(2000, 3, 1)
    res = find_separated_directions(g, 0, 1000, 2)
    assert res and res.scenario == "disjoint"
    u = 0
    w = g.adjacency[u][0]
    res = find_separated_directions(g, u, w, 2)
    if res:
        assert res.scenario in ("one-path", "two-paths")
        _check_separated(g, u, w, 2, res)
    with pytest.raises(ValueError):
        find_separated_directions(g, 3, 3, 2)
