"""Breadth-first exploration of half-edge multigraphs.

The exploration keeps a FIFO queue of frontier half-edges.  It starts with the
half-edges of the sources (source order, ascending index inside each vertex).
At every step the first live frontier half-edge ``g`` (at vertex ``u``) is
revealed together with its partner ``h`` (at ``w``):

* ``w`` unseen: ``w`` gets depth ``depth(u) + 1`` and its other half-edges are
  appended to the queue in ascending order.
* ``w`` seen: a collision; ``h`` is removed from the frontier as well.

Half-edges of vertices at depth ``R`` are never revealed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .graph_core import Multigraph


@dataclass(frozen=True)
class Arrow:
    time: int
    u: int
    w: int
    g: int
    h: int
    collision: bool


@dataclass(frozen=True)
class CollisionEvent:
    time: int
    u: int
    w: int
    depth_u: int
    depth_w: int

    @property
    def collision_depth(self) -> Fraction:
        return Fraction(self.depth_u + self.depth_w + 1, 2)


@dataclass
class ExplorationDag:
    sources: list[int]
    radius: int | None
    arrows: list[Arrow] = field(default_factory=list)
    depth: dict[int, int] = field(default_factory=dict)
    collisions: list[CollisionEvent] = field(default_factory=list)
    delta_series: list[int] = field(default_factory=list)
    indeg: dict[int, int] = field(default_factory=dict)
    order: list[int] = field(default_factory=list)  # vertices in discovery order

    @property
    def num_steps(self) -> int:
        return len(self.arrows)

    @property
    def num_collisions(self) -> int:
        return len(self.collisions)

    def euler_count(self) -> int:
        """|E(dag)| - |V(dag)| + |s|, which equals the collision count."""
        return len(self.arrows) - len(self.depth) + len(self.sources)

    def to_json(self) -> dict:
        return {
            "sources": list(self.sources),
            "radius": self.radius,
            "arrows": [
                {"t": a.time, "u": a.u, "w": a.w, "g": a.g, "h": a.h, "collision": a.collision}
                for a in self.arrows
            ],
            "depths": {str(v): k for v, k in self.depth.items()},
            "collisions": [
                {
                    "t": c.time, "u": c.u, "w": c.w, "depth_u": c.depth_u, "depth_w": c.depth_w,
                    "collision_depth": float(c.collision_depth),
                }
                for c in self.collisions
            ],
            "delta_series": list(self.delta_series),
        }


def bfs_explore(g: Multigraph, sources: Sequence[int], R: int | None = None) -> ExplorationDag:
    sources = [int(s) for s in sources]
    if len(set(sources)) != len(sources):
        raise ValueError("sources must be distinct")
    if R is not None and R < 0:
        raise ValueError("R must be nonnegative")
    part = g.partner_list
    own = g.owner_list
    off = g.offset_list
    dag = ExplorationDag(sources=sources, radius=R)
    depth = dag.depth
    queue: deque[int] = deque()
    alive: set[int] = set()
    for s in sources:
        depth[s] = 0
        dag.order.append(s)
        dag.indeg[s] = 0
        for h in range(off[s], off[s + 1]):
            queue.append(h)
            alive.add(h)
    t = 0
    while queue:
        gh = queue[0]
        if gh not in alive:
            queue.popleft()
            continue
        u = own[gh]
        du = depth[u]
        if R is not None and du >= R:
            # queue depths are nondecreasing, so nothing further is revealed
            break
        queue.popleft()
        dag.delta_series.append(len(alive))
        alive.discard(gh)
        hh = part[gh]
        w = own[hh]
        if w in depth:
            alive.discard(hh)
            dw = depth[w]
            dag.arrows.append(Arrow(t, u, w, gh, hh, True))
            dag.collisions.append(CollisionEvent(t, u, w, du, dw))
        else:
            depth[w] = du + 1
            dag.order.append(w)
            dag.arrows.append(Arrow(t, u, w, gh, hh, False))
            for x in range(off[w], off[w + 1]):
                if x != hh:
                    queue.append(x)
                    alive.add(x)
        dag.indeg[w] = dag.indeg.get(w, 0) + 1
        t += 1
    return dag


def delta_recursion(d: int, collision_flags: Sequence[bool], sources: int = 1) -> list[int]:
    """Frontier sizes predicted by delta_t = |s| d + (d-2) t - d * #{s < t : I_s = 1}."""
    out = []
    hits = 0
    for t, flag in enumerate(collision_flags):
        out.append(sources * d + (d - 2) * t - d * hits)
        hits += int(flag)
    return out


# -- rooted balls ---------------------------------------------------------------

@dataclass(frozen=True)
class RootedBall:
    """Rooted ball: local vertex 0 is the root; ``vertices`` holds the host ids.

    ``edges`` lists local endpoint pairs ``(i, j)`` with ``i <= j``, one entry
    per edge, so multi-edges repeat and a loop is ``(i, i)``.
    """

    vertices: tuple[int, ...]
    depth: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    radius: int

    @property
    def root(self) -> int:
        return self.vertices[0]

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.vertices]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def distance_sequence(self) -> list[int]:
        out = [0] * self.radius
        for k in self.depth:
            if k:
                out[k - 1] += 1
        return out

    def is_tree(self) -> bool:
        return self.num_edges == self.num_vertices - 1

    def relabeled(self, perm: Sequence[int]) -> "RootedBall":
        """Same ball with local ids ``i -> perm[i]`` (``perm[0]`` must be 0)."""
        if perm[0] != 0:
            raise ValueError("the root must stay at position 0")
        inv = [0] * len(perm)
        for i, p in enumerate(perm):
            inv[p] = i
        verts = tuple(self.vertices[inv[k]] for k in range(len(perm)))
        dep = tuple(self.depth[inv[k]] for k in range(len(perm)))
        edges = tuple(sorted((min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in self.edges))
        return RootedBall(verts, dep, edges, self.radius)


def ball_from_edges(num_vertices: int, edges: Sequence[tuple[int, int]], R: int,
                    root: int = 0) -> RootedBall:
    """Ball of radius R around ``root`` in a small graph given by a local edge list."""
    g = Multigraph.from_edges(num_vertices, edges)
    return extract_ball_restricted(g, root, R, None)


def extract_ball_restricted(g: Multigraph, v: int, R: int, allowed) -> RootedBall:
    """Ball around ``v`` avoiding the half-edges of v outside ``allowed`` (None = all)."""
    part = g.partner_list
    own = g.owner_list
    off = g.offset_list
    blocked: set[int] = set()
    if allowed is not None:
        allowed = set(int(h) for h in allowed)
        blocked = set(range(off[v], off[v + 1])) - allowed
    local = {v: 0}
    verts = [v]
    dep = [0]
    head = 0
    while head < len(verts):
        x = verts[head]
        dx = dep[head]
        head += 1
        if dx >= R:
            continue
        for h in range(off[x], off[x + 1]):
            if h in blocked:
                continue
            y_h = part[h]
            if y_h in blocked:
                continue
            y = own[y_h]
            if y not in local:
                local[y] = len(verts)
                verts.append(y)
                dep.append(dx + 1)
    edges = []
    for i, x in enumerate(verts):
        if dep[i] >= R:
            continue
        for h in range(off[x], off[x + 1]):
            if h in blocked:
                continue
            hp = part[h]
            if hp in blocked:
                continue
            j = local[own[hp]]
            # every edge has an endpoint of depth < R; record it from the smaller half-edge
            # unless the other endpoint is at depth R (then only this side sees it)
            if dep[j] < R and hp < h:
                continue
            edges.append((i, j) if i <= j else (j, i))
    edges.sort()
    return RootedBall(tuple(verts), tuple(dep), tuple(edges), R)


def directed_bfs(g: Multigraph, v: int, direction: Sequence[int], R: int) -> RootedBall:
    """Ball around ``v`` using only the half-edges in ``direction`` at ``v``."""
    direction = [int(h) for h in direction]
    if not direction:
        raise ValueError("direction set must be nonempty")
    for h in direction:
        if g.owner_list[h] != v:
            raise ValueError(f"half-edge {h} is not owned by vertex {v}")
    return extract_ball_restricted(g, v, R, direction)


def distance_sequence(g: Multigraph, v: int, R: int) -> list[int]:
    if R < 1:
        raise ValueError("R must be at least 1")
    adj = g.adjacency
    seen = {v}
    layer = [v]
    out = []
    for _ in range(R):
        nxt = []
        for x in layer:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        out.append(len(nxt))
        layer = nxt
    return out


# -- separated directions ---------------------------------------------------------

@dataclass(frozen=True)
class NotFound:
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class SeparatedDirections:
    u_dir: tuple[int, ...]
    v_dir: tuple[int, ...]
    scenario: str  # "disjoint", "one-path" or "two-paths"
    u_tree: bool
    v_tree: bool


def default_cavity_radius(n: int, d: int) -> int:
    return int(np.floor(np.log(n) / np.log(d - 1) / 16))


def _ball_vertices(g: Multigraph, v: int, allowed, L: int) -> set[int]:
    return set(extract_ball_restricted(g, v, L, allowed).vertices)


def find_separated_directions(g: Multigraph, u: int, v: int, L: int | None = None):
    """Direction sets of size d-2 at u and v with disjoint L-balls, at least one a tree.

    The case analysis runs on the single-direction balls.  If the full balls are
    disjoint any pair works; otherwise the directions of u (and of v) whose
    L-ball reaches the other vertex's ball are the ones carrying connecting
    paths (one or two of them), and the candidates dropping those directions
    are tried first.  All remaining candidates are then tried, so a valid pair
    is returned whenever one exists.
    """
    if u == v:
        raise ValueError("u and v must differ")
    if g.d is None:
        raise ValueError("needs a regular graph")
    d = g.d
    if L is None:
        L = default_cavity_radius(g.n, d)
    hu = list(g.half_edges(u))
    hv = list(g.half_edges(v))
    full_u = _ball_vertices(g, u, None, L)
    full_v = _ball_vertices(g, v, None, L)
    if not (full_u & full_v):
        scenario = "disjoint"
        bad_u: list[int] = []
        bad_v: list[int] = []
    else:
        bad_u = [h for h in hu if _ball_vertices(g, u, [h], L) & full_v]
        bad_v = [h for h in hv if _ball_vertices(g, v, [h], L) & full_u]
        scenario = "one-path" if max(len(bad_u), len(bad_v)) <= 1 else "two-paths"

    def ranked(hs, bad):
        cands = [tuple(c) for c in combinations(hs, d - 2)]
        return sorted(cands, key=lambda c: sum(h in bad for h in c))

    ball_cache: dict = {}

    def ball(x, c):
        key = (x, c)
        if key not in ball_cache:
            ball_cache[key] = extract_ball_restricted(g, x, L, c)
        return ball_cache[key]

    for cu in ranked(hu, bad_u):
        bu = ball(u, cu)
        su = set(bu.vertices)
        for cv in ranked(hv, bad_v):
            bv = ball(v, cv)
            if su & set(bv.vertices):
                continue
            tu, tv = bu.is_tree(), bv.is_tree()
            if tu or tv:
                return SeparatedDirections(cu, cv, scenario, tu, tv)
    return NotFound(f"no separated direction pair at L={L} ({scenario})")
