"""Cycle structures of BFS explorations, their labelings and probabilities.

The cycle structure of a source set is the part of the exploration DAG that
carries the in-ball cycles, closed under taking ancestors (every arrow into a
kept vertex is kept, together with its tail).  Everything outside it is a
stack of full (d-1)-ary trees, so in a d-regular graph the structure, the
radius and the degree determine the whole ball.

A *labeling* of a structure is one BFS history that produces it: at every step
the history records whether the revealed half-edge opened a new vertex or
closed a cycle, and in the latter case which frontier half-edge was hit.  The
exact probability of a structure is the sum over its histories of the product
of the per-step probabilities.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .canon import canonical_digest, count_automorphisms
from .exploration import Arrow, ExplorationDag, bfs_explore
from .graph_core import Multigraph


class BudgetExceeded(RuntimeError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ExceedsBudget:
    budget: int

    def __bool__(self) -> bool:
        return False


@dataclass
class CycleStructure:
    sources: tuple[int, ...]
    radius: int
    depth: dict[int, int]  # structure vertex -> depth
    arrows: list[Arrow]  # time-ordered
    d: int | None = None

    @property
    def gamma(self) -> int:
        return len(self.arrows) - len(self.depth) + len(self.sources)

    @property
    def num_edges(self) -> int:
        return len(self.arrows)

    @property
    def num_vertices(self) -> int:
        return len(self.depth)

    def collision_arrows(self) -> list[Arrow]:
        return [a for a in self.arrows if a.collision]

    def local_graph(self) -> tuple[int, list[tuple[int, int]], list[int], dict[int, int]]:
        """(vertex count, local edge list, local roots, host -> local id)."""
        ids: dict[int, int] = {}
        for s in self.sources:
            ids[s] = len(ids)
        for v in sorted(self.depth, key=lambda x: (self.depth[x], x)):
            if v not in ids:
                ids[v] = len(ids)
        edges = [(ids[a.u], ids[a.w]) for a in self.arrows]
        return len(ids), edges, [ids[s] for s in self.sources], ids

    def to_json(self, labeling: "Labeling | None" = None) -> dict:
        out = {
            "sources": list(self.sources),
            "radius": self.radius,
            "d": self.d,
            "depths": {str(v): k for v, k in sorted(self.depth.items())},
            "arrows": [
                {"u": a.u, "w": a.w, "g": a.g, "h": a.h, "collision": a.collision}
                for a in self.arrows
            ],
        }
        if labeling is not None:
            out["labels"] = [list(x) for x in labeling.labels]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CycleStructure":
        arrows = [
            Arrow(t, int(a["u"]), int(a["w"]), int(a.get("g", -1)), int(a.get("h", -1)),
                  bool(a["collision"]))
            for t, a in enumerate(obj["arrows"])
        ]
        depth = {int(k): int(v) for k, v in obj["depths"].items()}
        return cls(tuple(int(s) for s in obj["sources"]), int(obj["radius"]), depth, arrows,
                   obj.get("d"))


def _bridges(num: int, edges: Sequence[tuple[int, int]]) -> set[int]:
    """Indices of bridge edges in an undirected multigraph (iterative lowpoint search)."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(num)]
    for k, (a, b) in enumerate(edges):
        if a == b:
            continue
        adj[a].append((b, k))
        adj[b].append((a, k))
    disc = [-1] * num
    low = [0] * num
    out: set[int] = set()
    timer = 0
    for start in range(num):
        if disc[start] >= 0:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack = [(start, -1, iter(adj[start]))]
        while stack:
            x, pe, it = stack[-1]
            advanced = False
            for y, k in it:
                if k == pe:
                    continue
                if disc[y] < 0:
                    disc[y] = low[y] = timer
                    timer += 1
                    stack.append((y, k, iter(adj[y])))
                    advanced = True
                    break
                low[x] = min(low[x], disc[y])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[x])
                    if low[x] > disc[p]:
                        out.add(pe)
    return out


def extract_cycle_structure(dag: ExplorationDag, R: int | None = None,
                            d: int | None = None) -> CycleStructure:
    if R is None:
        R = dag.radius
    if R is None:
        raise ValueError("a radius is needed for an unbounded exploration")
    if dag.radius is not None and dag.radius < R:
        raise ValueError("exploration is shallower than the requested radius")
    depth = dag.depth
    arrows = [a for a in dag.arrows if depth[a.u] < R]
    verts = {s for s in dag.sources}
    for a in arrows:
        verts.add(a.w)
    vlist = sorted(verts)
    idx = {v: i for i, v in enumerate(vlist)}
    # undirected adjacency for per-source distances
    adj: list[list[int]] = [[] for _ in vlist]
    for a in arrows:
        adj[idx[a.u]].append(idx[a.w])
        adj[idx[a.w]].append(idx[a.u])
    on_cycle: set[int] = set()
    single = len(dag.sources) == 1
    for s in dag.sources:
        if single:
            allowed = list(range(len(arrows)))
        else:
            dist = {idx[s]: 0}
            q = deque([idx[s]])
            while q:
                x = q.popleft()
                if dist[x] >= R:
                    continue
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        q.append(y)
            allowed = [
                k for k, a in enumerate(arrows)
                if idx[a.u] in dist and idx[a.w] in dist
                and min(dist[idx[a.u]], dist[idx[a.w]]) < R
            ]
        sub = [(idx[arrows[k].u], idx[arrows[k].w]) for k in allowed]
        br = _bridges(len(vlist), sub)
        on_cycle.update(allowed[i] for i in range(len(allowed)) if i not in br)
    into: dict[int, list[int]] = {}
    for k, a in enumerate(arrows):
        into.setdefault(a.w, []).append(k)
    keep_arrows = set(on_cycle)
    keep: set[int] = set()
    work = list(dag.sources)
    for k in on_cycle:
        work.append(arrows[k].u)
        work.append(arrows[k].w)
    while work:
        y = work.pop()
        if y in keep:
            continue
        keep.add(y)
        for k in into.get(y, ()):
            keep_arrows.add(k)
            work.append(arrows[k].u)
    kept = [arrows[k] for k in sorted(keep_arrows)]
    return CycleStructure(
        tuple(dag.sources), R, {v: depth[v] for v in keep}, kept, d
    )


def cycle_structure_of(g: Multigraph, sources: Sequence[int], R: int) -> CycleStructure:
    return extract_cycle_structure(bfs_explore(g, sources, R), R, g.d)


def is_ancestor_closed(c: CycleStructure, dag: ExplorationDag) -> bool:
    for a in dag.arrows:
        if dag.depth[a.u] < c.radius and a.w in c.depth and a.u not in c.depth:
            return False
    return True


# -- labelings ----------------------------------------------------------------------

@dataclass(frozen=True)
class Labeling:
    """One BFS history producing a structure.

    ``history[t]`` is ``-1`` when step t opened a new vertex, otherwise the
    position (in queue order) of the frontier half-edge that was hit.
    ``labels`` lists ``(j, j')`` for the structure's arrows in traversal order:
    ``j`` is the rank of the arrow among the arrows leaving its tail, ``j'`` is
    0 for tree arrows and otherwise the rank of the hit half-edge among the
    head's frontier half-edges at that moment.
    """

    history: tuple[int, ...]
    labels: tuple[tuple[int, int], ...]
    delta: tuple[int, ...]

    @property
    def collisions(self) -> tuple[int, ...]:
        return tuple(int(x >= 0) for x in self.history)

    @property
    def num_steps(self) -> int:
        return len(self.history)


@dataclass
class _Layout:
    d: int
    R: int
    sources: list
    depth: dict
    items: dict  # core vertex -> list of edge-end ids (arrow k, side 0 tail / 1 head)
    fill: dict  # core vertex -> number of hanging (depth < R) or unexplored slots


def _layout(c: CycleStructure, d: int) -> _Layout:
    items: dict[int, list] = {v: [] for v in c.depth}
    for k, a in enumerate(c.arrows):
        items[a.u].append((k, 0))
        items[a.w].append((k, 1))
    fill = {}
    for v, ends in items.items():
        free = d - len(ends)
        if free < 0:
            raise ValueError(f"vertex {v} has more than d incident structure edges")
        fill[v] = free
    return _Layout(d, c.radius, list(c.sources), dict(c.depth), items, fill)


def ball_edge_count(c: CycleStructure, d: int) -> int:
    """T = |E| of the ball described by the structure (structure edges plus hanging trees)."""
    R = c.radius
    total = len(c.arrows)
    for v, k in c.depth.items():
        if k >= R:
            continue
        hang = d - sum(1 for a in c.arrows if a.u == v) - sum(1 for a in c.arrows if a.w == v)
        # a hanging child at depth k+1 carries a full tree down to depth R
        per_child = sum((d - 1) ** i for i in range(R - k))
        total += hang * per_child
    return total


def _arrangements(items: list, free: int):
    """Distinct orderings of ``items`` plus ``free`` identical filler slots (None)."""
    s = len(items) + free
    for pos in itertools.permutations(range(s), len(items)):
        slots = [None] * s
        for it, p in zip(items, pos):
            slots[p] = it
        yield slots


def _count_arrangements(items: int, free: int) -> int:
    return math.perm(items + free, items)


def _enumerate_histories(c: CycleStructure, d: int, budget: int) -> dict:
    lay = _layout(c, d)
    R = lay.R
    if len(lay.sources) != 1:
        raise NotImplementedError("exact labeling enumeration is implemented for one source")
    root = lay.sources[0]
    # rough size check: product of per-vertex arrangement counts
    size = 1
    for v, ends in lay.items.items():
        k = len(ends) - (0 if v == root else 1)
        size *= _count_arrangements(max(k, 0), lay.fill[v]) if v != root else math.perm(d, len(ends))
        if size > budget:
            raise BudgetExceeded(f"labeling enumeration needs more than {budget} branches")

    arrows = c.arrows
    results: dict[tuple, Labeling] = {}

    # A half-edge is (vertex key, slot).  Core vertex keys are host ids; hanging
    # vertices get keys ("h", serial).  Slot contents: edge-end id, "H" (hanging
    # child) or None (unexplored boundary slot at depth R).

    def other_end(end):
        k, side = end
        a = arrows[k]
        return (a.w, (k, 1)) if side == 0 else (a.u, (k, 0))

    def run(state):
        queue, slots, vdepth, where, hist, labels, delta, outcnt, serial = state
        while True:
            if not queue:
                break
            gkey = queue[0]
            u = gkey[0]
            if vdepth[u] >= R:
                break
            queue = queue[1:]
            delta.append(len(queue) + 1)
            content = slots[u][gkey[1]]
            if content == "H":
                w = ("h", serial)
                serial += 1
                vdepth[w] = vdepth[u] + 1
                slots[w] = ["P"] + ["H" if vdepth[w] < R else None] * (d - 1)
                queue = queue + [(w, i) for i in range(1, d)]
                hist.append(-1)
                outcnt[u] = outcnt.get(u, 0) + 1
                continue
            if content is None:
                raise AssertionError("unexplored slot revealed")
            y, yend = other_end(content)
            outcnt[u] = outcnt.get(u, 0) + 1
            j = outcnt[u]
            if y in vdepth:
                hkey = where[yend]
                pos = queue.index(hkey)
                rel = sum(1 for q in queue[:pos] if q[0] == y) + 1
                queue = queue[:pos] + queue[pos + 1:]
                hist.append(pos)
                labels.append((j, rel))
                continue
            # new core vertex: branch over the order of its remaining slots
            hist.append(-1)
            labels.append((j, 0))
            rest = [e for e in lay.items[y] if e != yend]
            fill = "H" if vdepth[u] + 1 < R else None
            for arr in _arrangements(rest, lay.fill[y]):
                sl = [yend] + [fill if e is None else e for e in arr]
                vd = dict(vdepth)
                vd[y] = vdepth[u] + 1
                sls = dict(slots)
                sls[y] = sl
                wh = dict(where)
                for i, e in enumerate(sl):
                    if isinstance(e, tuple):
                        wh[e] = (y, i)
                run((queue + [(y, i) for i in range(1, d)], sls, vd, wh, list(hist),
                     list(labels), list(delta), dict(outcnt), serial))
            return
        key = tuple(hist)
        if key not in results:
            results[key] = Labeling(key, tuple(labels), tuple(delta))

    for arr in _arrangements(lay.items[root], lay.fill[root]):
        sl = ["H" if e is None and R > 0 else e for e in arr]
        where = {e: (root, i) for i, e in enumerate(sl) if isinstance(e, tuple)}
        run(([(root, i) for i in range(d)], {root: sl}, {root: 0}, where, [], [], [], {}, 0))
    return results


def enumerate_labelings(c: CycleStructure, d: int | None = None,
                        budget: int = 10**6) -> list[Labeling]:
    """All BFS histories (labelings) of a single-source structure."""
    d = d or c.d
    if d is None:
        raise ValueError("degree unknown")
    res = _enumerate_histories(c, d, budget)
    return [res[k] for k in sorted(res)]


def label_count(c: CycleStructure, d: int | None = None) -> int:
    """|Lab(c)| from the slot-counting formula.

    Each structure vertex orders its non-parent slots (a source orders all d);
    hanging and unexplored slots are interchangeable; half-edge automorphisms
    of the structure (vertex automorphisms, parallel-edge swaps, loop flips)
    give the same history.
    """
    d = d or c.d
    if d is None:
        raise ValueError("degree unknown")
    lay = _layout(c, d)
    srcs = set(c.sources)
    num = 1
    for v, ends in lay.items.items():
        k = len(ends) - (0 if v in srcs else 1)
        num *= _count_arrangements(k, lay.fill[v])
    n, edges, roots, ids = c.local_graph()
    colors = [0] * n
    for v, i in ids.items():
        colors[i] = (c.depth[v], lay.fill[v])
    aut = count_automorphisms(n, edges, roots, colors)
    bundles: dict[tuple[int, int], int] = {}
    for a, b in edges:
        key = (min(a, b), max(a, b))
        bundles[key] = bundles.get(key, 0) + 1
    for (a, b), m in bundles.items():
        aut *= math.factorial(m) * (2 ** m if a == b else 1)
    if num % aut:
        raise AssertionError("automorphism count does not divide the arrangement count")
    return num // aut


def _history_probability(lab: Labeling, n: int, d: int) -> Fraction:
    nd = n * d
    p = Fraction(1)
    for t, (hit, delta) in enumerate(zip(lab.history, lab.delta)):
        den = nd - 2 * t - 1
        if den <= 0:
            raise DomainError(f"step {t} needs nd - 2t - 1 > 0 (n={n}, d={d})")
        if hit >= 0:
            p *= Fraction(1, den)
        else:
            num = nd - 2 * t - delta
            if num <= 0:
                return Fraction(0)
            p *= Fraction(num, den)
    return p


def structure_probability(c: CycleStructure, T: int | None, n: int, d: int | None = None,
                          budget: int = 10**6) -> Fraction:
    """Exact probability that a fixed vertex has this cycle structure.

    Sum over labelings of prod_{t<T} [nd - 2t - delta_t]^(1 - I_t) / (nd - 2t - 1).
    """
    d = d or c.d
    T_ball = ball_edge_count(c, d)
    if T is not None and T != T_ball:
        raise ValueError(f"T={T} does not match the ball edge count {T_ball}")
    if n * d - 2 * (T_ball - 1) - 1 <= 0 and T_ball > 0:
        raise DomainError(f"T={T_ball} too large for n={n}, d={d}")
    total = Fraction(0)
    for lab in enumerate_labelings(c, d, budget):
        assert lab.num_steps == T_ball
        total += _history_probability(lab, n, d)
    return total


def approx_structure_probability(c: CycleStructure, T: int | None, n: int,
                                 d: int | None = None, lab_count: int | None = None) -> float:
    """Leading-order form |Lab| / (nd)^gamma * exp(-(d-2) T^2 / (2nd))."""
    d = d or c.d
    if T is None:
        T = ball_edge_count(c, d)
    if lab_count is None:
        lab_count = label_count(c, d)
    nd = n * d
    return lab_count / float(nd) ** c.gamma * math.exp(-(d - 2) * T * T / (2 * nd))


# -- distance between structures ------------------------------------------------------

@dataclass(frozen=True)
class _Shape:
    n: int
    edges: tuple[tuple[int, int], ...]
    roots: tuple[int, ...]

    @property
    def gamma(self) -> int:
        return len(self.edges) - self.n + len(self.roots)

    def key(self) -> bytes:
        return canonical_digest(self.n, self.edges, self.roots)


def _shape_of(c: "CycleStructure | _Shape") -> _Shape:
    if isinstance(c, _Shape):
        return c
    n, edges, roots, _ = c.local_graph()
    return _Shape(n, tuple(sorted(edges)), tuple(roots))


def shape(num_vertices: int, edges: Sequence[tuple[int, int]], roots: Sequence[int] = (0,)) -> _Shape:
    return _Shape(num_vertices, tuple(sorted((min(a, b), max(a, b)) for a, b in edges)),
                  tuple(roots))


def _prune(n: int, edges: list[tuple[int, int]], roots: tuple[int, ...]) -> _Shape:
    roots_set = set(roots)
    alive = [True] * n
    while True:
        deg = [0] * n
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        drop = [x for x in range(n) if alive[x] and x not in roots_set and deg[x] <= 1]
        if not drop:
            break
        for x in drop:
            alive[x] = False
        edges = [(a, b) for a, b in edges if alive[a] and alive[b]]
    # pieces cut off from every source are discarded as well
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = set(roots)
    q = list(roots)
    while q:
        x = q.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                q.append(y)
    keep = sorted(x for x in range(n) if alive[x] and x in seen)
    new = {x: i for i, x in enumerate(keep)}
    es = tuple(sorted((new[a], new[b]) for a, b in edges if a in new and b in new))
    return _Shape(len(keep), es, tuple(new[r] for r in roots))


def _neighbors(s: _Shape, max_len: int):
    # deletions
    seen_edges = set()
    for i, e in enumerate(s.edges):
        if e in seen_edges:
            continue
        seen_edges.add(e)
        rest = list(s.edges[:i] + s.edges[i + 1:])
        yield _prune(s.n, rest, s.roots)
    # additions: a segment of length l between existing vertices a <= b
    for a in range(s.n):
        for b in range(a, s.n):
            for ell in range(1, max_len + 1):
                nn = s.n + ell - 1
                path = [a] + list(range(s.n, nn)) + [b]
                es = list(s.edges) + [(min(x, y), max(x, y)) for x, y in zip(path, path[1:])]
                yield _Shape(nn, tuple(sorted(es)), s.roots)


def cycle_distance(a, b, budget: int = 4, max_segment: int | None = None, R: int | None = None):
    """Fewest add-segment / delete-edge operations turning ``a`` into ``b``.

    ``a`` and ``b`` are CycleStructures or shapes made with :func:`shape`.
    Segments are at most ``max_segment`` edges long (default 2R, or the
    larger edge count of the two inputs when no radius is known).  Returns
    :class:`ExceedsBudget` when no sequence of at most ``budget`` operations exists.
    """
    sa, sb = _shape_of(a), _shape_of(b)
    if len(sa.roots) != len(sb.roots):
        raise ValueError("structures have different numbers of sources")
    if max_segment is None:
        if R is None:
            R = getattr(a, "radius", None) or getattr(b, "radius", None)
        max_segment = 2 * R if R else max(1, len(sb.edges))
    target = sb.key()
    start = sa.key()
    if start == target:
        return 0
    frontier = {start: sa}
    seen = {start}
    for level in range(1, budget + 1):
        remaining = budget - level
        nxt = {}
        for s in frontier.values():
            for t in _neighbors(s, max_segment):
                # each add raises gamma by one; each delete lowers it by at least one
                if abs(t.gamma - sb.gamma) > remaining:
                    continue
                if len(t.edges) > len(sb.edges) + max_segment * remaining:
                    continue
                k = t.key()
                if k == target:
                    return level
                if k not in seen:
                    seen.add(k)
                    nxt[k] = t
        frontier = nxt
        if not frontier:
            break
    return ExceedsBudget(budget)


# -- packing diagnostic ---------------------------------------------------------------

@dataclass(frozen=True)
class PackingReport:
    edges: int
    gamma: int
    bound: float | None
    slack: float | None
    no_cycles: bool

    def within(self, extra: float = 0.0) -> bool:
        return self.bound is None or self.edges <= self.bound + extra


def packing_report(c: CycleStructure, R: int | None = None, d: int | None = None) -> PackingReport:
    """|E(c)| against 2 gamma (R - log_{d-1} gamma); diagnostic, not an assertion."""
    R = c.radius if R is None else R
    d = d or c.d
    gam = c.gamma
    if gam <= 0:
        return PackingReport(c.num_edges, gam, None, None, True)
    bound = 2 * gam * (R - math.log(gam) / math.log(d - 1))
    return PackingReport(c.num_edges, gam, bound, bound - c.num_edges, False)
