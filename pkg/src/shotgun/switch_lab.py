"""The four-edge switch behind the reconstruction lower bound.

A witness is a pair of roots u, v with vertex-disjoint R-balls and eight
boundary vertices.  Cutting (u1u2), (u3u4), (v1v4), (v2v3) and adding
(u1u4), (u2u3), (v1v2), (v3v4) on the same half-edges gives a graph G' whose
(R-1)-deck equals the one of G vertex by vertex, while B_R(u; G') is the
type of B_R(v; G).

Template geometry (a, b, c are distinct children of the root):

* u1 at depth R-1 below a, u2 at depth R-1 below b;
* u3 at depth R outside b, u4 at depth R outside a, with u3, u4 meeting at
  depth at most 1.

In G the edge (u1u2) closes a visible odd cycle of length 2R-1 and (u3u4)
joins two depth-R vertices, so it is invisible at radius R.  After the
switch (u1u4) and (u2u3) close two even cycles of length 2R through the root.
The v side carries the switched pattern in G.  Every cycle through a switched
edge has length at least 2R-1, which is what keeps the (R-1)-balls blind to
the switch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exploration import RootedBall
from .graph_core import Multigraph
from .neighborhood import canonical_code, extract_ball

__all__ = [
    "SwitchWitness", "InvalidWitness", "PlantFailed", "DeckComparison",
    "plant_switch_structure", "apply_switch", "reverse_witness", "verify_deck_invariance",
    "find_switch_witnesses", "expected_witness_count", "template_structures",
    "read_witness", "write_witness",
]


class InvalidWitness(ValueError):
    pass


class PlantFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class SwitchWitness:
    u: int
    v: int
    us: tuple[int, int, int, int]
    vs: tuple[int, int, int, int]
    radius: int
    # half-edge used at each boundary vertex (same order as us / vs); -1 = resolve from g
    hu: tuple[int, int, int, int] = (-1, -1, -1, -1)
    hv: tuple[int, int, int, int] = (-1, -1, -1, -1)
    depths: dict = field(default_factory=dict, compare=False)
    meeting: dict = field(default_factory=dict, compare=False)

    @property
    def cut_edges(self) -> list[tuple[int, int]]:
        u1, u2, u3, u4 = self.us
        v1, v2, v3, v4 = self.vs
        return [(u1, u2), (u3, u4), (v1, v4), (v2, v3)]

    @property
    def added_edges(self) -> list[tuple[int, int]]:
        u1, u2, u3, u4 = self.us
        v1, v2, v3, v4 = self.vs
        return [(u1, u4), (u2, u3), (v1, v2), (v3, v4)]

    @property
    def boundary(self) -> tuple[int, ...]:
        return self.us + self.vs

    def to_json(self) -> dict:
        return {
            "roots": [self.u, self.v],
            "u": list(self.us),
            "v": list(self.vs),
            "half_edges_u": list(self.hu),
            "half_edges_v": list(self.hv),
            "cut": [list(e) for e in self.cut_edges],
            "add": [list(e) for e in self.added_edges],
            "radius": self.radius,
            "depths": self.depths,
            "meeting_depths": self.meeting,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SwitchWitness":
        u, v = obj["roots"]
        return cls(
            int(u), int(v), tuple(int(x) for x in obj["u"]), tuple(int(x) for x in obj["v"]),
            int(obj["radius"]),
            tuple(int(x) for x in obj.get("half_edges_u", (-1,) * 4)),
            tuple(int(x) for x in obj.get("half_edges_v", (-1,) * 4)),
            dict(obj.get("depths", {})), dict(obj.get("meeting_depths", {})),
        )


def write_witness(w: SwitchWitness, path) -> None:
    Path(path).write_text(json.dumps(w.to_json(), indent=2) + "\n")


def read_witness(path) -> SwitchWitness:
    return SwitchWitness.from_json(json.loads(Path(path).read_text()))


# -- switching ---------------------------------------------------------------------------

def _find_half_edge(g: Multigraph, a: int, b: int, taken: set[int]) -> int:
    part = g.partner_list
    own = g.owner_list
    off = g.offset_list
    for h in range(off[a], off[a + 1]):
        if h not in taken and own[part[h]] == b and part[h] not in taken:
            return h
    raise InvalidWitness(f"edge ({a},{b}) is not present")


def _resolve(g: Multigraph, w: SwitchWitness) -> tuple[list[int], list[int]]:
    """Half-edges at the eight boundary vertices, checked against the cut edges."""
    hu, hv = list(w.hu), list(w.hv)
    part = g.partner_list
    own = g.owner_list
    pairs_u = [(0, 1), (2, 3)]
    pairs_v = [(0, 3), (1, 2)]
    taken: set[int] = set()
    for hs, vs, pairs in ((hu, w.us, pairs_u), (hv, w.vs, pairs_v)):
        for i, j in pairs:
            if hs[i] < 0 or hs[j] < 0:
                h = _find_half_edge(g, vs[i], vs[j], taken)
                hs[i], hs[j] = h, part[h]
            if not (0 <= hs[i] < g.num_half_edges) or part[hs[i]] != hs[j]:
                raise InvalidWitness(f"edge ({vs[i]},{vs[j]}) is not present at the given half-edges")
            if own[hs[i]] != vs[i] or own[hs[j]] != vs[j]:
                raise InvalidWitness("half-edge owners do not match the boundary vertices")
            taken.update((hs[i], hs[j]))
    if len(taken) != 8:
        raise InvalidWitness("the four cut edges must use eight distinct half-edges")
    return hu, hv


def apply_switch(g: Multigraph, w: SwitchWitness) -> Multigraph:
    """Cut (u1u2),(u3u4),(v1v4),(v2v3); add (u1u4),(u2u3),(v1v2),(v3v4) on the same half-edges."""
    hu, hv = _resolve(g, w)
    pairs = [(hu[0], hu[3]), (hu[1], hu[2]), (hv[0], hv[1]), (hv[2], hv[3])]
    out = g.with_pairs(pairs)
    assert np.array_equal(out.degrees, g.degrees)
    return out


def reverse_witness(w: SwitchWitness, g: Multigraph | None = None) -> SwitchWitness:
    """Witness on G' whose switch restores G."""
    if g is not None and min(w.hu + w.hv) < 0:
        hu, hv = _resolve(g, w)
    else:
        hu, hv = list(w.hu), list(w.hv)
    p = (0, 3, 2, 1)
    return SwitchWitness(
        w.u, w.v, tuple(w.us[i] for i in p), tuple(w.vs[i] for i in p), w.radius,
        tuple(hu[i] for i in p), tuple(hv[i] for i in p),
    )


# -- deck comparison ---------------------------------------------------------------------

@dataclass
class DeckComparison:
    equal: bool
    first_differing: int | None
    differing: list[int]
    checked: int  # number of vertices whose codes were compared

    def __bool__(self) -> bool:
        return self.equal


def _within(g: Multigraph, seeds: Iterable[int], r: int) -> set[int]:
    adj = g.adjacency
    seen = set(seeds)
    layer = list(seen)
    for _ in range(r):
        nxt = []
        for x in layer:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        layer = nxt
    return seen


def verify_deck_invariance(g: Multigraph, g_prime: Multigraph, radius: int,
                           budget: int = 10**6) -> DeckComparison:
    """Compare the radius-``radius`` type codes of g and g_prime vertex by vertex.

    When both graphs share the half-edge layout, a ball can only change if
    its root lies within radius-1 of an endpoint of a re-matched half-edge,
    so only those vertices are compared; every other ball is identical.
    """
    if g.n != g_prime.n or not np.array_equal(g.degrees, g_prime.degrees):
        raise ValueError("graphs must have the same vertex count and degrees")
    if np.array_equal(g.offsets, g_prime.offsets):
        moved = np.flatnonzero(g.match != g_prime.match)
        if len(moved) == 0:
            return DeckComparison(True, None, [], 0)
        ends = set(g.owner[moved].tolist())
        reach = max(radius - 1, 0)
        todo = sorted(_within(g, ends, reach) | _within(g_prime, ends, reach))
        if radius == 0:
            todo = []
    else:
        todo = list(range(g.n))
    differing = []
    for x in todo:
        a = canonical_code(extract_ball(g, x, radius), budget)
        b = canonical_code(extract_ball(g_prime, x, radius), budget)
        if a != b:
            differing.append(x)
    return DeckComparison(not differing, differing[0] if differing else None, differing, len(todo))


# -- ball geometry helpers ---------------------------------------------------------------

def _ancestors(ball: RootedBall, adj: list[list[int]], i: int) -> dict[int, int]:
    """All vertices on shortest root paths to local vertex i, with their depths."""
    out = {i: ball.depth[i]}
    stack = [i]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if ball.depth[y] == ball.depth[x] - 1 and y not in out:
                out[y] = ball.depth[y]
                stack.append(y)
    return out


def _meeting_depth(ball: RootedBall, adj, i: int, j: int) -> int:
    ai = _ancestors(ball, adj, i)
    aj = _ancestors(ball, adj, j)
    return max(ai[x] for x in ai.keys() & aj.keys())


def _profile(g: Multigraph, root: int, verts: Sequence[int], pairs, R: int) -> tuple[list, list]:
    """Depths of the boundary vertices and, per cut pair, the depth where the cycle it closes meets.

    The meeting depth of a pair is taken in the ball without the pair's own
    edge; -1 marks a pair that is not inside the ball.
    """
    ball = extract_ball(g, root, R)
    loc = {x: i for i, x in enumerate(ball.vertices)}
    depths = [ball.depth[loc[x]] if x in loc else -1 for x in verts]
    meet = []
    for i, j in pairs:
        a, b = verts[i], verts[j]
        if a not in loc or b not in loc:
            meet.append(-1)
            continue
        e = (min(loc[a], loc[b]), max(loc[a], loc[b]))
        edges = list(ball.edges)
        if e in edges:
            edges.remove(e)
        rest = RootedBall(ball.vertices, ball.depth, tuple(edges), R)
        meet.append(_meeting_depth(rest, rest.adjacency(), loc[a], loc[b]))
    return depths, meet


def _describe(g: Multigraph, w: SwitchWitness) -> SwitchWitness:
    du, mu = _profile(g, w.u, w.us, [(0, 1), (2, 3)], w.radius)
    dv, mv = _profile(g, w.v, w.vs, [(0, 3), (1, 2)], w.radius)
    return SwitchWitness(w.u, w.v, w.us, w.vs, w.radius, w.hu, w.hv,
                         {"u": du, "v": dv}, {"u": mu, "v": mv})


def _distance_avoiding(g: Multigraph, a: int, b: int, skip: set[int], limit: int) -> int:
    """dist(a, b) in g without the half-edges in ``skip``; limit+1 when farther."""
    part = g.partner_list
    own = g.owner_list
    off = g.offset_list
    if a == b:
        return 0
    seen = {a}
    layer = [a]
    for dist in range(1, limit + 1):
        nxt = []
        for x in layer:
            for h in range(off[x], off[x + 1]):
                if h in skip:
                    continue
                y = own[part[h]]
                if y == b:
                    return dist
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        layer = nxt
    return limit + 1


def _tree_around(g: Multigraph, b: int, skip: set[int], r: int) -> bool:
    """Whether the radius-r ball of b in g minus the ``skip`` half-edges is a tree."""
    part = g.partner_list
    own = g.owner_list
    off = g.offset_list
    dep = {b: 0}
    layer = [b]
    parent_edge = {b: -1}
    for k in range(r):
        nxt = []
        for x in layer:
            for h in range(off[x], off[x + 1]):
                if h in skip or h == parent_edge[x]:
                    continue
                hp = part[h]
                y = own[hp]
                if y in dep:
                    return False
                dep[y] = k + 1
                parent_edge[y] = hp
                nxt.append(y)
        layer = nxt
    # edges among the last layer are outside the ball
    return True


def _switched_pairs(hu, hv) -> tuple[list, list]:
    before = [(hu[0], hu[1]), (hu[2], hu[3]), (hv[0], hv[3]), (hv[1], hv[2])]
    after = [(hu[0], hu[3]), (hu[1], hu[2]), (hv[0], hv[1]), (hv[2], hv[3])]
    return before, after


def _isolated(g: Multigraph, pairs, R: int) -> bool:
    """Each listed edge lies on no cycle shorter than 2R-1 and has tree surroundings."""
    own = g.owner_list
    skip = {h for p in pairs for h in p}
    for h1, h2 in pairs:
        a, b = own[h1], own[h2]
        if _distance_avoiding(g, a, b, {h1, h2}, 2 * R - 3) <= 2 * R - 3:
            return False
        for x in (a, b):
            if not _tree_around(g, x, skip, R - 2):
                return False
    return True


def switch_is_isolated(g: Multigraph, w: SwitchWitness) -> bool:
    """Structural sufficient condition for (R-1)-deck invariance, checked in G and G'."""
    hu, hv = _resolve(g, w)
    before, after = _switched_pairs(hu, hv)
    return _isolated(g, before, w.radius) and _isolated(apply_switch(g, w), after, w.radius)


# -- planting ----------------------------------------------------------------------------

def _tree_roots(g: Multigraph, R: int) -> np.ndarray:
    from ._fast import level_counts

    c = level_counts(g, R)
    ok = np.all(c[:, :, 1] == 0, axis=1) & np.all(c[:, :, 2] == c[:, :, 0], axis=1)
    return np.flatnonzero(ok)


def _walk(g: Multigraph, root: int, path: Sequence[int]) -> tuple[int, int]:
    """Follow child indices from root in a tree ball; returns (vertex, half-edge into it)."""
    part = g.partner_list
    own = g.owner_list
    off = g.offset_list
    x, into = root, -1
    for k in path:
        kids = [h for h in range(off[x], off[x + 1]) if h != into]
        h = kids[k]
        into = part[h]
        x = own[into]
    return x, into


def _template_paths(d: int, R: int, rng: np.random.Generator) -> list[tuple[list[int], int]]:
    """Child-index paths for u1..u4 and the slot used at each of them."""
    a, b, c = (int(x) for x in rng.permutation(d)[:3])

    def tail(k):
        return [int(x) for x in rng.integers(0, d - 1, size=k)]

    p1 = [a] + tail(R - 2)
    p2 = [b] + tail(R - 2)
    p3 = [c] + tail(R - 1)
    if rng.random() < 0.5:
        p4 = [b] + tail(R - 1)  # meets u3 at the root
    else:
        while True:  # meets u3 at depth 1
            p4 = [c] + tail(R - 1)
            if p4[1] != p3[1]:
                break
    slots = [int(x) for x in rng.integers(0, d - 1, size=4)]
    return list(zip([p1, p2, p3, p4], slots))


def plant_switch_structure(g: Multigraph, R: int, seed: int = 0,
                           max_tries: int = 500) -> tuple[Multigraph, SwitchWitness]:
    """Rewire g so that a verified-by-construction switch witness exists at radius R.

    Two roots with tree R-balls and distance above 2R get the template;
    one half-edge at each of the eight boundary vertices is re-paired, and the
    eight displaced partners are paired with each other.  Attempts whose
    switched edges are not isolated (see ``switch_is_isolated``) are discarded.
    """
    if g.d is None:
        raise ValueError("plant needs a regular graph")
    if R < 2:
        raise ValueError("the template needs R >= 2")
    d = g.d
    if d < 3:
        raise ValueError("the template needs d >= 3")
    rng = np.random.default_rng(seed)
    roots = _tree_roots(g, R)
    if len(roots) < 2:
        raise PlantFailed(f"fewer than two vertices with tree {R}-balls")
    part = g.partner_list
    for _ in range(max_tries):
        u = int(rng.choice(roots))
        near = _within(g, [u], 2 * R)
        far = [int(x) for x in roots if int(x) not in near]
        if not far:
            continue
        v = far[int(rng.integers(len(far)))]
        plan = _template_paths(d, R, rng)
        us, vs, hu, hv = [], [], [], []
        for path, slot in plan:
            for root, verts, hs in ((u, us, hu), (v, vs, hv)):
                x, into = _walk(g, root, path)
                free = [h for h in g.half_edges(x) if h != into]
                verts.append(x)
                hs.append(free[slot])
        chosen = hu + hv
        partners = [part[h] for h in chosen]
        if len(set(us + vs)) != 8 or len(set(chosen + partners)) != 16:
            continue
        # in G: u carries (u1u2),(u3u4), v carries (v1v4),(v2v3)
        pairs = [(hu[0], hu[1]), (hu[2], hu[3]), (hv[0], hv[3]), (hv[1], hv[2])]
        pu, pv = partners[:4], partners[4:]
        pairs += [(pu[i], pv[i]) for i in range(4)]
        G = g.with_pairs(pairs)
        w = SwitchWitness(u, v, tuple(us), tuple(vs), R, tuple(hu), tuple(hv))
        if not switch_is_isolated(G, w):
            continue
        return G, _describe(G, w)
    raise PlantFailed(f"no isolated placement found in {max_tries} attempts")


# -- scanning ----------------------------------------------------------------------------

def _branch(ball: RootedBall, adj, i: int) -> int:
    """Depth-1 ancestor of local vertex i (unique in the template balls), -1 if ambiguous."""
    anc = [x for x, k in _ancestors(ball, adj, i).items() if k == 1]
    return anc[0] if len(anc) == 1 else -1


def _edges_minus_plus(edges, minus, plus, depth, R):
    out = list(edges)
    for a, b in minus:
        e = (min(a, b), max(a, b))
        if e in out:
            out.remove(e)
    for a, b in plus:
        if depth[a] == R and depth[b] == R:
            continue
        out.append((min(a, b), max(a, b)))
    return out


def _u_candidates(g: Multigraph, u: int, R: int, budget: int):
    """Switch labelings at u: yields (code of the switched ball, us, hu)."""
    ball = extract_ball(g, u, R)
    adj = ball.adjacency()
    dep = ball.depth
    loc = {x: k for k, x in enumerate(ball.vertices)}
    same = [(i, j) for i, j in ball.edges if dep[i] == dep[j]]
    if len(same) != 1 or same[0][0] == same[0][1]:
        return
    i1, i2 = same[0]
    part = g.partner_list
    own = g.owner_list
    bottom = [k for k in range(ball.num_vertices) if dep[k] == R]
    # edges of g joining two depth-R vertices of the ball
    hidden = []
    for k in bottom:
        x = ball.vertices[k]
        for h in g.half_edges(x):
            y = own[part[h]]
            j = loc.get(y)
            if j is not None and dep[j] == R and j != k and h < part[h]:
                hidden.append((k, j, h, part[h]))
    if not hidden:
        return
    h12 = _find_half_edge(g, ball.vertices[i1], ball.vertices[i2], set())
    br = {k: _branch(ball, adj, k) for k in {i1, i2} | {x for e in hidden for x in e[:2]}}
    for a1, a2, ha1, ha2 in ((i1, i2, h12, part[h12]), (i2, i1, part[h12], h12)):
        if br[a1] == br[a2] or br[a1] < 0:
            continue
        for k, j, hk, hj in hidden:
            for a3, a4, h3, h4 in ((k, j, hk, hj), (j, k, hj, hk)):
                if br[a3] in (br[a2], -1) or br[a4] in (br[a1], -1):
                    continue
                if br[a3] == br[a4] and _meeting_depth(ball, adj, a3, a4) > 1:
                    continue
                edges = _edges_minus_plus(ball.edges, [(a1, a2)], [(a1, a4), (a2, a3)], dep, R)
                code = canonical_code(RootedBall(ball.vertices, dep, tuple(sorted(edges)), R), budget)
                us = tuple(ball.vertices[x] for x in (a1, a2, a3, a4))
                yield code, us, (ha1, ha2, h3, h4), set(ball.vertices)


def _v_candidates(g: Multigraph, v: int, R: int, budget: int):
    """Labelings at v: yields (code of B_R(v), code of the switched ball, vs, hv, ball vertices)."""
    ball = extract_ball(g, v, R)
    adj = ball.adjacency()
    dep = ball.depth
    multi = [k for k in range(ball.num_vertices)
             if dep[k] == R and sum(1 for y in adj[k] if dep[y] == R - 1) == 2]
    if len(multi) != 2:
        return
    base = canonical_code(ball, budget)
    x4, x3 = multi
    part = g.partner_list
    own = g.owner_list
    for a1 in sorted({y for y in adj[x4] if dep[y] == R - 1}):
        for a2 in sorted({y for y in adj[x3] if dep[y] == R - 1}):
            if a1 == a2 or _branch(ball, adj, a1) == _branch(ball, adj, a2):
                continue
            edges = _edges_minus_plus(ball.edges, [(a1, x4), (a2, x3)], [(a1, a2), (x3, x4)], dep, R)
            code = canonical_code(RootedBall(ball.vertices, dep, tuple(sorted(edges)), R), budget)
            vs = tuple(ball.vertices[x] for x in (a1, a2, x3, x4))
            h14 = _find_half_edge(g, vs[0], vs[3], set())
            h23 = _find_half_edge(g, vs[1], vs[2], {h14, part[h14]})
            hv = (h14, h23, part[h23], part[h14])
            assert own[hv[2]] == vs[2] and own[hv[3]] == vs[3]
            yield base, code, vs, hv, set(ball.vertices)


def find_switch_witnesses(g: Multigraph, R: int, max_pairs: int = 10_000, limit: int | None = None,
                          budget: int = 10**6) -> list[SwitchWitness]:
    """Verified switch witnesses at radius R.

    Candidates are screened by per-level counts: u needs one same-level edge
    at depth R-1 and nothing else, v needs two extra edges between depths
    R-1 and R and nothing else.  A pair (u, v) qualifies when some labeling
    makes the switched u-ball isomorphic to B_R(v) and the switched v-ball
    isomorphic to B_R(u), the balls are disjoint, and the switch leaves every
    (R-1)-type unchanged.  At most ``max_pairs`` pairs are verified.
    """
    from ._fast import level_counts

    if R < 2 or g.n < 2:
        return []
    c = level_counts(g, R)
    same = c[:, :, 1]
    extra = c[:, :, 2] - c[:, :, 0]
    quiet_same = same[:, : R - 1].sum(axis=1) == 0
    quiet_down = extra[:, : R - 1].sum(axis=1) == 0
    u_mask = quiet_same & quiet_down & (same[:, R - 1] == 1) & (extra[:, R - 1] == 0)
    v_mask = quiet_same & quiet_down & (same[:, R - 1] == 0) & (extra[:, R - 1] == 2)
    v_list = np.flatnonzero(v_mask).tolist()
    u_list = np.flatnonzero(u_mask).tolist()
    if not v_list or not u_list:
        return []
    # switched v-ball codes must equal B_R(u); B_R(v) must equal switched u-balls
    by_base: dict[bytes, list] = {}
    for v in v_list:
        for base, code, vs, hv, verts in _v_candidates(g, v, R, budget):
            by_base.setdefault(base, []).append((v, code, vs, hv, verts))
    out: list[SwitchWitness] = []
    tried = 0
    used: set[tuple[int, int]] = set()
    half_ok: dict[tuple, bool] = {}
    reach: dict[tuple, set] = {}

    def half_invariant(pairs) -> bool:
        # one half of the switch is a double-edge swap on its own
        key = tuple(pairs)
        if key not in half_ok:
            half_ok[key] = bool(verify_deck_invariance(g, g.with_pairs(pairs), R - 1, budget))
        return half_ok[key]

    for u in u_list:
        base_u = None
        for code, us, hu, uverts in _u_candidates(g, u, R, budget):
            upairs = [(hu[0], hu[3]), (hu[1], hu[2])]
            for v, vcode, vs, hv, vverts in by_base.get(code, ()):
                if (u, v) in used:
                    continue
                if base_u is None:
                    base_u = canonical_code(extract_ball(g, u, R), budget)
                if vcode != base_u or uverts & vverts:
                    continue
                if len(set(us + vs)) != 8:
                    continue
                if tried >= max_pairs:
                    return out
                tried += 1
                w = SwitchWitness(u, v, us, vs, R, hu, hv)
                vpairs = [(hv[0], hv[1]), (hv[2], hv[3])]
                if not half_invariant(upairs) or not half_invariant(vpairs):
                    continue
                # an (R-1)-ball sees a switched edge only through an endpoint within R-2,
                # so far-apart halves act independently
                if us not in reach:
                    reach[us] = _within(g, us, 2 * R - 4)
                if reach[us] & set(vs):
                    if not verify_deck_invariance(g, apply_switch(g, w), R - 1, budget):
                        continue
                used.add((u, v))
                out.append(_describe(g, w))
                if limit is not None and len(out) >= limit:
                    return out
    return out


# -- expected count ----------------------------------------------------------------------

def _template_tree(d: int, R: int):
    """Complete depth-R tree with child-index paths; returns (edges, path of each vertex)."""
    paths = [()]
    edges = []
    frontier = [0]
    for k in range(R):
        nxt = []
        for x in frontier:
            for c in range(d if k == 0 else d - 1):
                paths.append(paths[x] + (c,))
                edges.append((x, len(paths) - 1))
                nxt.append(len(paths) - 1)
        frontier = nxt
    return edges, paths


def template_structures(d: int, R: int):
    """Template balls at radius R.

    Returns ``(sigma, taus)``: ``sigma`` is the u-ball in G as ``(n, edges)``
    and ``taus`` maps each switched-ball code to ``(n, edges, count)``, where
    ``count`` is the number of unordered depth-R vertex pairs {u3, u4} whose
    switch produces it.
    """
    if R < 2:
        raise ValueError("the template needs R >= 2")
    edges, paths = _template_tree(d, R)
    index = {p: i for i, p in enumerate(paths)}
    # u1 = (0, 0, ..), u2 = (1, 0, ..) at depth R-1; each gives up its child slot 0
    u1 = index[(0,) + (0,) * (R - 2)]
    u2 = index[(1,) + (0,) * (R - 2)]
    drop = {index[paths[u1] + (0,)], index[paths[u2] + (0,)]}
    keep = [i for i in range(len(paths)) if i not in drop]
    relab = {x: k for k, x in enumerate(keep)}
    base = [(relab[a], relab[b]) for a, b in edges if b not in drop]
    depth = [len(paths[x]) for x in keep]
    sigma_edges = sorted(base + [tuple(sorted((relab[u1], relab[u2])))])
    bottom = [x for x in keep if len(paths[x]) == R]
    P = np.array([paths[x] for x in bottom], dtype=np.int64)
    # meeting depth of every pair of bottom vertices = common prefix length
    eq = P[:, None, :] == P[None, :, :]
    lcp = np.cumprod(eq, axis=2).sum(axis=2)
    br = P[:, 0]
    p1, p2 = np.array(paths[u1]), np.array(paths[u2])

    def lcp_with(p):
        e = P[:, : len(p)] == p[None, :]
        return np.cumprod(e, axis=1).sum(axis=1)

    l1, l2 = lcp_with(p1), lcp_with(p2)
    taus: dict[bytes, list] = {}
    groups: dict[tuple, list] = {}
    m = len(bottom)
    iu, ju = np.triu_indices(m, 1)
    # orientation (u3, u4) = (i, j) or (j, i); both are tried, the pair counts once
    seen_pair = np.zeros(len(iu), dtype=bool)
    for s3, s4 in ((iu, ju), (ju, iu)):
        ok = (br[s3] != 1) & (br[s4] != 0) & (lcp[s3, s4] <= 1)
        ok &= ~seen_pair
        keys = np.stack([lcp[s3, s4], l1[s3], l2[s3], l1[s4], l2[s4], br[s3] == br[s4]], axis=1)
        for k in np.flatnonzero(ok):
            groups.setdefault(tuple(keys[k].tolist()), []).append((int(s3[k]), int(s4[k])))
        seen_pair |= ok
    for key, members in groups.items():
        a3, a4 = members[0]
        x3, x4 = relab[bottom[a3]], relab[bottom[a4]]
        ed = list(base) + [tuple(sorted((relab[u1], x4))), tuple(sorted((relab[u2], x3)))]
        ball = RootedBall(tuple(range(len(keep))), tuple(depth), tuple(sorted(ed)), R)
        code = canonical_code(ball)
        if code in taus:
            taus[code][2] += len(members)
        else:
            taus[code] = [len(keep), sorted(ed), len(members)]
    return (len(keep), sigma_edges), {k: tuple(v) for k, v in taus.items()}


def _structure_of(num: int, edges, R: int, d: int):
    from .cycle_structure import extract_cycle_structure
    from .exploration import bfs_explore

    h = Multigraph.from_edges(num, edges)
    return extract_cycle_structure(bfs_explore(h, [0], R), R, d)


def expected_witness_count(n: int, d: int, R: int, T: int | None = None) -> float:
    """Leading-order estimate of the number of witness pairs (u, v) in a random graph.

    Sum over switched types tau of
    n(n-1) |Lab(sigma)| |Lab(tau)| / (nd)^3 * exp(-(d-2) T^2 / (2nd)) * N_tau (d-1)^2 / (nd),
    where sigma is the u-ball type, N_tau counts the depth-R pairs {u3, u4}
    producing tau, and the last factor is the chance that such a pair is joined.
    T defaults to the number of edges of the two balls together.
    """
    from .cycle_structure import ball_edge_count, label_count

    (ns, es), taus = template_structures(d, R)
    cs = _structure_of(ns, es, R, d)
    lab_s = label_count(cs, d)
    nd = n * d
    total = 0.0
    for nt, et, count in taus.values():
        ct = _structure_of(nt, et, R, d)
        lab_t = label_count(ct, d)
        TT = ball_edge_count(cs, d) + ball_edge_count(ct, d) if T is None else T
        log_p = (math.log(lab_s) + math.log(lab_t) - (cs.gamma + ct.gamma) * math.log(nd)
                 - (d - 2) * TT * TT / (2 * nd) + math.log(count * (d - 1) ** 2 / nd))
        total += math.exp(log_p + math.log(n) + math.log(n - 1))
    return total
