"""Reassembling a graph from its deck of (R+1)-balls, and certificates.

A deck piece is the ball ``B_{R+1}(v)`` with only the root labelled.  For a
neighbour w of the root, every vertex within distance R of w lies in the
piece and every edge of ``B_R(w)`` has an endpoint within distance R-1 of w,
hence within distance R of the root; so ``B_R(w)`` computed inside the piece
is the true ball.  When the n radius-R types are pairwise distinct, each such
inner ball names its vertex, which gives the adjacency.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .exploration import extract_ball_restricted
from .graph_core import Multigraph
from .neighborhood import (
    all_types_distinct, canonical_code, extract_ball, omega_membership,
)


class MalformedDeck(ValueError):
    pass


class NoOmegaVertex(RuntimeError):
    pass


@dataclass(frozen=True)
class DeckPiece:
    """A rooted ball; local vertex 0 is the root, other local ids carry no meaning."""

    root_id: int
    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    radius: int

    def graph(self) -> Multigraph:
        return Multigraph.from_edges(self.num_vertices, self.edges)


def make_deck_pieces(g: Multigraph, radius: int) -> list[DeckPiece]:
    pieces = []
    for v in range(g.n):
        b = extract_ball(g, v, radius)
        pieces.append(DeckPiece(v, b.num_vertices, b.edges, radius))
    return pieces


def write_pieces(pieces: Sequence[DeckPiece], path, d: int | None = None) -> None:
    if not pieces:
        raise MalformedDeck("empty deck")
    radius = pieces[0].radius
    lines = [f"{len(pieces)} {d if d is not None else 0} {radius}"]
    for p in pieces:
        lines.append(f"root={p.root_id} size={p.num_vertices}")
        lines += [f"{a} {b}" for a, b in p.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pieces(path) -> tuple[list[DeckPiece], int, int]:
    """Returns (pieces, d, R) where R is the header radius (pieces carry it too)."""
    rows = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows:
        raise MalformedDeck("empty file")
    head = rows[0].split()
    if len(head) != 3:
        raise MalformedDeck("header must be 'n d R'")
    n, d, R = (int(x) for x in head)
    pieces = []
    cur = None
    edges: list[tuple[int, int]] = []

    def flush():
        if cur is not None:
            pieces.append(DeckPiece(cur[0], cur[1], tuple(edges), R))

    for row in rows[1:]:
        if row.startswith("root="):
            flush()
            fields = dict(kv.split("=") for kv in row.split())
            cur = (int(fields["root"]), int(fields["size"]))
            edges = []
        else:
            if cur is None:
                raise MalformedDeck("edge line before the first piece")
            a, b = row.split()
            edges.append((int(a), int(b)))
    flush()
    if len(pieces) != n:
        raise MalformedDeck(f"header announces {n} pieces, file has {len(pieces)}")
    return pieces, d, R


@dataclass
class AmbiguityReport:
    reason: str
    colliding_roots: list[list[int]] = field(default_factory=list)
    unmatched: list[tuple[int, int]] = field(default_factory=list)  # (piece root, neighbour slot)

    def __bool__(self) -> bool:
        return False


@dataclass
class AssemblyResult:
    graph: Multigraph | None
    report: AmbiguityReport | None = None

    @property
    def ok(self) -> bool:
        return self.graph is not None

    def __bool__(self) -> bool:
        return self.ok


def _check_deck(pieces: Sequence[DeckPiece]) -> tuple[int, int]:
    if not pieces:
        raise MalformedDeck("empty deck")
    n = len(pieces)
    ids = sorted(p.root_id for p in pieces)
    if ids != list(range(n)):
        raise MalformedDeck("pieces must have root ids 0..n-1, each exactly once")
    radii = {p.radius for p in pieces}
    if len(radii) != 1:
        raise MalformedDeck(f"pieces have mixed radii {sorted(radii)}")
    R1 = radii.pop()
    if R1 < 1:
        raise MalformedDeck("pieces need radius at least 1")
    return n, R1 - 1


@dataclass
class _PieceView:
    root_id: int
    graph: Multigraph
    nbr_slots: list[int]  # local ids of root neighbours, one entry per non-loop root edge
    loops: int


def _view(p: DeckPiece) -> _PieceView:
    g = p.graph()
    slots = []
    loops = 0
    for a, b in p.edges:
        if a == 0 and b == 0:
            loops += 1
        elif a == 0:
            slots.append(b)
        elif b == 0:
            slots.append(a)
    return _PieceView(p.root_id, g, slots, loops)


def _fast_keys(view: _PieceView, R: int) -> list[int]:
    """Invariant keys for the root (first) and each neighbour slot at radius R."""
    from ._fast import profile_hashes, wl_fingerprints

    roots = np.array([0] + view.nbr_slots, dtype=np.int64)
    if R == 0:
        return [0] * len(roots)
    prof = profile_hashes(view.graph, R, roots)[:, R - 1]
    wl = wl_fingerprints(view.graph, roots, R)
    return [int(a) ^ (int(b) * 0x9E3779B97F4A7C15 % (1 << 64)) for a, b in zip(prof, wl)]


def _exact(view: _PieceView, local: int, R: int) -> bytes:
    return canonical_code(extract_ball_restricted(view.graph, local, R, None))


def _glue(views: list[_PieceView], R: int, keys: list[list], exact: Callable | None) -> AssemblyResult:
    n = len(views)
    root_key = {}
    tied: dict = {}
    for v in views:
        k = keys[v.root_id][0]
        if k in root_key:
            tied.setdefault(k, [root_key[k]]).append(v.root_id)
        else:
            root_key[k] = v.root_id
    by_id = {v.root_id: v for v in views}
    resolve: dict = {}
    if tied:
        if exact is None:
            groups = sorted(sorted(x) for x in tied.values())
            return AssemblyResult(None, AmbiguityReport("root invariants are not distinct", groups))
        # separate tied roots by exact codes
        for k, ids in tied.items():
            codes: dict[bytes, int] = {}
            for rid in ids:
                c = exact(by_id[rid], 0, R)
                if c in codes:
                    clash = sorted(r for r in ids if exact(by_id[r], 0, R) == c)
                    return AssemblyResult(
                        None, AmbiguityReport("two pieces have the same radius-R type", [clash])
                    )
                codes[c] = rid
            resolve[k] = codes
    counts: list[Counter] = [Counter() for _ in range(n)]
    unmatched = []
    for v in views:
        ks = keys[v.root_id]
        for slot, local in enumerate(v.nbr_slots):
            k = ks[slot + 1]
            if k in resolve:
                target = resolve[k].get(exact(v, local, R))
            else:
                target = root_key.get(k)
            if target is None:
                unmatched.append((v.root_id, slot))
                continue
            counts[v.root_id][target] += 1
    if unmatched:
        return AssemblyResult(
            None, AmbiguityReport("neighbour balls without a matching piece", [], unmatched)
        )
    edges = []
    for v in views:
        u = v.root_id
        edges += [(u, u)] * v.loops
        for w, m in counts[u].items():
            if counts[w].get(u, 0) != m:
                return AssemblyResult(
                    None, AmbiguityReport(f"pieces {u} and {w} disagree on their edge multiplicity")
                )
            if u < w:
                edges += [(u, w)] * m
            elif u == w:
                return AssemblyResult(None, AmbiguityReport(f"piece {u} matched itself"))
    return AssemblyResult(Multigraph.from_edges(n, edges))


def assemble(pieces: Sequence[DeckPiece]) -> AssemblyResult:
    """Rebuild the labelled graph from (R+1)-pieces when the n radius-R types are distinct."""
    n, R = _check_deck(pieces)
    views = [_view(p) for p in sorted(pieces, key=lambda p: p.root_id)]
    keys = [_fast_keys(v, R) for v in views]
    return _glue(views, R, keys, _exact)


def assemble_by_distance_sequence(pieces: Sequence[DeckPiece]) -> AssemblyResult:
    """Same gluing with the distance sequence (d_1..d_R) as the only type information."""
    n, R = _check_deck(pieces)
    views = [_view(p) for p in sorted(pieces, key=lambda p: p.root_id)]
    from ._fast import level_counts

    keys = []
    for v in views:
        roots = np.array([0] + v.nbr_slots, dtype=np.int64)
        if R == 0:
            keys.append([()] * len(roots))
            continue
        lc = level_counts(v.graph, R, roots)[:, :, 0]
        keys.append([tuple(row.tolist()) for row in lc])
    return _glue(views, R, keys, None)


# -- radius search ---------------------------------------------------------------------

@dataclass(frozen=True)
class NotFound:
    reason: str

    def __bool__(self) -> bool:
        return False


def r_distinct(g: Multigraph, r_max: int, r_min: int = 1):
    """Smallest R in [r_min, r_max] with pairwise distinct radius-R types, or NotFound.

    Distinctness at R implies distinctness at R+1 (each ball determines the
    smaller ones), so the scan stops at the first success.
    """
    from ._fast import refined_hashes

    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    # invariants for large radii are expensive (balls cover the graph), so they
    # are computed only as far as the scan gets
    d = max(int(g.degrees.max(initial=3)), 3)
    top = min(r_max, max(r_min, math.ceil(0.5 * math.log(max(g.n, 2)) / math.log(d - 1)) + 1))
    H = refined_hashes(g, top)
    R = max(1, r_min)
    while R <= r_max:
        if R > H.shape[1]:
            top = min(r_max, R + 1)
            H = refined_hashes(g, top)
        res = all_types_distinct(g, R, stop_at_first=True, invariants=H[:, R - 1])
        if res.distinct:
            return R
        R += 1
    return NotFound(f"types not distinct up to radius {r_max}")


@dataclass(frozen=True)
class RadiusBounds:
    lower: int
    upper: int | None
    r_distinct: int | None
    witness_radius: int | None


def r_star_bounds(g: Multigraph, r_max: int, witness_search: bool = True,
                  max_pairs: int = 200) -> RadiusBounds:
    """Certified bounds on the assembly radius.

    upper = r_distinct + 1; lower = 1 + the largest R for which a verified
    switch witness preserves the R-deck (1 when none is found).
    """
    rd = r_distinct(g, r_max)
    upper = rd + 1 if rd else None
    lower = 1
    best = None
    if witness_search and g.d is not None:
        from .switch_lab import find_switch_witnesses

        top = rd if rd else r_max
        for R in range(top, 1, -1):
            ws = find_switch_witnesses(g, R, max_pairs=max_pairs, limit=1)
            if ws:
                best = R
                lower = R  # the switch keeps the (R-1)-deck, so radius R-1 cannot assemble
                break
    if upper is not None and lower > upper:
        raise AssertionError("inconsistent radius bounds")
    return RadiusBounds(lower, upper, rd if rd else None, best)


# -- certificates ----------------------------------------------------------------------

@dataclass
class Certificate:
    kind: str  # "asymmetry" or "non-isomorphism"
    radius: int
    codes: list[str] = field(default_factory=list)
    vertex: int | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "radius": self.radius, "vertex": self.vertex, "codes": self.codes}


@dataclass
class Failure:
    reason: str
    groups: list[list[int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return False


@dataclass
class Inconclusive:
    reason: str
    vertex: int | None = None
    match: int | None = None

    def __bool__(self) -> bool:
        return False


def certify_asymmetric(g: Multigraph, R: int):
    """Certificate that Aut(g) is trivial: all radius-R types differ.

    An automorphism maps every ball isomorphically onto the ball of the image
    vertex, so distinct types force every vertex to be fixed.
    """
    res = all_types_distinct(g, R)
    if not res.distinct:
        return Failure("equal radius-R types", res.groups)
    codes = [canonical_code(extract_ball(g, v, R)).hex() for v in range(g.n)]
    return Certificate("asymmetry", R, codes)


def verify_asymmetry_certificate(g: Multigraph, cert: Certificate) -> bool:
    if cert.kind != "asymmetry" or len(cert.codes) != g.n:
        return False
    codes = [canonical_code(extract_ball(g, v, cert.radius)).hex() for v in range(g.n)]
    return codes == cert.codes and len(set(codes)) == g.n


def adversarial_vertex(g: Multigraph, R: int) -> int:
    """Omega_R member with the most ball edges, lowest id on ties."""
    best = None
    for v in range(g.n):
        b = extract_ball(g, v, R)
        if not omega_membership(b, R, g.d):
            continue
        key = (-b.num_edges, v)
        if best is None or key < best:
            best = key
    if best is None:
        raise NoOmegaVertex(f"no vertex with a radius-{R} ball of at least (d-1)^R/3 edges")
    return best[1]


def certify_nonisomorphic(g: Multigraph, h: Multigraph, R: int):
    """Certificate that g and h are not isomorphic, from one vertex of g.

    If no vertex of h has the radius-R type of the chosen vertex of g, no
    isomorphism can exist.
    """
    if g.d is None:
        raise ValueError("g must be regular")
    v = adversarial_vertex(g, R)
    bv = extract_ball(g, v, R)
    code = canonical_code(bv)
    dseq = bv.distance_sequence()
    for w in range(h.n):
        bw = extract_ball(h, w, R)
        if bw.num_edges != bv.num_edges or bw.distance_sequence() != dseq:
            continue
        if canonical_code(bw) == code:
            return Inconclusive("h has a vertex of the same type", v, w)
    return Certificate("non-isomorphism", R, [code.hex()], v)


def verify_nonisomorphism_certificate(g: Multigraph, h: Multigraph, cert: Certificate) -> bool:
    if cert.kind != "non-isomorphism" or cert.vertex is None:
        return False
    code = canonical_code(extract_ball(g, cert.vertex, cert.radius))
    if code.hex() != cert.codes[0]:
        return False
    return all(canonical_code(extract_ball(h, w, cert.radius)) != code for w in range(h.n))
