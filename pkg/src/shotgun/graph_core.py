"""Half-edge multigraphs and configuration-model sampling.

A graph on ``n`` vertices is stored as a fixed-point-free involution ``match``
on half-edge indices.  Vertex ``v`` owns the contiguous block
``offsets[v] .. offsets[v+1]-1``; for a d-regular graph that block is
``v*d .. v*d+d-1``.  Loops and multi-edges are allowed and are only visible
through the matching.

Random numbers come from numpy's PCG64 bit generator (``numpy.random.default_rng``),
which is portable across platforms for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class OddParity(ValueError):
    """n*d is odd, so no perfect matching of half-edges exists."""


class InvalidDegree(ValueError):
    pass


class RejectionBudgetExceeded(RuntimeError):
    pass


class GraphFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Immutable multigraph given by a perfect matching of half-edges.

    ``d`` is the common degree, or ``None`` for irregular graphs.
    """

    n: int
    match: np.ndarray
    offsets: np.ndarray
    d: int | None = None
    _checked: bool = field(default=False, repr=False)

    def __post_init__(self):
        match = np.ascontiguousarray(self.match, dtype=np.int64)
        offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        m = len(match)
        if len(offsets) != self.n + 1 or offsets[0] != 0 or offsets[-1] != m:
            raise ValueError("offsets do not tile the half-edge range")
        if np.any(np.diff(offsets) < 0):
            raise ValueError("offsets must be nondecreasing")
        if m:
            if match.min() < 0 or match.max() >= m:
                raise ValueError("match entries out of range")
            idx = np.arange(m)
            if np.any(match == idx):
                raise ValueError("match has a fixed point")
            if np.any(match[match] != idx):
                raise ValueError("match is not an involution")
        match.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "match", match)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def regular(cls, n: int, d: int, match) -> "Multigraph":
        return cls(n, np.asarray(match), np.arange(n + 1, dtype=np.int64) * d, d)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Multigraph":
        """Build a graph from a vertex edge list; a loop ``(v, v)`` uses two half-edges of v."""
        edges = [(int(a), int(b)) for a, b in edges]
        deg = np.zeros(n, dtype=np.int64)
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range")
            deg[a] += 1
            deg[b] += 1
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=offsets[1:])
        nxt = offsets[:-1].copy()
        match = np.empty(offsets[-1], dtype=np.int64)
        for a, b in edges:
            ha = nxt[a]
            nxt[a] += 1
            hb = nxt[b]
            nxt[b] += 1
            match[ha] = hb
            match[hb] = ha
        d = int(deg[0]) if n and np.all(deg == deg[0]) else None
        return cls(n, match, offsets, d)

    @property
    def num_half_edges(self) -> int:
        return len(self.match)

    @cached_property
    def owner(self) -> np.ndarray:
        own = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.offsets))
        own.setflags(write=False)
        return own

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    # plain-list views used by the pure-Python traversals
    @cached_property
    def partner_list(self) -> list[int]:
        return self.match.tolist()

    @cached_property
    def owner_list(self) -> list[int]:
        return self.owner.tolist()

    @cached_property
    def offset_list(self) -> list[int]:
        return self.offsets.tolist()

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Neighbor list per vertex in half-edge order (a loop contributes v twice)."""
        own = self.owner_list
        part = self.partner_list
        off = self.offset_list
        return [[own[part[h]] for h in range(off[v], off[v + 1])] for v in range(self.n)]

    def half_edges(self, v: int) -> range:
        return range(int(self.offsets[v]), int(self.offsets[v + 1]))

    def edges(self) -> list[tuple[int, int]]:
        """Vertex edge multiset as ``(owner(h1), owner(h2))`` with ``h1 < h2``, in ``h1`` order."""
        own = self.owner_list
        part = self.partner_list
        return [(own[h], own[part[h]]) for h in range(len(part)) if h < part[h]]

    def half_edge_pairs(self) -> list[tuple[int, int]]:
        part = self.partner_list
        return [(h, part[h]) for h in range(len(part)) if h < part[h]]

    def edge_multiset(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for a, b in self.edges():
            key = (a, b) if a <= b else (b, a)
            out[key] = out.get(key, 0) + 1
        return out

    def with_pairs(self, pairs: Iterable[tuple[int, int]]) -> "Multigraph":
        """Copy with the listed half-edge pairs re-matched (all other pairs kept)."""
        match = self.match.copy()
        for a, b in pairs:
            match[a] = b
            match[b] = a
        return Multigraph(self.n, match, self.offsets, self.d)

    def relabel(self, perm: Sequence[int]) -> "Multigraph":
        """Vertex-relabeled copy: vertex v becomes ``perm[v]``; half-edge order inside a vertex is kept."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise ValueError("perm is not a permutation")
        deg = self.degrees
        new_deg = np.empty(self.n, dtype=np.int64)
        new_deg[perm] = deg
        new_off = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(new_deg, out=new_off[1:])
        own = self.owner
        local = np.arange(self.num_half_edges) - self.offsets[own]
        new_index = new_off[perm[own]] + local
        match = np.empty_like(self.match)
        match[new_index] = new_index[self.match]
        return Multigraph(self.n, match, new_off, self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.d == other.d
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.match, other.match)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.d, self.match.tobytes()))


def _check_params(n: int, d: int) -> None:
    if d < 3:
        raise InvalidDegree(f"degree must be at least 3, got {d}")
    if n < 1:
        raise ValueError(f"need at least one vertex, got n={n}")
    if (n * d) % 2:
        raise OddParity(f"n*d = {n * d} is odd")


def sample_matchings(n: int, d: int, seed: int, count: int) -> np.ndarray:
    """``count`` independent uniform perfect matchings of ``n*d`` half-edges, shape (count, n*d).

    Sequential random pairing: a working array holds the unmatched half-edges;
    at step p the entry at position 2p is paired with a uniform entry among the
    positions after it.  Every perfect matching has probability 1/(m-1)!!.
    """
    _check_params(n, d)
    m = n * d
    rng = np.random.default_rng(seed)
    # the offset drawn at step p is uniform on [0, m-2p-1) regardless of the state
    highs = np.arange(m - 1, 0, -2, dtype=np.int64)
    offs = rng.integers(0, highs, size=(count, len(highs)))
    from ._fast import pair_from_offsets

    match = np.empty((count, m), dtype=np.int64)
    pair_from_offsets(offs, match)
    return match


def sample_configuration(n: int, d: int, seed: int) -> Multigraph:
    """Uniform configuration-model multigraph; identical seeds give identical matchings."""
    return Multigraph.regular(n, d, sample_matchings(n, d, seed, 1)[0])


def is_simple(g: Multigraph) -> bool:
    own = g.owner
    a = own
    b = own[g.match]
    if np.any(a == b):
        return False
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    keys = lo * g.n + hi
    # each edge appears twice (once per half-edge)
    _, counts = np.unique(keys, return_counts=True)
    return bool(np.all(counts == 2))


def is_simple_batch(n: int, d: int, matches: np.ndarray) -> np.ndarray:
    """Vectorised ``is_simple`` over rows of sampled matchings."""
    own = np.arange(n * d) // d
    a = np.broadcast_to(own, matches.shape)
    b = matches // d
    loops = np.any(a == b, axis=1)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    keys = np.sort(lo * n + hi, axis=1)
    # with no multi-edges every key occurs exactly twice, so keys[2k] == keys[2k+1] != keys[2k+2]
    multi = np.any(keys[:, 2::2] == keys[:, 1:-1:2], axis=1)
    return ~(loops | multi)


@dataclass(frozen=True)
class SimpleSample:
    graph: Multigraph
    attempts: int


def sample_simple(n: int, d: int, seed: int, max_attempts: int = 10_000,
                  return_attempts: bool = False):
    """Rejection-sample a simple d-regular graph (uniform over simple graphs).

    Attempt ``k`` uses the configuration sample with seed derived from ``(seed, k)``.
    """
    _check_params(n, d)
    ss = np.random.SeedSequence(seed)
    for k in range(max_attempts):
        sub = int(ss.spawn(1)[0].generate_state(1, dtype=np.uint64)[0]) if k else seed
        g = sample_configuration(n, d, sub)
        if is_simple(g):
            return SimpleSample(g, k + 1) if return_attempts else g
    raise RejectionBudgetExceeded(f"no simple graph after {max_attempts} attempts")


# -- text format -------------------------------------------------------------
#
# regular:   "n d" then n*d/2 lines "h1 h2" (h1 < h2, ascending h1)
# irregular: "n 0" then one line "u v" per edge (vertex ids)

def dumps_graph(g: Multigraph) -> str:
    if g.d is not None and np.array_equal(g.offsets, np.arange(g.n + 1) * g.d):
        lines = [f"{g.n} {g.d}"]
        lines += [f"{a} {b}" for a, b in g.half_edge_pairs()]
    else:
        lines = [f"{g.n} 0"]
        lines += [f"{a} {b}" for a, b in g.edges()]
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> Multigraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise GraphFormatError("missing 'n d' header")
    n, d = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if any(len(r) != 2 for r in body):
        raise GraphFormatError("every body line must hold two integers")
    pairs = [(int(a), int(b)) for a, b in body]
    if d == 0:
        return Multigraph.from_edges(n, pairs)
    m = n * d
    if len(pairs) * 2 != m:
        raise GraphFormatError(f"expected {m // 2} pairs, got {len(pairs)}")
    match = np.full(m, -1, dtype=np.int64)
    for a, b in pairs:
        if not (0 <= a < m and 0 <= b < m) or a == b:
            raise GraphFormatError(f"bad pair {a} {b}")
        if match[a] != -1 or match[b] != -1:
            raise GraphFormatError(f"half-edge listed twice in pair {a} {b}")
        match[a] = b
        match[b] = a
    return Multigraph.regular(n, d, match)


def write_graph(g: Multigraph, path) -> None:
    Path(path).write_text(dumps_graph(g))


def read_graph(path) -> Multigraph:
    return loads_graph(Path(path).read_text())


# -- small named graphs used throughout the tests and demos --------------------

def complete_graph_k4() -> Multigraph:
    return Multigraph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def prism_graph() -> Multigraph:
    """Triangular prism: triangles a1a2a3 = 0,1,2 and b1b2b3 = 3,4,5, rungs a_i b_i."""
    return Multigraph.from_edges(
        6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3), (1, 4), (2, 5)]
    )


def k33_graph() -> Multigraph:
    return Multigraph.from_edges(6, [(a, b) for a in range(3) for b in range(3, 6)])


def disjoint_union(graphs: Sequence[Multigraph]) -> Multigraph:
    edges = []
    shift = 0
    for g in graphs:
        edges += [(a + shift, b + shift) for a, b in g.edges()]
        shift += g.n
    return Multigraph.from_edges(shift, edges)
