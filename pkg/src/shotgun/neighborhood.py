"""Rooted balls, canonical type codes, decks and the membership predicates.

The ball ``B_R(v)`` is the subgraph induced on vertices within distance R of
v, minus the edges joining two vertices that are both at distance exactly R.
Its type code is a canonical digest of the ball as a rooted unlabelled
multigraph.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .canon import EnumerationBudgetExceeded, canonical_digest
from .exploration import RootedBall, ball_from_edges, extract_ball_restricted
from .graph_core import Multigraph

__all__ = [
    "RootedBall", "TypeCode", "Deck", "MSeries", "DistinctResult", "EnumerationBudgetExceeded",
    "extract_ball", "canonical_code", "isomorphic", "build_deck", "all_types_distinct",
    "omega_membership", "mseries", "t_r_membership", "edge_count_lower_bound", "i_circ",
    "ball_from_edges", "type_codes", "read_deck", "write_deck",
]


class TypeCode(bytes):
    """Canonical digest of a rooted ball (32 bytes)."""

    def __repr__(self) -> str:
        return f"TypeCode({self.hex()[:16]}...)"


def extract_ball(g: Multigraph, v: int, R: int) -> RootedBall:
    if R < 0:
        raise ValueError("R must be nonnegative")
    return extract_ball_restricted(g, v, R, None)


def canonical_code(b: RootedBall, budget: int = 10**6) -> TypeCode:
    return TypeCode(canonical_digest(b.num_vertices, b.edges, (0,), None, budget))


def isomorphic(a: RootedBall, b: RootedBall, budget: int = 10**6) -> bool:
    if a.num_vertices != b.num_vertices or a.num_edges != b.num_edges:
        return False
    if a.distance_sequence() != b.distance_sequence():
        return False
    return canonical_code(a, budget) == canonical_code(b, budget)


def type_codes(g: Multigraph, vertices: Iterable[int], R: int, budget: int = 10**6) -> dict[int, TypeCode]:
    return {int(v): canonical_code(extract_ball(g, int(v), R), budget) for v in vertices}


@dataclass
class Deck:
    radius: int
    codes: list[TypeCode]
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.codes)

    def multiset(self) -> Counter:
        return Counter(self.codes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Deck):
            return NotImplemented
        return self.radius == other.radius and self.multiset() == other.multiset()


def build_deck(g: Multigraph, R: int, budget: int = 10**6) -> Deck:
    """Exact type code for every vertex, in vertex order.

    Budget failures are collected per vertex; the code slot holds an empty
    TypeCode for those vertices.
    """
    codes: list[TypeCode] = []
    errors: dict[int, str] = {}
    for v in range(g.n):
        try:
            codes.append(canonical_code(extract_ball(g, v, R), budget))
        except EnumerationBudgetExceeded as exc:
            codes.append(TypeCode(b""))
            errors[v] = str(exc)
    return Deck(R, codes, errors)


def write_deck(deck: Deck, path) -> None:
    lines = [f"{v} {c.hex()}" for v, c in enumerate(deck.codes)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_deck(path, radius: int = -1) -> Deck:
    codes = []
    for k, line in enumerate(Path(path).read_text().split("\n")):
        if not line.strip():
            continue
        vid, hexcode = line.split()
        if int(vid) != len(codes):
            raise ValueError(f"deck line {k + 1}: expected vertex {len(codes)}, got {vid}")
        codes.append(TypeCode(bytes.fromhex(hexcode)))
    return Deck(radius, codes)


# -- distinctness ---------------------------------------------------------------------

@dataclass
class DistinctResult:
    distinct: bool
    groups: list[list[int]]  # vertices sharing a type, each group of size >= 2
    complete: bool = True  # False when the search stopped at the first duplicate

    def __bool__(self) -> bool:
        return self.distinct

    @property
    def pairs(self) -> list[tuple[int, int]]:
        out = []
        for grp in self.groups:
            for i in range(len(grp)):
                for j in range(i + 1, len(grp)):
                    out.append((grp[i], grp[j]))
        return out


def _tie_groups(keys: np.ndarray) -> list[np.ndarray]:
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    cuts = np.flatnonzero(sk[1:] != sk[:-1]) + 1
    groups = np.split(order, cuts)
    return [grp for grp in groups if len(grp) > 1]


def _resolve_groups(g: Multigraph, R: int, groups, stop_at_first: bool, budget: int):
    """Split invariant-tied groups by exact codes; returns (duplicate groups, complete)."""
    from ._fast import wl_fingerprints

    groups = [np.sort(np.asarray(grp, dtype=np.int64)) for grp in groups]
    groups.sort(key=len, reverse=True)
    if stop_at_first:
        # below the distinctness radius a few exact codes usually expose a duplicate
        for grp in groups:
            if len(grp) <= 2:
                break
            probe: dict[bytes, int] = {}
            for v in grp[:6].tolist():
                c = canonical_code(extract_ball(g, v, R), budget)
                if c in probe:
                    return [[probe[c], v]], False
                probe[c] = v
    # a stronger invariant splits most groups before exact codes are needed
    members = np.concatenate(groups)
    label = np.repeat(np.arange(len(groups), dtype=np.uint64), [len(x) for x in groups])
    wl = wl_fingerprints(g, members, R)
    key = wl * np.uint64(0x9E3779B97F4A7C15) + label
    parts = [members[s] for s in _tie_groups(key)]
    parts.sort(key=lambda p: (-len(p), int(p[0])))
    found: list[list[int]] = []
    for part in parts:
        by_code: dict[bytes, list[int]] = {}
        for v in sorted(part.tolist()):
            c = canonical_code(extract_ball(g, v, R), budget)
            lst = by_code.setdefault(c, [])
            lst.append(v)
            if stop_at_first and len(lst) == 2:
                return [lst], False
        found += [lst for lst in by_code.values() if len(lst) > 1]
    found.sort()
    return found, True


def all_types_distinct(g: Multigraph, R: int, stop_at_first: bool = False,
                       budget: int = 10**6, invariants: np.ndarray | None = None) -> DistinctResult:
    """Whether the n radius-R types are pairwise distinct, with the colliding groups.

    Vertices are first grouped by a cheap per-level count invariant; only
    vertices sharing that invariant get exact type codes.
    """
    if R == 0:
        groups = [list(range(g.n))] if g.n > 1 else []
        return DistinctResult(g.n <= 1, groups, True)
    if invariants is None:
        from ._fast import profile_hashes

        invariants = profile_hashes(g, R)[:, R - 1]
    groups = _tie_groups(invariants)
    if not groups:
        return DistinctResult(True, [], True)
    found, complete = _resolve_groups(g, R, groups, stop_at_first, budget)
    return DistinctResult(not found, found, complete)


# -- membership predicates --------------------------------------------------------------

def omega_membership(b: RootedBall, R: int | None = None, d: int = 3) -> bool:
    """|E(ball)| >= (d-1)^R / 3."""
    R = b.radius if R is None else R
    return 3 * b.num_edges >= (d - 1) ** R


@dataclass(frozen=True)
class MSeries:
    """Collision counts by depth: ``half[i-1]`` = gamma_{i-1/2}, ``full[i-1]`` = gamma_i, i = 1..R."""

    half: tuple[int, ...]
    full: tuple[int, ...]

    @property
    def m(self) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(self.half, self.full))

    @property
    def radius(self) -> int:
        return len(self.half)

    @property
    def total(self) -> int:
        return sum(self.half) + sum(self.full)


def mseries(b: RootedBall) -> MSeries:
    R = b.radius
    nv = [0] * (R + 1)
    for k in b.depth:
        nv[k] += 1
    same = [0] * R
    down = [0] * R
    for i, j in b.edges:
        di, dj = b.depth[i], b.depth[j]
        if di == dj:
            same[di] += 1
        else:
            down[min(di, dj)] += 1
    half = tuple(same[i - 1] for i in range(1, R + 1))
    full = tuple(down[i - 1] - nv[i] for i in range(1, R + 1))
    return MSeries(half, full)


def i_circ(n: int, d: int) -> int:
    """Smallest i >= 1 with (d-1)^i >= (ln n)^4."""
    target = math.log(n) ** 4
    i = 1
    while (d - 1) ** i < target:
        i += 1
    return i


def t_r_membership(m: MSeries, R: int, d: int, n: int, directed: bool = False) -> bool:
    ic = i_circ(n, d)
    ms = m.m
    m_circ = sum(ms[i - 1] for i in range(1, min(ic, R + 1)) if i <= len(ms))
    tail = sum(ms[i - 1] / (d - 1) ** i for i in range(ic, R + 1) if i <= len(ms))
    if directed:
        return m_circ == 0 and tail <= 7 / math.log(n)
    return m_circ <= 1 and tail <= 3 / math.log(n)


def edge_count_lower_bound(m: MSeries, R: int, d: int, delta1: int | None = None) -> int:
    """Ceiling of (d-1)^R/(1-1/d) [delta1/d - sum_i (2(1-1/d) gamma_{i-1/2} + gamma_i)/(d-1)^i].

    Evaluated in exact rational arithmetic; |E(ball)| is never below it.
    """
    from fractions import Fraction

    if delta1 is None:
        delta1 = d
    if delta1 not in (d, d - 2):
        raise ValueError("delta1 must be d (full ball) or d-2 (directed ball)")
    q = Fraction(d - 1, d)
    s = Fraction(delta1, d)
    for i in range(1, R + 1):
        s -= (2 * q * m.half[i - 1] + m.full[i - 1]) / Fraction((d - 1) ** i)
    val = Fraction((d - 1) ** R) / q * s
    return math.ceil(val)
