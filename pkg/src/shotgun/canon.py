"""Canonical digests of small rooted multigraphs.

The digest is a 32-byte SHA-256 value with ``digest(a) == digest(b)`` exactly
when ``a`` and ``b`` are isomorphic by a map sending each root to the root of
the same index (and preserving vertex colors, if given).

The method works in two stages:

1. Pendant trees are peeled off.  Non-root vertices of degree one are removed
   repeatedly; each removed subtree is summarised by a hash of its children's
   hashes (the classical AHU encoding), which is attached to the surviving
   vertex it hangs from.
2. The remaining core is canonically ordered by hash-based color refinement.
   When refinement leaves ties, one tied vertex is individualized and the
   search branches over every member of the tied cell; the smallest
   leaf serialization wins.

For the near-tree balls of random regular graphs the core is small and
nearly asymmetric, so the search rarely branches.
"""

from __future__ import annotations

import hashlib
from typing import Sequence


class EnumerationBudgetExceeded(RuntimeError):
    pass


def _h(*parts: bytes) -> bytes:
    return hashlib.blake2b(b"|".join(parts), digest_size=16).digest()


def _int(x: int) -> bytes:
    return str(x).encode()


class _Search:
    def __init__(self, core, cadj, budget):
        self.core = core
        self.cadj = cadj
        self.budget = budget
        self.leaves = 0

    def refine(self, col: dict) -> dict:
        cadj = self.cadj
        ncls = len(set(col.values()))
        while True:
            new = {}
            for x in self.core:
                nb = sorted(col[y] + _int(m) for y, m in cadj[x].items())
                new[x] = _h(col[x], *nb)
            k = len(set(new.values()))
            col = new
            if k == ncls:
                return col
            ncls = k

    def leaf(self, col: dict) -> bytes:
        order = sorted(self.core, key=col.__getitem__)
        rank = {x: i for i, x in enumerate(order)}
        edges = []
        for x in order:
            rx = rank[x]
            for y, m in self.cadj[x].items():
                ry = rank[y]
                if rx <= ry:
                    edges.append((rx, ry, m))
        edges.sort()
        body = b";".join(col[x] for x in order) + b"#" + b",".join(
            _int(a) + b"-" + _int(b) + b"x" + _int(m) for a, b, m in edges
        )
        return hashlib.sha256(body).digest()

    def run(self, col: dict) -> bytes:
        col = self.refine(col)
        cells: dict[bytes, list] = {}
        for x in self.core:
            cells.setdefault(col[x], []).append(x)
        tied = [(c, xs) for c, xs in cells.items() if len(xs) > 1]
        if not tied:
            self.leaves += 1
            if self.leaves > self.budget:
                raise EnumerationBudgetExceeded(f"more than {self.budget} search leaves")
            return self.leaf(col)
        # canonical cell choice: smallest size, then smallest color
        c, xs = min(tied, key=lambda cx: (len(cx[1]), cx[0]))
        best = None
        for x in xs:
            col2 = dict(col)
            col2[x] = _h(b"I", c)
            out = self.run(col2)
            if best is None or out < best:
                best = out
        return best


def canonical_digest(
    num_vertices: int,
    edges: Sequence[tuple[int, int]],
    roots: Sequence[int] = (0,),
    colors: Sequence | None = None,
    budget: int = 10**6,
) -> bytes:
    """Canonical 32-byte digest of a multigraph with ordered roots.

    ``edges`` lists vertex pairs with repetition for multi-edges; ``(i, i)`` is a loop.
    """
    n = num_vertices
    nbrs: list[dict[int, int]] = [dict() for _ in range(n)]
    deg = [0] * n
    for a, b in edges:
        nbrs[a][b] = nbrs[a].get(b, 0) + 1
        if a != b:
            nbrs[b][a] = nbrs[b].get(a, 0) + 1
        deg[a] += 1
        deg[b] += 1
    root_tag = {r: i for i, r in enumerate(roots)}
    if colors is None:
        base = [b""] * n
    else:
        base = [str(c).encode() for c in colors]

    # stage 1: peel pendant trees
    pend: list[list[bytes]] = [[] for _ in range(n)]
    alive = [True] * n
    stack = [x for x in range(n) if deg[x] == 1 and x not in root_tag]
    while stack:
        x = stack.pop()
        if not alive[x] or deg[x] != 1:
            continue
        alive[x] = False
        (p,) = nbrs[x].keys()
        pend[p].append(_h(b"T", base[x], *sorted(pend[x])))
        del nbrs[p][x]
        del nbrs[x][p]
        deg[p] -= 1
        deg[x] = 0
        if deg[p] == 1 and p not in root_tag:
            stack.append(p)

    core = [x for x in range(n) if alive[x]]
    col = {}
    for x in core:
        tag = _int(root_tag[x]) if x in root_tag else b"-"
        col[x] = _h(b"C", tag, base[x], *sorted(pend[x]))
    cadj = {x: nbrs[x] for x in core}
    search = _Search(core, cadj, budget)
    inner = search.run(col)
    return hashlib.sha256(b"rooted:" + _int(len(roots)) + b":" + inner).digest()


def brute_force_isomorphic(
    na: int, ea: Sequence[tuple[int, int]], nb: int, eb: Sequence[tuple[int, int]],
    roots_a: Sequence[int] = (0,), roots_b: Sequence[int] = (0,),
) -> bool:
    """Root-preserving isomorphism test by backtracking over vertex maps (reference oracle)."""
    if na != nb or len(ea) != len(eb) or len(roots_a) != len(roots_b):
        return False

    def mult(n, es):
        m = [[0] * n for _ in range(n)]
        for a, b in es:
            m[a][b] += 1
            if a != b:
                m[b][a] += 1
        return m

    ma, mb = mult(na, ea), mult(nb, eb)
    da = [sum(r) + r[i] for i, r in enumerate(ma)]
    db = [sum(r) + r[i] for i, r in enumerate(mb)]
    phi = [-1] * na
    used = [False] * nb
    for ra, rb in zip(roots_a, roots_b):
        if da[ra] != db[rb] or used[rb]:
            return False
        phi[ra] = rb
        used[rb] = True
    order = [x for x in range(na) if phi[x] < 0]

    def ok(x, y):
        if da[x] != db[y] or ma[x][x] != mb[y][y]:
            return False
        for z in range(na):
            if phi[z] >= 0 and ma[x][z] != mb[y][phi[z]]:
                return False
        return True

    for ra in roots_a:
        for z in roots_a:
            if ma[ra][z] != mb[phi[ra]][phi[z]]:
                return False

    def rec(k):
        if k == len(order):
            return True
        x = order[k]
        for y in range(nb):
            if not used[y] and ok(x, y):
                phi[x] = y
                used[y] = True
                if rec(k + 1):
                    return True
                phi[x] = -1
                used[y] = False
        return False

    return rec(0)


def count_automorphisms(
    num_vertices: int,
    edges: Sequence[tuple[int, int]],
    roots: Sequence[int] = (0,),
    colors: Sequence | None = None,
) -> int:
    """Number of vertex permutations fixing each root and the colors and preserving edge multiplicities."""
    n = num_vertices
    mult: list[dict[int, int]] = [dict() for _ in range(n)]
    for a, b in edges:
        mult[a][b] = mult[a].get(b, 0) + 1
        if a != b:
            mult[b][a] = mult[b].get(a, 0) + 1
    colors = list(colors) if colors is not None else [0] * n
    sig = [(colors[x], sorted(mult[x].values()), mult[x].get(x, 0)) for x in range(n)]
    phi = [-1] * n
    used = [False] * n
    for r in roots:
        phi[r] = r
        used[r] = True
    # visit vertices in BFS order from the roots so each new vertex has a mapped neighbour
    order = []
    seen = set(roots)
    q = list(roots)
    while q:
        x = q.pop(0)
        for y in sorted(mult[x]):
            if y not in seen:
                seen.add(y)
                order.append(y)
                q.append(y)
    order += [x for x in range(n) if x not in seen]
    candidates = {}
    for x in order:
        candidates[x] = [y for y in range(n) if sig[y] == sig[x]]

    def ok(x, y):
        for z, m in mult[x].items():
            if z != x and phi[z] >= 0 and mult[y].get(phi[z], 0) != m:
                return False
        # mapped vertices adjacent to y must be adjacent to x as well
        for z, m in mult[y].items():
            if z != y and used[z]:
                pre = phi.index(z)
                if mult[x].get(pre, 0) != m:
                    return False
        return True

    for r in roots:
        if not ok(r, r):
            return 0

    def rec(k):
        if k == len(order):
            return 1
        x = order[k]
        total = 0
        for y in candidates[x]:
            if not used[y] and ok(x, y):
                phi[x] = y
                used[y] = True
                total += rec(k + 1)
                phi[x] = -1
                used[y] = False
        return total

    return rec(0)
