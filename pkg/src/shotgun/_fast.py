"""Compiled per-vertex ball invariants.

For every root the kernel runs one BFS to depth ``rmax`` and records, per
depth level, the vertex count, the number of edges inside the level and the
number of edges going one level down.  These counts are isomorphism
invariants of the rooted ball, and the values for radius R only use levels
below R, so one pass serves every radius up to ``rmax``.
"""

from __future__ import annotations

import numpy as np
import numba as nb

from .graph_core import Multigraph

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xBF58476D1CE4E5B9)
_M3 = np.uint64(0x94D049BB133111EB)


@nb.njit(cache=True)
def _mix(x):
    x = (x ^ (x >> np.uint64(30))) * _M2
    x = (x ^ (x >> np.uint64(27))) * _M3
    return x ^ (x >> np.uint64(31))


@nb.njit(cache=True)
def _deepest_common(a, b, sd, base, anc, mark, tag, ptr, nbr, stack):
    """Largest depth of a vertex lying on shortest root paths to both a and b.

    ``sd[x] - base`` is the depth of x when x belongs to the current ball.
    """
    # mark every shortest-path ancestor of a (a included)
    top = 0
    stack[top] = a
    top += 1
    mark[a] = tag
    while top > 0:
        top -= 1
        x = stack[top]
        up = sd[x] - 1
        for e in range(ptr[x], ptr[x + 1]):
            y = nbr[e]
            if sd[y] == up and mark[y] != tag:
                mark[y] = tag
                stack[top] = y
                top += 1
    best = -1
    top = 0
    stack[top] = b
    top += 1
    anc[b] = tag
    while top > 0:
        top -= 1
        x = stack[top]
        if mark[x] == tag:
            if sd[x] - base > best:
                best = sd[x] - base
            continue
        up = sd[x] - 1
        for e in range(ptr[x], ptr[x + 1]):
            y = nbr[e]
            if sd[y] == up and anc[y] != tag:
                anc[y] = tag
                stack[top] = y
                top += 1
    return best


@nb.njit(cache=True)
def _level_counts(ptr, nbr, roots, rmax, out, acc):
    """out[k, l, :] = (vertices at depth l+1, edges inside depth l, edges from l to l+1).

    acc[k, l] is an order-free hash of the deepest-common-ancestor depths of
    the cycles closed at level l (same-level edges, and pairs of parents of a
    vertex at level l+1).
    """
    n = ptr.shape[0] - 1
    # stamp and depth share one array: sd[x] = base + depth, with a fresh base per root
    span = rmax + 2
    sd = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int32)
    mark = np.full(n, -1, np.int64)
    anc = np.full(n, -1, np.int64)
    stack = np.empty(n, np.int32)
    multi = np.empty(n, np.int32)
    seen_multi = np.full(n, -1, np.int64)
    par = np.empty(64, np.int32)
    tag = 0
    for k in range(roots.shape[0]):
        r = roots[k]
        base = (k + 1) * span
        sd[r] = base
        head = 0
        tail = 1
        queue[0] = r
        nm = 0
        while head < tail:
            x = queue[head]
            head += 1
            sx = sd[x]
            dx = sx - base
            if dx >= rmax:
                continue
            for e in range(ptr[x], ptr[x + 1]):
                y = nbr[e]
                sy = sd[y]
                if sy < base:
                    sd[y] = sx + 1
                    queue[tail] = y
                    tail += 1
                    out[k, dx, 0] += 1
                    out[k, dx, 2] += 1
                elif sy == sx:
                    out[k, dx, 1] += 1  # each same-level edge is seen from both ends
                    # a loop is seen from both of its half-edges, wherever they sit,
                    # so it contributes twice; that is still label-free
                    if x <= y:
                        tag += 1
                        c = _deepest_common(x, y, sd, base, anc, mark, tag, ptr, nbr, stack)
                        acc[k, dx] += _mix(np.uint64(1000 + 64 * c + 1))
                elif sy == sx + 1:
                    out[k, dx, 2] += 1
                    # y was reached before, so it has several parents
                    if seen_multi[y] != k:
                        seen_multi[y] = k
                        multi[nm] = y
                        nm += 1
        for i in range(nm):
            y = multi[i]
            up = sd[y] - 1
            dy = sd[y] - base
            m = 0
            for e in range(ptr[y], ptr[y + 1]):
                p = nbr[e]
                if sd[p] == up and m < 64:
                    par[m] = p
                    m += 1
            for a in range(m):
                for b in range(a + 1, m):
                    tag += 1
                    c = _deepest_common(par[a], par[b], sd, base, anc, mark, tag, ptr, nbr, stack)
                    acc[k, dy - 1] += _mix(np.uint64(5000 + 64 * c + 2))
        for l in range(rmax):
            out[k, l, 1] //= 2


@nb.njit(cache=True)
def _prefix_hashes(counts, acc):
    m, rmax, _ = counts.shape
    out = np.empty((m, rmax), np.uint64)
    for k in range(m):
        h = np.uint64(0x1234567)
        for l in range(rmax):
            for j in range(3):
                h = _mix(h * _M1 + np.uint64(counts[k, l, j]) + np.uint64(j + 1))
            h = _mix(h * _M1 + acc[k, l])
            out[k, l] = h
    return out


def csr_adjacency(g: Multigraph) -> tuple[np.ndarray, np.ndarray]:
    """Vertex CSR arrays; each loop contributes its vertex twice."""
    ptr = np.asarray(g.offsets, dtype=np.int64)
    nbr = np.asarray(g.owner[g.match], dtype=np.int64)
    return ptr, nbr


def _run_levels(g: Multigraph, rmax: int, roots=None):
    ptr, nbr = csr_adjacency(g)
    nbr = nbr.astype(np.int32)
    if roots is None:
        roots = np.arange(g.n, dtype=np.int64)
    roots = np.asarray(roots, dtype=np.int64)
    out = np.zeros((len(roots), max(rmax, 1), 3), dtype=np.int64)
    acc = np.zeros((len(roots), max(rmax, 1)), dtype=np.uint64)
    if rmax >= 1:
        _level_counts(ptr, nbr, roots, rmax, out, acc)
    return out[:, :rmax, :], acc[:, :rmax]


def level_counts(g: Multigraph, rmax: int, roots=None) -> np.ndarray:
    return _run_levels(g, rmax, roots)[0]


def profile_hashes(g: Multigraph, rmax: int, roots=None) -> np.ndarray:
    """hash[k, R-1] is an invariant of the radius-R ball around ``roots[k]``."""
    counts, acc = _run_levels(g, rmax, roots)
    return _prefix_hashes(np.ascontiguousarray(counts), np.ascontiguousarray(acc))


@nb.njit(cache=True)
def _refine(ptr, nbr, prof):
    """h[v, r] = mix(prof[v, r], sorted h[w, r-1] over neighbours w)."""
    n, rmax = prof.shape
    out = np.empty((n, rmax), np.uint64)
    prev = np.zeros(n, np.uint64)
    buf = np.empty(64, np.uint64)
    for r in range(rmax):
        for v in range(n):
            k = 0
            for e in range(ptr[v], ptr[v + 1]):
                buf[k] = prev[nbr[e]]
                k += 1
            # insertion sort: degrees are small
            for i in range(1, k):
                x = buf[i]
                j = i - 1
                while j >= 0 and buf[j] > x:
                    buf[j + 1] = buf[j]
                    j -= 1
                buf[j + 1] = x
            h = _mix(prof[v, r] + _M1)
            for i in range(k):
                h = _mix(h * _M1 + buf[i])
            out[v, r] = h
        for v in range(n):
            prev[v] = out[v, r]
    return out


def refined_hashes(g: Multigraph, rmax: int) -> np.ndarray:
    """Stronger invariant: level-count profile of B_R(v) combined with the neighbours' values at R-1.

    Each neighbour ball B_{R-1}(w) sits inside B_R(v), so the result is still
    an isomorphism invariant of the rooted radius-R ball.
    """
    if g.degrees.max(initial=0) > 64:
        raise ValueError("degree too large for the refinement kernel")
    ptr, nbr = csr_adjacency(g)
    prof = profile_hashes(g, rmax)
    return _refine(ptr, nbr, np.ascontiguousarray(prof))


@nb.njit(cache=True)
def _wl_fingerprints(ptr, nbr, roots, R, rounds, out):
    """Colour refinement inside each rooted ball, started from the depth colouring."""
    n = ptr.shape[0] - 1
    stamp = np.full(n, -1, np.int64)
    dep = np.zeros(n, np.int64)
    loc = np.zeros(n, np.int64)
    queue = np.empty(n, np.int64)
    col = np.empty(n, np.uint64)
    new = np.empty(n, np.uint64)
    for k in range(roots.shape[0]):
        r = roots[k]
        stamp[r] = k
        dep[r] = 0
        head = 0
        tail = 1
        queue[0] = r
        while head < tail:
            x = queue[head]
            head += 1
            if dep[x] >= R:
                continue
            for e in range(ptr[x], ptr[x + 1]):
                y = nbr[e]
                if stamp[y] != k:
                    stamp[y] = k
                    dep[y] = dep[x] + 1
                    queue[tail] = y
                    tail += 1
        for i in range(tail):
            loc[queue[i]] = i
            col[i] = _mix(np.uint64(dep[queue[i]] + 7))
        for _ in range(rounds):
            for i in range(tail):
                x = queue[i]
                s = np.uint64(0)
                for e in range(ptr[x], ptr[x + 1]):
                    y = nbr[e]
                    if stamp[y] != k:
                        continue
                    if dep[x] == R and dep[y] == R:
                        continue
                    s += _mix(col[loc[y]] + _M2)
                new[i] = _mix(col[i] * _M1 + s)
            for i in range(tail):
                col[i] = new[i]
        s = np.uint64(0)
        for i in range(tail):
            s += _mix(col[i] + _M3)
        out[k] = _mix(col[0] * _M1 + s + np.uint64(tail))


def wl_fingerprints(g: Multigraph, roots, R: int, rounds: int | None = None) -> np.ndarray:
    """Isomorphism invariant of B_R(v) for each root: colour refinement from the depth colouring."""
    ptr, nbr = csr_adjacency(g)
    roots = np.asarray(roots, dtype=np.int64)
    out = np.zeros(len(roots), dtype=np.uint64)
    if rounds is None:
        rounds = 2 * R + 2
    _wl_fingerprints(ptr, nbr, roots, R, rounds, out)
    return out


@nb.njit(cache=True)
def _gamma_by_radius(match, owner, ptr, sources, rmax, out):
    """out[R] = |E| - |V| + |sources| of the radius-R ball of the source set, R = 0..rmax."""
    n = ptr.shape[0] - 1
    dep = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    tail = 0
    for s in sources:
        if dep[s] < 0:
            dep[s] = 0
            queue[tail] = s
            tail += 1
    head = 0
    while head < tail:
        x = queue[head]
        head += 1
        if dep[x] >= rmax:
            continue
        for h in range(ptr[x], ptr[x + 1]):
            y = owner[match[h]]
            if dep[y] < 0:
                dep[y] = dep[x] + 1
                queue[tail] = y
                tail += 1
    nv = np.zeros(rmax + 1, np.int64)
    ne = np.zeros(rmax + 1, np.int64)
    for i in range(tail):
        x = queue[i]
        dx = dep[x]
        nv[dx] += 1
        if dx >= rmax:
            continue
        for h in range(ptr[x], ptr[x + 1]):
            hp = match[h]
            dy = dep[owner[hp]]
            # count each edge once, at the depth of its shallower end
            if dx < dy or (dx == dy and h < hp):
                ne[dx] += 1
    v = 0
    e = 0
    for R in range(rmax + 1):
        v += nv[R]
        if R > 0:
            e += ne[R - 1]
        out[R] = e - v + sources.shape[0]


def gamma_by_radius(g: Multigraph, sources, rmax: int) -> np.ndarray:
    """Cycle count gamma of the ball around ``sources`` for every radius 0..rmax (distinct sources)."""
    sources = np.asarray(sources, dtype=np.int64)
    if len(set(sources.tolist())) != len(sources):
        raise ValueError("sources must be distinct")
    out = np.zeros(rmax + 1, dtype=np.int64)
    _gamma_by_radius(g.match, np.asarray(g.owner, dtype=np.int64), np.asarray(g.offsets, dtype=np.int64),
                     sources, rmax, out)
    return out


@nb.njit(cache=True)
def pair_from_offsets(offs, match):
    """Sequential pairing driven by pre-drawn offsets (one row per matching)."""
    count, m = match.shape
    work = np.empty(m, np.int64)
    for r in range(count):
        for k in range(m):
            work[k] = k
        for p in range(m // 2):
            i = 2 * p
            j = i + 1 + offs[r, p]
            tmp = work[j]
            work[j] = work[i + 1]
            work[i + 1] = tmp
            a = work[i]
            match[r, a] = tmp
            match[r, tmp] = a
