from __future__ import annotations

import itertools

import numpy as np
import pytest

from shotgun.exploration import RootedBall
from shotgun.graph_core import Multigraph


def perfect_matchings(items):
    """All perfect matchings of a list, as lists of pairs."""
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in perfect_matchings(rest):
            yield [(a, items[i])] + m


def regular_from_pairs(n: int, d: int, pairs) -> Multigraph:
    match = np.empty(n * d, dtype=np.int64)
    for a, b in pairs:
        match[a] = b
        match[b] = a
    return Multigraph.regular(n, d, match)


def heawood_graph() -> Multigraph:
    """Cubic graph of girth 6 on 14 vertices."""
    edges = [(i, (i + 1) % 14) for i in range(14)]
    edges += [(i, (i + 5) % 14) for i in range(0, 14, 2)]
    return Multigraph.from_edges(14, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the run
_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_report():
    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def brute_form(b: RootedBall):
    """Smallest sorted edge list over all depth-preserving relabelings fixing the root."""
    levels: dict[int, list[int]] = {}
    for i, k in enumerate(b.depth):
        levels.setdefault(k, []).append(i)
    order = [levels[k] for k in sorted(levels)]
    best = None
    for choice in itertools.product(*(itertools.permutations(lv) for lv in order)):
        perm = {}
        nxt = 0
        for lv, img in zip(order, choice):
            for x in img:
                perm[x] = nxt
                nxt += 1
        es = sorted((min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in b.edges)
        key = (tuple(sorted(perm[i] for i in range(len(b.depth)) if b.depth[i] == 0)), tuple(es),
               tuple(sorted((perm[i], b.depth[i]) for i in range(len(b.depth)))))
        if best is None or key < best:
            best = key
    return best
