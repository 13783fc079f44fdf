"""Exhaustive enumeration of connected graphs up to isomorphism (n <= 9).

Graphs are grown one vertex at a time (every connected graph has a
non-cutvertex, so attaching a new last vertex to every parent reaches them
all) and dedupiated by a canonical certificate: the minimum upper-triangle
adjacency bitstring over all labelings compatible with iterated
degree/neighborhood refinement, with individualization when refinement
stalls.  Counts are pinned against the known values, which is the oracle for
the generator itself.

The n = 9 stage takes a few minutes of CPU, so results are cached on disk.
"""

from __future__ import annotations

import multiprocessing
import pickle
from pathlib import Path

CACHE_DIR = Path(__file__).parent / "_cache"

# number of connected graphs on n vertices, up to isomorphism
KNOWN_COUNTS = {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112, 7: 853, 8: 11117, 9: 261080}


def edge_mask_to_adj(n: int, emask: int) -> list[int]:
    adj = [0] * n
    bit = 0
    for i in range(n):
        for j in range(i + 1, n):
            if (emask >> bit) & 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            bit += 1
    return adj


def adj_to_edge_mask(n: int, adj: list[int]) -> int:
    emask = 0
    bit = 0
    for i in range(n):
        for j in range(i + 1, n):
            if (adj[i] >> j) & 1:
                emask |= 1 << bit
            bit += 1
    return emask


def _refine(n: int, adj: list[int], colors: tuple[int, ...]) -> tuple[int, ...]:
    while True:
        sigs = []
        for v in range(n):
            nb = adj[v]
            cnt = []
            w = 0
            while nb:
                if nb & 1:
                    cnt.append(colors[w])
                nb >>= 1
                w += 1
            cnt.sort()
            sigs.append((colors[v], tuple(cnt)))
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = tuple(ranking[s] for s in sigs)
        if new == colors:
            return colors
        colors = new


def canonical_cert(n: int, adj: list[int]) -> int:
    """Minimum adjacency bitstring over refinement-compatible labelings."""
    best: list = [None]

    def emit(colors):
        order = sorted(range(n), key=lambda v: colors[v])
        pos = [0] * n
        for i, v in enumerate(order):
            pos[v] = i
        emask = 0
        bit = 0
        for i in range(n):
            vi = order[i]
            for j in range(i + 1, n):
                if (adj[vi] >> order[j]) & 1:
                    emask |= 1 << bit
                bit += 1
        if best[0] is None or emask < best[0]:
            best[0] = emask

    def rec(colors):
        colors = _refine(n, adj, colors)
        cells: dict[int, list[int]] = {}
        for v in range(n):
            cells.setdefault(colors[v], []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            emit(colors)
            return
        # twins (same open or closed neighborhood) branch identically: skip them
        seen_open, seen_closed = set(), set()
        fresh = max(colors) + 1
        for v in target:
            closed = adj[v] | (1 << v)
            if adj[v] in seen_open or closed in seen_closed:
                continue
            seen_open.add(adj[v])
            seen_closed.add(closed)
            rec(tuple(fresh if u == v else colors[u] for u in range(n)))

    rec(tuple(0 for _ in range(n)))
    return best[0]


def _bits(mask: int):
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def _children_of(args) -> set[int]:
    n, parent_emasks = args
    out = set()
    for emask in parent_emasks:
        adj = edge_mask_to_adj(n - 1, emask) + [0]
        new = n - 1
        for nbset in range(1, 1 << (n - 1)):
            adj2 = list(adj)
            adj2[new] = nbset
            w = 0
            nb = nbset
            while nb:
                if nb & 1:
                    adj2[w] |= 1 << new
                nb >>= 1
                w += 1
            out.add(canonical_cert(n, adj2))
    return out


def connected_graphs(n: int, jobs: int = 1) -> list[int]:
    """Canonical edge masks of all connected graphs on exactly n vertices."""
    if n < 1 or n > max(KNOWN_COUNTS):
        raise ValueError(f"n out of supported range: {n}")
    CACHE_DIR.mkdir(exist_ok=True)
    cache = CACHE_DIR / f"connected_{n}.pickle"
    if cache.exists():
        data = pickle.loads(cache.read_bytes())
        if len(data) == KNOWN_COUNTS[n]:
            return data
    if n == 1:
        result = [0]
    else:
        parents = connected_graphs(n - 1, jobs)
        if jobs > 1 and len(parents) > 64:
            chunks = [parents[i::jobs * 4] for i in range(jobs * 4)]
            with multiprocessing.Pool(jobs) as pool:
                sets = pool.map(_children_of, [(n, c) for c in chunks])
            certs = set().union(*sets)
        else:
            certs = _children_of((n, parents))
        result = sorted(certs)
    if len(result) != KNOWN_COUNTS[n]:
        raise AssertionError(
            f"enumeration bug: {len(result)} connected graphs on {n} vertices, "
            f"expected {KNOWN_COUNTS[n]}")
    cache.write_bytes(pickle.dumps(result))
    return result
