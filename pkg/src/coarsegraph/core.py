"""Metric and connectivity primitives on finite rooted graphs.

Distances are always measured in the ambient (whole-graph) metric unless a
function says otherwise; several notions here (m-connected components,
m-disjointness, m-neighborhoods) deliberately use strict or non-strict
inequalities and the boundary behaviour is part of the contract:

* m-connected: chain steps of length <= m
* m-disjoint:  every cross pair at distance  > m
* m-neighborhood: vertices at distance < m (so m=0 is empty)
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


class GraphError(ValueError):
    """Raised for malformed graph input (loops, duplicates, disconnection)."""


@dataclass(frozen=True)
class Graph:
    """Finite undirected simple connected graph on vertices 0..n-1."""

    vertex_count: int
    adjacency: tuple[tuple[int, ...], ...]
    root: Optional[int] = None
    _adj_masks: tuple[int, ...] = field(default=None, repr=False, compare=False)

    @staticmethod
    def from_edges(vertex_count: int, edges: Iterable[tuple[int, int]],
                   root: Optional[int] = None) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(vertex_count)]
        for u, v in edges:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphError(f"edge ({u},{v}) outside vertex range 0..{vertex_count - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if v in nbrs[u]:
                raise GraphError(f"duplicate edge ({u},{v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        if root is not None and not (0 <= root < vertex_count):
            raise GraphError(f"root {root} outside vertex range")
        g = Graph(vertex_count, tuple(tuple(sorted(s)) for s in nbrs), root)
        if vertex_count == 0:
            raise GraphError("empty graph")
        if len(bfs_distances(g, 0)) != vertex_count:
            raise GraphError("graph is not connected")
        return g

    def with_root(self, root: int) -> "Graph":
        if not (0 <= root < self.vertex_count):
            raise GraphError(f"root {root} outside vertex range")
        return Graph(self.vertex_count, self.adjacency, root)

    @property
    def adj_masks(self) -> tuple[int, ...]:
        """Per-vertex neighbor bitmasks, built lazily (graph is immutable)."""
        if self._adj_masks is None:
            masks = []
            for nbrs in self.adjacency:
                m = 0
                for v in nbrs:
                    m |= 1 << v
                masks.append(m)
            object.__setattr__(self, "_adj_masks", tuple(masks))
        return self._adj_masks

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def edge_count(self) -> int:
        return sum(len(n) for n in self.adjacency) // 2

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def to_json_obj(self) -> dict:
        obj = {"vertex_count": self.vertex_count, "edges": [list(e) for e in self.edges()]}
        if self.root is not None:
            obj["root"] = self.root
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @staticmethod
    def from_json_obj(obj: dict) -> "Graph":
        try:
            n = int(obj["vertex_count"])
            edges = [(int(u), int(v)) for u, v in obj["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from exc
        root = obj.get("root")
        return Graph.from_edges(n, edges, None if root is None else int(root))

    @staticmethod
    def from_json(text: str) -> "Graph":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphError(f"invalid JSON: {exc}") from exc
        return Graph.from_json_obj(obj)

    def to_edge_list_text(self) -> str:
        lines = []
        if self.root is not None:
            lines.append(f"#root {self.root}")
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_edge_list_text(text: str) -> "Graph":
        """Parse flat edge-list text: one "u v" pair per line, "#root r" comment."""
        root = None
        edges = []
        max_v = -1
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "root":
                    root = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"bad edge line: {line!r}")
            u, v = int(parts[0]), int(parts[1])
            edges.append((u, v))
            max_v = max(max_v, u, v)
        if root is not None:
            max_v = max(max_v, root)
        return Graph.from_edges(max_v + 1, edges, root)


@dataclass(frozen=True)
class PatternGraph:
    """Small undirected multigraph used as a minor pattern (parallel edges ok)."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"pattern loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"pattern edge ({u},{v}) out of range")

    @staticmethod
    def make(vertex_count: int, edges: Iterable[tuple[int, int]]) -> "PatternGraph":
        return PatternGraph(vertex_count, tuple(tuple(sorted(e)) for e in edges))

    @staticmethod
    def theta(k: int = 3) -> "PatternGraph":
        """Two vertices joined by k parallel edges."""
        return PatternGraph.make(2, [(0, 1)] * k)

    @staticmethod
    def cycle(n: int) -> "PatternGraph":
        if n == 2:
            return PatternGraph.theta(2)
        return PatternGraph.make(n, [(i, (i + 1) % n) for i in range(n)])

    @staticmethod
    def complete(n: int) -> "PatternGraph":
        return PatternGraph.make(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @staticmethod
    def by_name(name: str) -> "PatternGraph":
        table = {
            "theta3": PatternGraph.theta(3),
            "c3": PatternGraph.cycle(3),
            "c4": PatternGraph.cycle(4),
            "k4": PatternGraph.complete(4),
        }
        try:
            return table[name.lower()]
        except KeyError:
            raise GraphError(f"unknown pattern {name!r}; known: {sorted(table)}")

    def multiplicity(self, u: int, v: int) -> int:
        e = (min(u, v), max(u, v))
        return sum(1 for f in self.edges if f == e)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def to_json_obj(self) -> dict:
        return {"vertex_count": self.vertex_count, "edges": [list(e) for e in self.edges]}

    @staticmethod
    def from_json_obj(obj: dict) -> "PatternGraph":
        return PatternGraph.make(int(obj["vertex_count"]),
                                 [(int(u), int(v)) for u, v in obj["edges"]])


# ---------------------------------------------------------------------------
# distances


def bfs_distances(g: Graph, source: int, cap: Optional[int] = None) -> dict[int, int]:
    """Exact BFS distances from source; vertices beyond cap are omitted."""
    if not (0 <= source < g.vertex_count):
        raise GraphError(f"source {source} outside vertex range")
    dist = {source: 0}
    queue = deque([source])
    adj = g.adjacency
    while queue:
        u = queue.popleft()
        du = dist[u]
        if cap is not None and du >= cap:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = du + 1
                queue.append(v)
    return dist


def multi_source_bfs(g: Graph, sources: Iterable[int], cap: Optional[int] = None) -> dict[int, int]:
    """BFS distances to the nearest of several sources, truncated at cap."""
    dist = {}
    queue = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    adj = g.adjacency
    while queue:
        u = queue.popleft()
        du = dist[u]
        if cap is not None and du >= cap:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = du + 1
                queue.append(v)
    return dist


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Dense all-pairs distance matrix (int32), scipy-backed for speed."""
    n = g.vertex_count
    rows, cols = [], []
    for u, v in g.edges():
        rows.extend((u, v))
        cols.extend((v, u))
    m = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    d = shortest_path(m, method="D", unweighted=True)
    return d.astype(np.int32)


# ---------------------------------------------------------------------------
# set-level notions


def m_connected_components(g: Graph, s: Iterable[int], m: int) -> list[frozenset[int]]:
    """Partition s into maximal m-connected subsets (ambient metric).

    Two members are chained when their whole-graph distance is <= m; BFS is
    truncated at m so the cost stays proportional to the ball sizes.
    """
    if m < 1:
        raise GraphError("m must be >= 1")
    members = sorted(set(s))
    if not members:
        return []
    member_set = set(members)
    parent = {v: v for v in members}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v in members:
        reach = bfs_distances(g, v, cap=m)
        for u in reach:
            if u in member_set and u != v:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv
    groups: dict[int, set[int]] = {}
    for v in members:
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(c) for c in groups.values()), key=min)


def are_m_disjoint(g: Graph, x: Iterable[int], y: Iterable[int], m: int) -> bool:
    """True iff every cross pair is at distance strictly greater than m."""
    xs, ys = set(x), set(y)
    if not xs or not ys:
        return True
    if len(ys) < len(xs):
        xs, ys = ys, xs
    reach = multi_source_bfs(g, xs, cap=m)
    return not any(v in reach for v in ys)


def set_distance(g: Graph, x: Iterable[int], y: Iterable[int]) -> int:
    """Minimum ambient distance between two nonempty vertex sets."""
    xs, ys = set(x), set(y)
    if not xs or not ys:
        raise GraphError("set_distance needs nonempty sets")
    if xs & ys:
        return 0
    dist = multi_source_bfs(g, xs)
    return min(dist[v] for v in ys)


def neighborhood(g: Graph, s: Iterable[int], m: int) -> frozenset[int]:
    """All vertices at distance strictly less than m from s (m=0 is empty)."""
    if m <= 0:
        return frozenset()
    return frozenset(multi_source_bfs(g, s, cap=m - 1))


def is_connected_subset(g: Graph, s: Iterable[int]) -> bool:
    """True iff the subgraph induced by s is connected (empty set counts)."""
    ss = set(s)
    if not ss:
        return True
    start = next(iter(ss))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if v in ss and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(ss)


# ---------------------------------------------------------------------------
# edge-disjoint paths (Menger)


def max_edge_disjoint_paths(g: Graph, x: Iterable[int], y: Iterable[int],
                            cutoff: Optional[int] = None
                            ) -> tuple[int, list[list[int]]]:
    """Maximum set of pairwise edge-disjoint X,Y paths via unit-capacity flow.

    X and Y are contracted to a super source/sink; by Menger duality the
    returned count equals the minimum number of edges meeting every X,Y path.
    With `cutoff` the augmentation stops once that many paths are found
    (useful when only "more than n?" matters).
    """
    xs, ys = set(x), set(y)
    if not xs or not ys:
        raise GraphError("x and y must be nonempty")
    if xs & ys:
        raise GraphError("x and y must be disjoint")
    if not is_connected_subset(g, xs) or not is_connected_subset(g, ys):
        raise GraphError("x and y must induce connected subgraphs")

    # flow[u][v] in {0,1} on directed arcs; both orientations of an edge exist
    flow: dict[tuple[int, int], int] = {}
    adj = g.adjacency

    def residual(u, v):
        return 1 - flow.get((u, v), 0) + flow.get((v, u), 0)

    count = 0
    while cutoff is None or count < cutoff:
        # BFS in the residual graph from the contracted source
        prev: dict[int, Optional[int]] = {s: None for s in xs}
        queue = deque(xs)
        hit = None
        while queue and hit is None:
            u = queue.popleft()
            for v in adj[u]:
                if v in prev or v in xs:
                    continue
                if residual(u, v) <= 0:
                    continue
                prev[v] = u
                if v in ys:
                    hit = v
                    break
                queue.append(v)
        if hit is None:
            break
        v = hit
        while prev[v] is not None:
            u = prev[v]
            back = flow.get((v, u), 0)
            if back:
                flow[(v, u)] = back - 1
            else:
                flow[(u, v)] = flow.get((u, v), 0) + 1
            v = u
        count += 1

    # Decompose net flow into vertex paths.
    out: dict[int, list[int]] = {}
    for (u, v), f in flow.items():
        if f - flow.get((v, u), 0) > 0:
            out.setdefault(u, []).append(v)
    for lst in out.values():
        lst.sort()
    paths = []
    for s in sorted(xs):
        while out.get(s):
            path = [s]
            u = s
            while u not in ys:
                v = out[u].pop(0)
                path.append(v)
                u = v
            paths.append(path)
    return count, paths


# ---------------------------------------------------------------------------
# bitmask helpers (hot paths in search code)


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def set_of(mask: int) -> frozenset[int]:
    out = set()
    v = 0
    while mask:
        if mask & 1:
            out.add(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def iter_bits(mask: int) -> Iterator[int]:
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def connected_subset_masks(adj_masks: Sequence[int], universe: Optional[int] = None,
                           max_size: Optional[int] = None) -> list[int]:
    """All nonempty connected induced-subgraph bitmasks within universe.

    Standard recursive enumeration: each subset is generated exactly once by
    growing from its minimum vertex using only larger-or-equal candidates.
    """
    n = len(adj_masks)
    if universe is None:
        universe = (1 << n) - 1
    out = []

    def grow(cur: int, frontier: int, allowed: int, size: int):
        out.append(cur)
        if max_size is not None and size >= max_size:
            return
        ext = frontier & allowed
        while ext:
            v = (ext & -ext).bit_length() - 1
            bit = 1 << v
            ext &= ~bit
            allowed &= ~bit
            grow(cur | bit, frontier | adj_masks[v], allowed, size + 1)

    verts = [v for v in range(n) if (universe >> v) & 1]
    allowed = universe
    for v in verts:
        bit = 1 << v
        allowed &= ~bit
        grow(bit, adj_masks[v], allowed, 1)
    return out
