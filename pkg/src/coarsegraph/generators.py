"""Deterministic graph family constructors.

Every family is a pure function of its GenSpec: same spec + seed gives a
bit-identical graph on any platform, because randomness comes from a
counter-based splitmix64 generator rather than the stdlib Mersenne state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Graph, GraphError, PatternGraph, bfs_distances

_M64 = (1 << 64) - 1


def _splitmix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


class CounterRNG:
    """Splittable counter-based RNG: value i of stream s is mix(mix(seed^s)+i)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed & _M64
        self.stream = stream & _M64
        self._base = _splitmix(self.seed ^ _splitmix(self.stream))
        self._counter = 0

    def split(self, label: int) -> "CounterRNG":
        return CounterRNG(self._base, label + 1)

    def u64(self) -> int:
        self._counter += 1
        return _splitmix((self._base + self._counter) & _M64)

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n > 0")
        # rejection sampling keeps the distribution exactly uniform
        lim = _M64 - (_M64 + 1) % n
        while True:
            x = self.u64()
            if x <= lim:
                return x % n

    def random(self) -> float:
        return (self.u64() >> 11) / float(1 << 53)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]


@dataclass(frozen=True)
class GenSpec:
    """Parameters selecting one deterministic graph."""

    family: str
    n: int = 0
    rows: int = 0
    cols: int = 0
    p: float = 0.05
    chord_len: int = 4
    chord_count: int = 0
    lam: int = 1
    k: int = 1
    dist: int = 0
    pattern: str = ""
    seed: int = 0

    def to_json_obj(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def path_graph(n: int) -> Graph:
    if n < 1:
        raise GraphError("path needs n >= 1")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], root=0)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], root=0)


def grid_graph(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise GraphError("grid needs rows, cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges, root=0)


def star_graph(leaves: int) -> Graph:
    if leaves < 1:
        raise GraphError("star needs >= 1 leaf")
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], root=0)


def random_tree(n: int, seed: int) -> Graph:
    """Uniform random attachment tree: vertex i joins a uniform earlier vertex."""
    if n < 1:
        raise GraphError("tree needs n >= 1")
    rng = CounterRNG(seed, stream=101)
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    return Graph.from_edges(n, edges, root=0)


def quasi_tree(n: int, seed: int, chord_len: int = 4, chord_count: int = 0) -> Graph:
    """Random tree plus chords joining vertices at tree-distance <= chord_len."""
    tree = random_tree(n, seed)
    rng = CounterRNG(seed, stream=202)
    edges = set(tree.edges())
    added = 0
    attempts = 0
    while added < chord_count and attempts < 50 * (chord_count + 1):
        attempts += 1
        u = rng.randrange(n)
        reach = bfs_distances(tree, u, cap=chord_len)
        candidates = sorted(v for v, d in reach.items() if d >= 2)
        if not candidates:
            continue
        v = rng.choice(candidates)
        e = (min(u, v), max(u, v))
        if e in edges:
            continue
        edges.add(e)
        added += 1
    return Graph.from_edges(n, sorted(edges), root=0)


def gnp_connected(n: int, p: float, seed: int) -> Graph:
    """G(n,p) conditioned on connectivity by deterministic re-draws."""
    if n < 1:
        raise GraphError("gnp needs n >= 1")
    for attempt in range(500):
        rng = CounterRNG(seed, stream=303 + attempt)
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
        try:
            return Graph.from_edges(n, edges, root=0)
        except GraphError:
            continue
    raise GraphError(f"gnp_connected(n={n}, p={p}) found no connected sample; raise p")


def gen_hammer(lam: int, k: int, dist: int) -> Graph:
    """Theta gadget on a root spine, placed so a (lam, k) layer structure
    keeps its arms in distinct blocks.

    Three radial arms of length 4*lam join pole x (at radius dist) to pole y,
    so the arms run within distance 2 of each other at both joins.  Arms
    cross four annuli: the first and last annulus chunks of all arms merge
    into shared pole-side blocks (they sit within k of each other through the
    poles), while the two middle annuli give each arm two private blocks.
    Any mid-arm connection of length <= k+1 would chain the arm chunks inside
    one annulus and fuse them into a single block, collapsing the theta, so
    the arms stay plain; the close-pair geometry lives at the joins only.
    """
    if lam < 1 or k < 1:
        raise GraphError("lam and k must be >= 1")
    if dist < 4 * lam:
        raise GraphError(f"dist must be >= 4*lam = {4 * lam} to clear the inner annuli")
    rail = 4 * lam
    edges = []
    # spine 0..dist-1, then pole x at radius dist
    for i in range(dist - 1):
        edges.append((i, i + 1))
    x = dist
    edges.append((dist - 1, x))
    nxt = x + 1

    def arm() -> list[int]:
        nonlocal nxt
        ids = list(range(nxt, nxt + rail))
        nxt += rail
        edges.append((x, ids[0]))
        for a, b in zip(ids, ids[1:]):
            edges.append((a, b))
        return ids

    arm_a = arm()
    arm_b = arm()
    arm_c = arm()
    y = nxt
    for ids in (arm_a, arm_b, arm_c):
        edges.append((ids[-1], y))
    return Graph.from_edges(y + 1, edges, root=0)


def hammer_sweep(params: list[tuple[int, int, int]], bridge_extra: int = 2) -> Graph:
    """Disjoint hammer instances bridged root-to-root by long spines.

    The bridge between consecutive roots is longer than any instance diameter
    times `bridge_extra`, the empirical guard against creating new short
    connections between gadgets.
    """
    if not params:
        raise GraphError("sweep needs at least one (lam, k, dist) triple")
    graphs = [gen_hammer(*p) for p in params]
    edges = []
    offset = 0
    roots = []
    for g in graphs:
        for u, v in g.edges():
            edges.append((u + offset, v + offset))
        roots.append(offset)
        offset += g.vertex_count
    total = offset
    for a, b in zip(roots, roots[1:]):
        span = bridge_extra * max(g.vertex_count for g in graphs)
        prev = a
        for _ in range(span):
            edges.append((prev, total))
            prev = total
            total += 1
        edges.append((prev, b))
    return Graph.from_edges(total, edges, root=0)


def gen(spec: GenSpec) -> Graph:
    """Build the graph selected by spec (deterministic)."""
    fam = spec.family
    if fam == "path":
        return path_graph(spec.n)
    if fam == "cycle":
        return cycle_graph(spec.n)
    if fam == "grid":
        return grid_graph(spec.rows, spec.cols)
    if fam == "star":
        return star_graph(spec.n)
    if fam == "random_tree":
        return random_tree(spec.n, spec.seed)
    if fam == "quasi_tree":
        return quasi_tree(spec.n, spec.seed, spec.chord_len, spec.chord_count)
    if fam == "gnp_connected":
        return gnp_connected(spec.n, spec.p, spec.seed)
    if fam == "hammer":
        return gen_hammer(spec.lam, spec.k, spec.dist)
    raise GraphError(f"unknown family {spec.family!r}")


def gen_pattern(name: str) -> PatternGraph:
    return PatternGraph.by_name(name)
