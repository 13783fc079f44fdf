"""Bottlenecking deciders, the quasi-tree pipeline, distance-preserving edits
and distortion measurement for explicit vertex maps.

Exhaustive bottleneck modes quantify over every pair of disjoint connected
vertex sets, which is exponential; they are gated to small graphs and the
other modes say so in their verdicts instead of pretending completeness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (Graph, GraphError, all_pairs_distances, are_m_disjoint,
                   bfs_distances, connected_subset_masks, is_connected_subset,
                   m_connected_components, max_edge_disjoint_paths,
                   multi_source_bfs, neighborhood, set_of)
from .generators import CounterRNG
from .report import AnalysisReport
from .skeleton import SkeletonParams, build_skeleton, max_block_diameter

EXHAUSTIVE_VERTEX_CAP = 12


@dataclass(frozen=True)
class QIWitness:
    """Affine distance-distortion constants for a vertex map."""

    a: float
    b: float
    direction: str = "both"

    def dominates(self, other: "QIWitness") -> bool:
        """Lexicographic dominance: larger a, or equal a and at least b."""
        return self.a > other.a or (self.a == other.a and self.b >= other.b)

    def to_json_obj(self) -> dict:
        return {"a": self.a, "b": self.b, "direction": self.direction}


# ---------------------------------------------------------------------------
# bottlenecking


def _connected_pairs(g: Graph, rng: Optional[CounterRNG], samples: int):
    """Yield (x_set, y_set) candidate pairs: every unordered disjoint pair of
    connected subsets when rng is None, seeded random pairs otherwise."""
    n = g.vertex_count
    if rng is None:
        masks = connected_subset_masks(g.adj_masks)
        masks.sort(key=lambda m: (bin(m).count("1"), m))
        for i, a in enumerate(masks):
            for b in masks:
                if b & a:
                    continue
                if (b & -b) < (a & -a):
                    continue  # unordered: min vertex of a first
                yield set_of(a), set_of(b)
    else:
        for _ in range(samples):
            a = _random_connected_set(g, rng)
            b = _random_connected_set(g, rng, avoid=a)
            if b:
                yield a, b


def _random_connected_set(g: Graph, rng: CounterRNG,
                          avoid: frozenset[int] = frozenset()) -> frozenset[int]:
    n = g.vertex_count
    for _ in range(20):
        start = rng.randrange(n)
        if start in avoid:
            continue
        size = 1 + rng.randrange(max(1, n // 4))
        cur = [start]
        seen = {start}
        while len(cur) < size:
            frontier = [w for v in cur for w in g.adjacency[v]
                        if w not in seen and w not in avoid]
            if not frontier:
                break
            w = rng.choice(sorted(set(frontier)))
            seen.add(w)
            cur.append(w)
        return frozenset(seen)
    return frozenset()


def edge_bottleneck_check(g: Graph, n: int, strategy: str = "exhaustive",
                          seed: int = 0, samples: int = 300) -> AnalysisReport:
    """Does every pair of disjoint connected sets admit an n-edge cut?

    exhaustive: all pairs (only for graphs with <= 12 vertices).
    vertex-pairs: singleton pairs only; sound for violations, incomplete for
    validation, so a passing verdict is labeled a lower-bound check.
    sampled: seeded random connected pairs.
    """
    if n < 1:
        raise GraphError("n must be >= 1")
    params = {"n": n, "strategy": strategy}
    if strategy == "exhaustive":
        if g.vertex_count > EXHAUSTIVE_VERTEX_CAP:
            raise GraphError(
                f"exhaustive mode is limited to {EXHAUSTIVE_VERTEX_CAP} vertices")
        pairs = _connected_pairs(g, None, 0)
        mode, seed_used = "exhaustive", None
    elif strategy == "vertex-pairs":
        pairs = ((frozenset([u]), frozenset([v]))
                 for u in range(g.vertex_count)
                 for v in range(u + 1, g.vertex_count))
        mode, seed_used = "vertex-pairs", None
    elif strategy == "sampled":
        rng = CounterRNG(seed, stream=11)
        pairs = _connected_pairs(g, rng, samples)
        mode, seed_used = "sampled", seed
    else:
        raise GraphError(f"unknown strategy {strategy!r}")

    checked = 0
    for xs, ys in pairs:
        if not xs or not ys or (xs & ys):
            continue
        checked += 1
        count, paths = max_edge_disjoint_paths(g, xs, ys, cutoff=n + 1)
        if count > n:
            return AnalysisReport(
                check="edge_bottleneck", holds=False, params=params,
                mode=mode, seed=seed_used,
                witness={"x": sorted(xs), "y": sorted(ys), "paths": paths},
                details={"pairs_checked": checked})
    details = {"pairs_checked": checked}
    if mode != "exhaustive":
        details["lower_bound_check"] = True
    return AnalysisReport(check="edge_bottleneck", holds=True, params=params,
                          mode=mode, seed=seed_used, details=details)


def _separates(g: Graph, xs: frozenset[int], ys: frozenset[int],
               deleted: frozenset[int]) -> bool:
    """Is every X,Y path killed by removing `deleted` (X, Y kept)?"""
    blocked = deleted - xs - ys
    seen = set(xs)
    stack = list(xs)
    while stack:
        u = stack.pop()
        for v in g.adjacency[u]:
            if v in seen or v in blocked:
                continue
            if v in ys:
                return False
            seen.add(v)
            stack.append(v)
    return True


def fat_bottleneck_check(g: Graph, m: int, n: int, strategy: str = "exhaustive",
                         seed: int = 0, samples: int = 200) -> AnalysisReport:
    """Is every pair of connected m-disjoint sets separated by the
    m-neighborhood of some n vertices outside both?

    Deleting neighborhood(S, m) never removes X or Y vertices themselves,
    otherwise the predicate could hold vacuously by erasing X.
    """
    if m < 1 or n < 1:
        raise GraphError("m and n must be >= 1")
    params = {"m": m, "n": n, "strategy": strategy}
    if strategy == "exhaustive":
        if g.vertex_count > EXHAUSTIVE_VERTEX_CAP:
            raise GraphError(
                f"exhaustive mode is limited to {EXHAUSTIVE_VERTEX_CAP} vertices")
        pairs = _connected_pairs(g, None, 0)
        mode, seed_used = "exhaustive", None
    elif strategy == "sampled":
        rng = CounterRNG(seed, stream=13)
        pairs = _connected_pairs(g, rng, samples)
        mode, seed_used = "sampled", seed
    else:
        raise GraphError(f"unknown strategy {strategy!r}")

    checked = 0
    for xs, ys in pairs:
        if not xs or not ys:
            continue
        if not are_m_disjoint(g, xs, ys, m):
            continue
        checked += 1
        sep = find_fat_separator(g, xs, ys, m, n)
        if sep is None:
            witness = {"x": sorted(xs), "y": sorted(ys),
                       "paths": _fat_disjoint_paths(g, xs, ys, m, n + 1)}
            witness["paths_complete"] = len(witness["paths"]) >= n + 1
            return AnalysisReport(
                check="fat_bottleneck", holds=False, params=params,
                mode=mode, seed=seed_used, witness=witness,
                details={"pairs_checked": checked})
    details = {"pairs_checked": checked}
    if mode != "exhaustive":
        details["sampled_universe"] = samples
    return AnalysisReport(check="fat_bottleneck", holds=True, params=params,
                          mode=mode, seed=seed_used, details=details)


def find_fat_separator(g: Graph, xs: frozenset[int], ys: frozenset[int],
                       m: int, n: int) -> Optional[frozenset[int]]:
    """First n-subset S outside X,Y whose m-neighborhood severs X from Y.

    Candidates are ordered by max distance to X union Y, then lexicographically.
    """
    outside = sorted(set(range(g.vertex_count)) - xs - ys)
    if len(outside) < n:
        return None
    dist = multi_source_bfs(g, xs | ys)
    ranked = sorted(outside, key=lambda v: (dist.get(v, g.vertex_count + 1), v))
    for combo in sorted(itertools.combinations(ranked, n),
                        key=lambda c: (max(dist.get(v, g.vertex_count + 1) for v in c),
                                       tuple(sorted(c)))):
        deleted = neighborhood(g, combo, m)
        if _separates(g, xs, ys, deleted):
            return frozenset(combo)
    return None


def _fat_disjoint_paths(g: Graph, xs: frozenset[int], ys: frozenset[int],
                        m: int, want: int) -> list[list[int]]:
    """Greedy pairwise m-disjoint X,Y paths (witness material, best effort)."""
    banned: set[int] = set()
    paths = []
    for _ in range(want):
        starts = [v for v in xs if v not in banned]
        prev = {v: None for v in starts}
        queue = list(starts)
        hit = None
        while queue and hit is None:
            nxt = []
            for u in queue:
                for v in g.adjacency[u]:
                    if v in prev or v in banned:
                        continue
                    prev[v] = u
                    if v in ys:
                        hit = v
                        break
                    nxt.append(v)
                if hit:
                    break
            queue = nxt
        if hit is None:
            break
        path = [hit]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        path.reverse()
        paths.append(path)
        banned |= set(multi_source_bfs(g, path, cap=m))
    return paths


# ---------------------------------------------------------------------------
# quasi-tree pipeline


def _find_cycle(g: Graph) -> list[int]:
    """Any cycle in g as a vertex list (empty if acyclic)."""
    parent = {0: None}
    depth = {0: 0}
    queue = [0]
    tree = set()
    order = [0]
    while queue:
        u = queue.pop()
        for v in g.adjacency[u]:
            if v not in parent:
                parent[v] = u
                depth[v] = depth[u] + 1
                tree.add((min(u, v), max(u, v)))
                queue.append(v)
                order.append(v)
    for u, v in g.edges():
        if (u, v) in tree:
            continue
        # join u and v to their lowest common ancestor
        pu, pv = [u], [v]
        a, b = u, v
        while depth[a] > depth[b]:
            a = parent[a]
            pu.append(a)
        while depth[b] > depth[a]:
            b = parent[b]
            pv.append(b)
        while a != b:
            a, b = parent[a], parent[b]
            pu.append(a)
            pv.append(b)
        return pu[:-1] + pv[::-1]
    return []


def quasi_tree_pipeline(g: Graph, m: int) -> AnalysisReport:
    """Per-scale tree test: build the (m, m) skeleton and check acyclicity.

    A tree verdict comes with the natural-map constants; a cyclic verdict
    carries an explicit quotient cycle.  This is a fixed-scale instrument:
    it never claims anything about other scales.
    """
    if m < 1:
        raise GraphError("m must be >= 1")
    s = build_skeleton(g, SkeletonParams(m, m))
    q = s.quotient
    is_tree = q.edge_count() == q.vertex_count - 1
    if is_tree:
        diam, consts = max_block_diameter(s)
        return AnalysisReport(
            check="quasi_tree", holds=True, params={"m": m},
            details={"quotient_vertices": q.vertex_count,
                     "block_diameter": diam, "constants": list(consts)})
    cycle = _find_cycle(q)
    return AnalysisReport(
        check="quasi_tree", holds=False, params={"m": m},
        witness={"quotient_cycle": cycle},
        details={"quotient_vertices": q.vertex_count,
                 "quotient_edges": q.edge_count()})


# ---------------------------------------------------------------------------
# quasi-isometry-preserving edits


@dataclass(frozen=True)
class EditSpec:
    """One graph edit with provable distortion constants.

    kinds: add_edge(u, v); add_edges_bounded(pairs, m); remove_cycle_edge(u, v);
    subdivide_all(m); contract_components(sets, m).
    """

    kind: str
    u: int = -1
    v: int = -1
    m: int = 0
    pairs: tuple[tuple[int, int], ...] = ()
    sets: tuple[frozenset[int], ...] = ()


@dataclass(frozen=True)
class PerturbResult:
    graph: Graph
    predicted: QIWitness
    vertex_map: tuple[int, ...]  # old vertex -> vertex of the edited graph


def perturb(g: Graph, edit: EditSpec) -> PerturbResult:
    """Apply the edit and return the new graph with predicted constants.

    Side conditions are validated up front: removing a bridge, contracting a
    disconnected or oversized set, or adding an overlong edge all raise.
    """
    n = g.vertex_count
    ident = tuple(range(n))
    if edit.kind == "add_edge":
        u, v = edit.u, edit.v
        if u == v or v in g.adjacency[u]:
            raise GraphError("add_edge needs two distinct non-adjacent vertices")
        d = bfs_distances(g, u)[v]
        g2 = Graph.from_edges(n, list(g.edges()) + [(u, v)], g.root)
        return PerturbResult(g2, QIWitness(1, d), ident)

    if edit.kind == "add_edges_bounded":
        if edit.m < 1:
            raise GraphError("add_edges_bounded needs m >= 1")
        new_edges = list(g.edges())
        seen = set(new_edges)
        for u, v in edit.pairs:
            if u == v:
                raise GraphError("cannot add a loop")
            d = bfs_distances(g, u).get(v)
            if d is None or d > edit.m:
                raise GraphError(f"pair ({u},{v}) is at distance {d} > {edit.m}")
            e = (min(u, v), max(u, v))
            if e not in seen:
                seen.add(e)
                new_edges.append(e)
        g2 = Graph.from_edges(n, new_edges, g.root)
        return PerturbResult(g2, QIWitness(edit.m, 0), ident)

    if edit.kind == "remove_cycle_edge":
        u, v = edit.u, edit.v
        if v not in g.adjacency[u]:
            raise GraphError(f"({u},{v}) is not an edge")
        rest = [e for e in g.edges() if e != (min(u, v), max(u, v))]
        try:
            g2 = Graph.from_edges(n, rest, g.root)
        except GraphError:
            raise GraphError(
                f"edge ({u},{v}) is a bridge; only edges on a cycle may go")
        alt = bfs_distances(g2, u)[v]
        return PerturbResult(g2, QIWitness(1, alt), ident)

    if edit.kind == "subdivide_all":
        m = edit.m
        if m < 1:
            raise GraphError("subdivide_all needs m >= 1")
        # every edge becomes a path of length m (m - 1 fresh interior vertices)
        edges2 = []
        nxt = n
        for u, v in g.edges():
            chain = [u] + list(range(nxt, nxt + m - 1)) + [v]
            nxt += m - 1
            edges2.extend(zip(chain, chain[1:]))
        g2 = Graph.from_edges(nxt, edges2, g.root)
        return PerturbResult(g2, QIWitness(m, 0), ident)

    if edit.kind == "contract_components":
        m = edit.m
        sets = [frozenset(s) for s in edit.sets]
        used: set[int] = set()
        for s in sets:
            if used & s:
                raise GraphError("contracted sets must be pairwise disjoint")
            used |= s
            if not is_connected_subset(g, s):
                raise GraphError(f"set {sorted(s)} is not connected")
            diam = max(bfs_distances(g, a)[b] for a in s for b in s)
            if diam > m:
                raise GraphError(f"set {sorted(s)} has diameter {diam} > {m}")
        rep = {}
        for s in sets:
            r = min(s)
            for v in s:
                rep[v] = r
        reps = sorted(set(rep.get(v, v) for v in range(n)))
        newid = {r: i for i, r in enumerate(reps)}
        vmap = tuple(newid[rep.get(v, v)] for v in range(n))
        edges2 = {(min(vmap[u], vmap[v]), max(vmap[u], vmap[v]))
                  for u, v in g.edges() if vmap[u] != vmap[v]}
        root2 = vmap[g.root] if g.root is not None else None
        g2 = Graph.from_edges(len(reps), sorted(edges2), root2)
        return PerturbResult(g2, QIWitness(1, m), vmap)

    raise GraphError(f"unknown edit kind {edit.kind!r}")


# ---------------------------------------------------------------------------
# distortion measurement


def _pair_distances(g: Graph, g2: Graph, vmap: Sequence[int],
                    exhaustive_cap: int, pair_samples: int, seed: int):
    """(d, d') samples for the map; exhaustive below the cap."""
    n = g.vertex_count
    if len(vmap) != n:
        raise GraphError("vertex map must be total on the source graph")
    if n <= exhaustive_cap:
        dg = all_pairs_distances(g)
        dh = all_pairs_distances(g2)
        f = np.asarray(vmap)
        return dg, dh[f[:, None], f[None, :]], "exhaustive"
    rng = CounterRNG(seed, stream=17)
    ds, dps = [], []
    for _ in range(max(1, pair_samples // max(1, n // 8))):
        u = rng.randrange(n)
        du = bfs_distances(g, u)
        du2 = bfs_distances(g2, vmap[u])
        for _ in range(min(n, 128)):
            v = rng.randrange(n)
            ds.append(du[v])
            dps.append(du2[vmap[v]])
    return np.asarray(ds), np.asarray(dps), "sampled"


def measure_distortion(g: Graph, g2: Graph, vmap: Sequence[int],
                       exhaustive_cap: int = 2000, pair_samples: int = 100_000,
                       seed: int = 0) -> QIWitness:
    """Lexicographically minimal (a, b) over the grid (a in halves, b integer)
    with (1/a) d - b <= d' <= a d + b on every checked pair.

    For finite graphs a = 1 always admits a finite b, so the lexicographic
    minimum sits at a = 1; the multiplier grid survives in `distortion_frontier`
    for callers who want the whole trade-off curve.
    """
    frontier = distortion_frontier(g, g2, vmap, exhaustive_cap, pair_samples, seed)
    a, b = frontier[0]
    return QIWitness(a, b)


def distortion_frontier(g: Graph, g2: Graph, vmap: Sequence[int],
                        exhaustive_cap: int = 2000, pair_samples: int = 100_000,
                        seed: int = 0, a_max: float = 16.0
                        ) -> list[tuple[float, int]]:
    """Minimal additive constant for each half-integer multiplier."""
    dg, dgf, _mode = _pair_distances(g, g2, vmap, exhaustive_cap, pair_samples, seed)
    out = []
    a = 1.0
    prev = None
    while a <= a_max:
        need_upper = float(np.max(dgf - a * dg)) if dg.size else 0.0
        need_lower = float(np.max(dg / a - dgf)) if dg.size else 0.0
        b = max(0, math.ceil(max(need_upper, need_lower) - 1e-9))
        if prev is None or b < prev:
            out.append((a, b))
            prev = b
        if b == 0:
            break
        a += 0.5
    return out


def verify_qi(g: Graph, g2: Graph, vmap: Sequence[int], a: float, b: float,
              exhaustive_cap: int = 2000, pair_samples: int = 100_000,
              seed: int = 0) -> bool:
    """Do the two affine inequalities hold at (a, b) on every checked pair?"""
    dg, dgf, _mode = _pair_distances(g, g2, vmap, exhaustive_cap, pair_samples, seed)
    upper = bool(np.all(dgf <= a * dg + b + 1e-9))
    lower = bool(np.all(dg / a - b <= dgf + 1e-9))
    return upper and lower


def check_coarse_image_connected(g: Graph, g2: Graph, vmap: Sequence[int],
                                 h: Iterable[int], a: float, b: float) -> AnalysisReport:
    """Image of a connected set under an (a,b)-map is (a+b)-connected."""
    hs = frozenset(h)
    if not is_connected_subset(g, hs):
        raise GraphError("h must induce a connected subgraph")
    if not verify_qi(g, g2, vmap, a, b):
        raise GraphError(f"map is not an ({a},{b}) quasi-isometry")
    image = frozenset(vmap[v] for v in hs)
    gap = max(1, math.floor(a + b))
    comps = m_connected_components(g2, image, gap)
    return AnalysisReport(
        check="coarse_image_connected", holds=len(comps) == 1,
        params={"a": a, "b": b, "chain_gap": gap},
        witness={} if len(comps) == 1 else {"components": [sorted(c) for c in comps]},
        details={"image_size": len(image)})
