"""Coarse skeletons: annulus layers, k-connected blocks, quotient graphs.

A skeleton of a rooted graph at scale lam and connectivity k divides the
vertices into annuli of width lam around the root (the root alone sits in
layer -1), splits each annulus into maximal k-connected subsets measured in
the ambient metric (the blocks), and takes the quotient graph with one vertex
per block and an edge wherever some base edge crosses two blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (Graph, GraphError, all_pairs_distances, bfs_distances,
                   m_connected_components, multi_source_bfs)
from .generators import CounterRNG
from .report import AnalysisReport


@dataclass(frozen=True)
class SkeletonParams:
    lam: int
    k: int

    def __post_init__(self):
        if self.lam < 1 or self.k < 1:
            raise GraphError("scale and connectivity must both be >= 1")


def layer_index(d: int, lam: int) -> int:
    """The unique N with N*lam < d <= (N+1)*lam; distance 0 maps to -1."""
    if d < 0 or lam < 1:
        raise GraphError("need d >= 0 and lam >= 1")
    return -(-d // lam) - 1  # ceil(d/lam) - 1


@dataclass(frozen=True)
class Skeleton:
    base: Graph
    params: SkeletonParams
    layer_of: tuple[int, ...]
    block_of: tuple[int, ...]
    blocks: tuple[frozenset[int], ...]
    block_layer: tuple[int, ...]
    quotient: Graph

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def natural_map(self, v: int) -> int:
        return self.block_of[v]

    def to_json_obj(self) -> dict:
        return {
            "params": {"lambda": self.params.lam, "k": self.params.k},
            "layer_of": list(self.layer_of),
            "block_of": list(self.block_of),
            "quotient": self.quotient.to_json_obj(),
            "base": self.base.to_json_obj(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @staticmethod
    def from_json_obj(obj: dict) -> "Skeleton":
        base = Graph.from_json_obj(obj["base"])
        params = SkeletonParams(int(obj["params"]["lambda"]), int(obj["params"]["k"]))
        s = build_skeleton(base, params)
        if list(s.block_of) != [int(b) for b in obj["block_of"]]:
            raise GraphError("skeleton JSON inconsistent with its base graph")
        return s


def build_skeleton(g: Graph, params: SkeletonParams) -> Skeleton:
    """Construct the (lam, k) skeleton of a rooted connected graph."""
    if g.root is None:
        raise GraphError("skeleton needs a rooted graph")
    dist = bfs_distances(g, g.root)
    layer_of = tuple(layer_index(dist[v], params.lam) for v in range(g.vertex_count))

    layers: dict[int, list[int]] = {}
    for v in range(g.vertex_count):
        layers.setdefault(layer_of[v], []).append(v)

    blocks: list[frozenset[int]] = []
    block_layer: list[int] = []
    for lay in sorted(layers):
        comps = m_connected_components(g, layers[lay], params.k)
        for comp in comps:  # already ordered by min member
            blocks.append(comp)
            block_layer.append(lay)

    block_of = [0] * g.vertex_count
    for b, comp in enumerate(blocks):
        for v in comp:
            block_of[v] = b

    qedges = set()
    for u, v in g.edges():
        bu, bv = block_of[u], block_of[v]
        if bu != bv:
            qedges.add((min(bu, bv), max(bu, bv)))
    quotient = Graph.from_edges(len(blocks), sorted(qedges), root=block_of[g.root])
    return Skeleton(g, params, layer_of, tuple(block_of), tuple(blocks),
                    tuple(block_layer), quotient)


def check_skeleton_facts(s: Skeleton) -> AnalysisReport:
    """Verify the five structural facts of a skeleton quotient.

    (1) bipartite with every edge joining consecutive layers, (2) connected,
    (3) simple, (4) every quotient edge backed by a base edge, (5) every
    quotient vertex backed by a base vertex.
    """
    violations = []
    q = s.quotient
    for a, b in q.edges():
        if abs(s.block_layer[a] - s.block_layer[b]) != 1:
            violations.append({"fact": "bipartite", "edge": [a, b],
                               "layers": [s.block_layer[a], s.block_layer[b]]})
    reach = bfs_distances(q, q.root if q.root is not None else 0)
    if len(reach) != q.vertex_count:
        violations.append({"fact": "connected",
                           "unreached": sorted(set(range(q.vertex_count)) - set(reach))[:5]})
    for u, nbrs in enumerate(q.adjacency):
        if u in nbrs or len(nbrs) != len(set(nbrs)):
            violations.append({"fact": "simple", "vertex": u})
    backed = set()
    for u, v in s.base.edges():
        bu, bv = s.block_of[u], s.block_of[v]
        if bu != bv:
            backed.add((min(bu, bv), max(bu, bv)))
    for e in q.edges():
        if e not in backed:
            violations.append({"fact": "edge-backed", "edge": list(e)})
    for b, blk in enumerate(s.blocks):
        if not blk:
            violations.append({"fact": "vertex-backed", "block": b})
    return AnalysisReport(
        check="skeleton_facts", holds=not violations,
        params={"lambda": s.params.lam, "k": s.params.k},
        witness={"violations": violations})


def max_block_diameter(s: Skeleton, dg: Optional[np.ndarray] = None
                       ) -> tuple[int, tuple[int, int]]:
    """Largest ambient-metric block diameter, with additive-map constants.

    Returns (diam, (M, 2M)) where M = diam + 1: walking the quotient path and
    stitching through blocks costs at most M per quotient hop plus end blocks,
    so d(x, y) <= M * d(f(x), f(y)) + 2M for all pairs.  Note the raw diameter
    itself is one too small as a multiplier on long paths.
    """
    diam = 0
    for blk in s.blocks:
        if len(blk) < 2:
            continue
        members = sorted(blk)
        if dg is not None:
            idx = np.asarray(members)
            spread = int(dg[np.ix_(idx, idx)].max())
            if spread > diam:
                diam = spread
            continue
        for v in members:
            reach = bfs_distances(s.base, v)
            spread = max(reach[u] for u in members)
            if spread > diam:
                diam = spread
    m = diam + 1
    return diam, (m, 2 * m)


def verify_natural_map_qi(s: Skeleton, exhaustive_cap: int = 2000,
                          pair_samples: int = 100_000, seed: int = 0,
                          dg: Optional[np.ndarray] = None,
                          dq: Optional[np.ndarray] = None) -> AnalysisReport:
    """Check the two-sided distance inequality for the natural map.

    Exhaustive over all vertex pairs up to `exhaustive_cap` vertices, seeded
    uniform pairs beyond.  Also reports the tightest (a, b) with the quotient
    distance within [d/a - b, d] on the checked pairs.
    """
    n = s.base.vertex_count
    if dg is None and n <= exhaustive_cap:
        dg = all_pairs_distances(s.base)
    if dq is None:
        dq = all_pairs_distances(s.quotient)
    diam, (m, b2) = max_block_diameter(s, dg=dg)
    f = np.asarray(s.block_of)
    violations = []
    if n <= exhaustive_cap:
        mode = "exhaustive"
        dqf = dq[f[:, None], f[None, :]]
        bad_lower = dqf > dg
        bad_upper = dg > m * dqf + b2
        for name, bad in (("lower", bad_lower), ("upper", bad_upper)):
            if bad.any():
                xs, ys = np.nonzero(bad)
                violations.append({"side": name, "pair": [int(xs[0]), int(ys[0])],
                                   "d_base": int(dg[xs[0], ys[0]]),
                                   "d_quotient": int(dqf[xs[0], ys[0]])})
        mask = dqf > 0
        tight_a = float(np.max(dg[mask] / dqf[mask])) if mask.any() else 1.0
        same_block_max = float(np.max(dg[~mask])) if (~mask).any() else 0.0
    else:
        mode = "sampled"
        rng = CounterRNG(seed, stream=7)
        tight_a = 1.0
        same_block_max = 0.0
        for _ in range(pair_samples // n + 1):
            u = rng.randrange(n)
            du = bfs_distances(s.base, u)
            for _ in range(min(n, 64)):
                v = rng.randrange(n)
                d = du[v]
                q = int(dq[s.block_of[u], s.block_of[v]])
                if q > d:
                    violations.append({"side": "lower", "pair": [u, v]})
                if d > m * q + b2:
                    violations.append({"side": "upper", "pair": [u, v]})
                if q > 0:
                    tight_a = max(tight_a, d / q)
                else:
                    same_block_max = max(same_block_max, d)
    return AnalysisReport(
        check="natural_map_qi", holds=not violations,
        params={"lambda": s.params.lam, "k": s.params.k},
        mode=mode, seed=seed if mode == "sampled" else None,
        witness={"violations": violations[:5]},
        details={"block_diameter": diam, "constants": [m, b2],
                 "tightest_multiplier": round(tight_a, 4),
                 "max_same_block_distance": same_block_max})


def block_reach_within(s: Skeleton, block_id: int, cap: int) -> dict[int, int]:
    """Distances from one block's preimage to all vertices within cap."""
    return multi_source_bfs(s.base, s.blocks[block_id], cap=cap)


def check_no_edge_disjointness(s: Skeleton) -> AnalysisReport:
    """Non-adjacent distinct quotient vertices must have preimages >= min(lam,k) apart.

    Violations are cross distances strictly below min(lam, k); exact hits at
    the bound are counted separately since the underlying argument only
    guarantees the non-strict form.
    """
    m = min(s.params.lam, s.params.k)
    q = s.quotient
    violations = []
    boundary_hits = 0
    for a in range(q.vertex_count):
        nbrs = set(q.adjacency[a])
        reach = block_reach_within(s, a, cap=m)
        closest: dict[int, int] = {}
        for v, d in reach.items():
            b = s.block_of[v]
            if b != a and b not in nbrs:
                closest[b] = min(closest.get(b, d), d)
        for b, d in sorted(closest.items()):
            if b < a:
                continue  # each unordered pair once
            if d < m:
                violations.append({"blocks": [a, b], "distance": d, "bound": m})
            elif d == m:
                boundary_hits += 1
    return AnalysisReport(
        check="no_edge_disjointness", holds=not violations,
        params={"lambda": s.params.lam, "k": s.params.k, "bound": m},
        witness={"violations": violations[:5]},
        details={"boundary_hits": boundary_hits})


def check_distance_expansion(s: Skeleton, n: int) -> AnalysisReport:
    """Quotient distance >= n forces preimage distance >= min(lam,k)*(n-1)."""
    if n < 2:
        raise GraphError("expansion check needs n >= 2")
    m = min(s.params.lam, s.params.k)
    bound = m * (n - 1)
    dq = all_pairs_distances(s.quotient)
    violations = []
    for a in range(s.block_count):
        reach = block_reach_within(s, a, cap=bound)
        closest: dict[int, int] = {}
        for v, d in reach.items():
            b = s.block_of[v]
            if b > a:
                closest[b] = min(closest.get(b, d), d)
        for b, d in sorted(closest.items()):
            if dq[a, b] >= n and d < bound:
                violations.append({"blocks": [a, b], "quotient_distance": int(dq[a, b]),
                                   "preimage_distance": d, "bound": bound})
    return AnalysisReport(
        check="distance_expansion", holds=not violations,
        params={"lambda": s.params.lam, "k": s.params.k, "n": n, "bound": bound},
        witness={"violations": violations[:5]})


def compose_skeleton(s: Skeleton, n: int, k2: int) -> tuple[Skeleton, tuple[int, ...]]:
    """The (n, k2) skeleton of the quotient, plus the induced base partition.

    The quotient is rooted at the block containing the base root, so composing
    natural maps is itself a natural map.
    """
    inner = build_skeleton(s.quotient, SkeletonParams(n, k2))
    induced = tuple(inner.block_of[s.block_of[v]] for v in range(s.base.vertex_count))
    return inner, induced


def _canonical_partition(labels) -> list[int]:
    seen: dict[int, int] = {}
    out = []
    for x in labels:
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return out


def verify_composition_identity(g: Graph, lam: int, k: int, n: int) -> AnalysisReport:
    """Scale composition: the (n,1) skeleton of the (lam,k) skeleton equals
    the (n*lam, k) skeleton, both as a partition of V(G) and edge-wise."""
    direct = build_skeleton(g, SkeletonParams(n * lam, k))
    staged, induced = compose_skeleton(build_skeleton(g, SkeletonParams(lam, k)), n, 1)
    pd = _canonical_partition(direct.block_of)
    ps = _canonical_partition(induced)
    witness = {}
    holds = pd == ps
    if not holds:
        for v, (a, b) in enumerate(zip(pd, ps)):
            if a != b:
                witness = {"vertex": v, "direct_class": a, "staged_class": b}
                break
    else:
        # partitions match; compare quotient edge sets under the label bijection
        to_direct = {}
        for v in range(g.vertex_count):
            to_direct[induced[v]] = direct.block_of[v]
        direct_edges = set(direct.quotient.edges())
        staged_edges = set()
        for a, b in staged.quotient.edges():
            da, db = to_direct[a], to_direct[b]
            staged_edges.add((min(da, db), max(da, db)))
        if staged_edges != direct_edges:
            holds = False
            diff = staged_edges ^ direct_edges
            witness = {"edge_mismatch": [list(e) for e in sorted(diff)][:5]}
    return AnalysisReport(
        check="composition_identity", holds=holds,
        params={"lambda": lam, "k": k, "n": n,
                "regime": "k<=lambda" if k <= lam else "lambda<k"},
        witness=witness)


def quotient_dot(s: Skeleton) -> str:
    """DOT export of the quotient; blocks of one layer share a rank."""
    lines = ["graph skeleton {", "  rankdir=TB;", "  node [shape=circle];"]
    by_layer: dict[int, list[int]] = {}
    for b, lay in enumerate(s.block_layer):
        by_layer.setdefault(lay, []).append(b)
    for lay in sorted(by_layer):
        row = " ".join(f"b{b};" for b in sorted(by_layer[lay]))
        lines.append(f"  {{ rank=same; {row} }}  // layer {lay}")
    for b in range(s.block_count):
        lines.append(f'  b{b} [label="{b}\\nL{s.block_layer[b]}"];')
    for a, b in s.quotient.edges():
        lines.append(f"  b{a} -- b{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
