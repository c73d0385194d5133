"""Measurement path construction: one linearly independent path per link.

Tree links are covered by trimmed tree segments: every node walks each
spanning tree toward the root and stops at the first monitor.  A monitor's
valid segments are measurement paths on their own; a non-monitor's three
segments meet only at the node itself, so their pairwise unions are simple
monitor-to-monitor paths.  After deduplication the set has exactly one path
per tree link.  Each remaining non-tree link uv is embedded in one extra
path built from disjoint monitor arms of u and v, so its metric is the only
unknown on that path.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import linalg
from .errors import (
    InvariantViolation,
    NoEmbeddingPath,
    NonSimpleUnion,
    NotIdentifiable,
)
from .graph import ExtendedGraph, Graph, Link, canonical_link
from .ears import EarDecomposition, StNumbering, ear_decompose, st_number
from .trees import BLUE, GREEN, RED, TreeSet, build_trees

PathKey = tuple[Link, ...]


@dataclass(frozen=True, eq=False)
class Segment:
    owner: str
    tree: int
    nodes: tuple[str, ...]
    valid: bool

    @property
    def links(self) -> tuple[Link, ...]:
        return tuple(canonical_link(a, b) for a, b in zip(self.nodes, self.nodes[1:]))


@dataclass(frozen=True, eq=False)
class MeasurementPath:
    nodes: tuple[str, ...]
    links: frozenset[Link]
    key: PathKey
    kind: str  # "tree" | "nontree"
    nontree_link: Link | None = None

    @property
    def hops(self) -> int:
        return len(self.links)


def make_path(nodes, kind: str, nontree_link: Link | None = None) -> MeasurementPath:
    nodes = tuple(nodes)
    if len(set(nodes)) != len(nodes) or len(nodes) < 2:
        raise InvariantViolation(f"not a simple path: {nodes}")
    if nodes[0] > nodes[-1]:
        nodes = tuple(reversed(nodes))
    links = frozenset(canonical_link(a, b) for a, b in zip(nodes, nodes[1:]))
    return MeasurementPath(
        nodes=nodes,
        links=links,
        key=tuple(sorted(links)),
        kind=kind,
        nontree_link=nontree_link,
    )


class PathSet:
    """Paths dedup'd by link-set identity, iterated in canonical key order."""

    def __init__(self):
        self.by_key: dict[PathKey, MeasurementPath] = {}

    def add(self, path: MeasurementPath) -> bool:
        if path.key in self.by_key:
            return False
        self.by_key[path.key] = path
        return True

    def __len__(self) -> int:
        return len(self.by_key)

    def __iter__(self):
        return iter(self.paths)

    @property
    def paths(self) -> list[MeasurementPath]:
        return [self.by_key[k] for k in sorted(self.by_key)]

    def link_universe(self) -> list[Link]:
        links: set[Link] = set()
        for p in self.by_key.values():
            links.update(p.links)
        return sorted(links)

    def incidence_matrix(self, links: list[Link] | None = None):
        cols = links if links is not None else self.link_universe()
        index = {l: i for i, l in enumerate(cols)}
        matrix = []
        for p in self.paths:
            row = [0] * len(cols)
            for l in p.links:
                row[index[l]] = 1
            matrix.append(row)
        return matrix, cols


def segment(t: TreeSet, v: str, tree: int) -> Segment:
    """Walk the parent chain from v; stop at the first monitor after v.

    Invalid when a virtual node comes first, which can only happen when v is
    itself a monitor (virtual nodes neighbor only monitors and the root).
    """
    gex = t.gex
    if gex.is_virtual_node(v):
        raise InvariantViolation(f"segments are defined for real nodes, not {v!r}")
    pmap = t.parent[tree]
    seq = [v]
    cur = v
    while True:
        cur = pmap[cur]
        if gex.is_virtual_node(cur):
            return Segment(owner=v, tree=tree, nodes=tuple(seq), valid=False)
        seq.append(cur)
        if cur in gex.monitor_set:
            return Segment(owner=v, tree=tree, nodes=tuple(seq), valid=True)


def node_segments(t: TreeSet, v: str) -> dict[int, Segment]:
    return {tree: segment(t, v, tree) for tree in (BLUE, GREEN, RED)}


def tree_link_paths(t: TreeSet) -> PathSet:
    """Deduplicated segment paths; exactly one per real link of the union."""
    gex = t.gex
    ps = PathSet()
    for v in gex.base.nodes:
        segs = node_segments(t, v)
        if v in gex.monitor_set:
            for tree in (BLUE, GREEN, RED):
                if segs[tree].valid:
                    ps.add(make_path(segs[tree].nodes, "tree"))
            continue
        for i, j in ((BLUE, GREEN), (BLUE, RED), (GREEN, RED)):
            si, sj = segs[i], segs[j]
            if not (si.valid and sj.valid):
                raise InvariantViolation(f"non-monitor {v} has an invalid segment")
            if set(si.nodes) & set(sj.nodes) != {v}:
                raise NonSimpleUnion(v, i, j)
            nodes = tuple(reversed(si.nodes)) + sj.nodes[1:]
            ps.add(make_path(nodes, "tree"))
    expected = len(t.real_gm_links)
    if len(ps) != expected:
        raise InvariantViolation(
            f"tree path count {len(ps)} != real tree links {expected}"
        )
    return ps


def _arms(t: TreeSet, v: str) -> list[tuple[str, ...]]:
    """Monitor-terminated arms out of v, shortest/trivial first."""
    arms: list[tuple[str, ...]] = []
    if v in t.gex.monitor_set:
        arms.append((v,))
    for tree in (BLUE, GREEN, RED):
        s = segment(t, v, tree)
        if s.valid:
            arms.append(s.nodes)
    return arms


def non_tree_link_path(t: TreeSet, g: Graph, link: Link) -> MeasurementPath:
    """Embed a non-tree link in a path whose other links are all tree links."""
    u, v = link
    if link in t.gm.link_set:
        raise InvariantViolation(f"{link} is a tree link")
    for arm_u in _arms(t, u):
        for arm_v in _arms(t, v):
            if set(arm_u).isdisjoint(arm_v):
                nodes = tuple(reversed(arm_u)) + arm_v
                return make_path(nodes, "nontree", nontree_link=link)
    pair = _disjoint_arms_by_flow(t, link)
    if pair is None:
        raise NoEmbeddingPath(f"no disjoint monitor arms for non-tree link {link}")
    arm_u, arm_v = pair
    nodes = tuple(reversed(arm_u)) + arm_v
    return make_path(nodes, "nontree", nontree_link=link)


def _disjoint_arms_by_flow(t: TreeSet, link: Link):
    """Two vertex-disjoint monitor arms from the link's endpoints.

    Max-flow with unit node capacities on the real part of the tree union;
    the non-tree link itself cannot lie on either arm because each arm must
    avoid the other's source node.
    """
    gex = t.gex
    u, v = link
    real_nodes = sorted(gex.base.nodes)
    index = {x: i for i, x in enumerate(real_nodes)}
    nn = len(real_nodes)
    size = 2 * nn + 2
    source, sink = 2 * nn, 2 * nn + 1
    heads: list[int] = []
    caps: list[int] = []
    adj: list[list[int]] = [[] for _ in range(size)]

    def add_arc(a, b, cap):
        adj[a].append(len(heads))
        heads.append(b)
        caps.append(cap)
        adj[b].append(len(heads))
        heads.append(a)
        caps.append(0)

    for x in real_nodes:
        i = index[x]
        add_arc(2 * i, 2 * i + 1, 1)
        if x in gex.monitor_set:
            add_arc(2 * i + 1, sink, 1)
    for a, b in list(t.real_gm_links) + [link]:
        ia, ib = index[a], index[b]
        add_arc(2 * ia + 1, 2 * ib, 1)
        add_arc(2 * ib + 1, 2 * ia, 1)
    add_arc(source, 2 * index[u], 1)
    add_arc(source, 2 * index[v], 1)

    flow = 0
    parent_arc = [-1] * size
    while flow < 2:
        for i in range(size):
            parent_arc[i] = -1
        parent_arc[source] = -2
        queue = deque([source])
        while queue:
            x = queue.popleft()
            if x == sink:
                break
            for arc in adj[x]:
                if caps[arc] > 0 and parent_arc[heads[arc]] == -1:
                    parent_arc[heads[arc]] = arc
                    queue.append(heads[arc])
        if parent_arc[sink] == -1:
            return None
        x = sink
        while x != source:
            arc = parent_arc[x]
            caps[arc] -= 1
            caps[arc ^ 1] += 1
            x = heads[arc ^ 1]
        flow += 1

    def extract_arm(start: str) -> tuple[str, ...]:
        # Unit node capacities leave exactly one saturated forward arc out
        # of every flow-carrying node, so the walk to the sink is forced.
        seq = [start]
        cur = 2 * index[start]
        for _ in range(2 * size):
            nxt = None
            for arc in adj[cur]:
                if arc % 2 == 0 and caps[arc] == 0:
                    nxt = heads[arc]
                    caps[arc] = -1  # consume; the second walk cannot reuse it
                    break
            if nxt is None:
                raise NoEmbeddingPath(f"flow decomposition stalled at {seq[-1]}")
            if nxt == sink:
                return tuple(seq)
            if nxt % 2 == 0:
                seq.append(real_nodes[nxt // 2])
            cur = nxt
        raise InvariantViolation("flow walk exceeded bound")

    return extract_arm(u), extract_arm(v)


# --- full pipeline ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pipeline:
    """All intermediate artifacts of one construction run."""

    gex: ExtendedGraph
    ears: EarDecomposition
    st: StNumbering
    trees: TreeSet
    paths: PathSet

    @property
    def nontree_links(self) -> list[Link]:
        gm_links = self.trees.gm.link_set
        return [l for l in self.gex.base.links if l not in gm_links]


def build_pipeline(gex: ExtendedGraph, check_rank: bool = True) -> Pipeline:
    """Gate, decompose, number, build trees, and construct all paths."""
    if not gex.is_identifiable():
        raise NotIdentifiable(
            f"extended graph with monitors {list(gex.monitors)} is not 3-connected"
        )
    d = ear_decompose(gex)
    st = st_number(d)
    trees = build_trees(gex, d, st)
    ps = tree_link_paths(trees)
    gm_links = trees.gm.link_set
    for link in gex.base.links:
        if link not in gm_links:
            path = non_tree_link_path(trees, gex.base, link)
            extra = (path.links - {link}) - gm_links
            if extra:
                raise InvariantViolation(
                    f"non-tree path for {link} uses unidentified links {sorted(extra)}"
                )
            ps.add(path)
    if len(ps) != gex.base.n:
        raise InvariantViolation(
            f"constructed {len(ps)} distinct paths for {gex.base.n} links"
        )
    if check_rank:
        matrix, _ = ps.incidence_matrix(sorted(gex.base.links))
        if not linalg.has_full_rank(matrix):
            raise InvariantViolation("path-link incidence matrix is rank deficient")
    return Pipeline(gex=gex, ears=d, st=st, trees=trees, paths=ps)


def construct_all(gex: ExtendedGraph, check_rank: bool = True) -> PathSet:
    """Full measurement path set: exactly one independent path per link."""
    return build_pipeline(gex, check_rank=check_rank).paths
