"""Undirected graphs, connectivity analysis, and extended-graph construction.

Node identifiers are opaque strings ordered lexicographically; every
deterministic tie-break in the toolkit relies on that order.  Links are
canonical sorted pairs ``(u, v)`` with ``u < v``.

The extended graph adds three virtual nodes to a monitored base graph: two
virtual monitors adjacent to every real monitor, and a root adjacent to the
two virtual monitors and to one designated real monitor.  A network instance
is identifiable exactly when this extended graph is 3-vertex-connected.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    DuplicateLink,
    GraphError,
    NoNonCutvertexMonitor,
    SelfLoop,
    UnknownEndpoint,
)

Link = tuple[str, str]

VIRTUAL_ROOT = "$r"
VIRTUAL_M1 = "$m1"
VIRTUAL_M2 = "$m2"
VIRTUAL_NODES = frozenset({VIRTUAL_ROOT, VIRTUAL_M1, VIRTUAL_M2})


def canonical_link(u: str, v: str) -> Link:
    if u == v:
        raise SelfLoop(u)
    return (u, v) if u < v else (v, u)


def link_key(link: Link) -> str:
    return f"{link[0]}|{link[1]}"


def parse_link_key(key: str) -> Link:
    u, _, v = key.partition("|")
    if not v:
        raise GraphError(f"malformed link key {key!r}")
    return canonical_link(u, v)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph. Immutable after construction."""

    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    adj: dict[str, tuple[str, ...]]
    link_set: frozenset[Link] = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.nodes)

    @property
    def n(self) -> int:
        return len(self.links)

    def has_link(self, u: str, v: str) -> bool:
        return canonical_link(u, v) in self.link_set

    def degree(self, v: str) -> int:
        return len(self.adj[v])


def build_graph(nodes, links) -> Graph:
    """Validate and build a Graph; raises on self loops, duplicates, unknowns."""
    node_list = list(nodes)
    node_set = set(node_list)
    if len(node_set) != len(node_list):
        dupes = [x for x in node_set if node_list.count(x) > 1]
        raise GraphError(f"duplicate node identifiers {sorted(dupes)}")
    seen: set[Link] = set()
    for u, v in links:
        if u not in node_set:
            raise UnknownEndpoint(u)
        if v not in node_set:
            raise UnknownEndpoint(v)
        link = canonical_link(u, v)
        if link in seen:
            raise DuplicateLink(link)
        seen.add(link)
    adj_sets: dict[str, set[str]] = {x: set() for x in node_set}
    for u, v in seen:
        adj_sets[u].add(v)
        adj_sets[v].add(u)
    return Graph(
        nodes=tuple(sorted(node_set)),
        links=tuple(sorted(seen)),
        adj={x: tuple(sorted(adj_sets[x])) for x in sorted(node_set)},
        link_set=frozenset(seen),
    )


def _component(adj, start, blocked=frozenset()):
    """Nodes reachable from start without entering blocked ones."""
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen and y not in blocked:
                seen.add(y)
                queue.append(y)
    return seen


def is_connected(g: Graph, removed: frozenset[str] = frozenset()) -> bool:
    remaining = [x for x in g.nodes if x not in removed]
    if len(remaining) <= 1:
        return True
    reached = _component(g.adj, remaining[0], blocked=removed)
    return len(reached) == len(remaining)


def find_non_cutvertex_monitor(g: Graph, monitors) -> str:
    """Smallest monitor whose removal leaves the graph connected."""
    monitor_set = set(monitors)
    if not monitor_set or not monitor_set <= set(g.nodes):
        raise GraphError("monitors must be a nonempty subset of the graph nodes")
    for mu in sorted(monitor_set):
        if is_connected(g, frozenset({mu})):
            return mu
    raise NoNonCutvertexMonitor(
        f"all monitors {sorted(monitor_set)} are cutvertices"
    )


# --- vertex connectivity -------------------------------------------------

_EXHAUSTIVE_LIMIT = 12


def vertex_connectivity_at_least(g: Graph, k: int) -> bool:
    """True iff no set of fewer than k nodes disconnects g and |V| > k.

    Uses exhaustive cut-set enumeration up to 12 nodes, otherwise a
    Menger/max-flow check with unit node capacities.
    """
    if k < 1:
        raise GraphError("k must be >= 1")
    if g.m <= k:
        return False
    if not is_connected(g):
        return False
    if k == 1:
        return True
    if any(len(g.adj[x]) < k for x in g.nodes):
        return False
    if g.m <= _EXHAUSTIVE_LIMIT:
        for cut in itertools.combinations(g.nodes, k - 1):
            if not is_connected(g, frozenset(cut)):
                return False
        return True
    return _flow_connectivity_at_least(g, k)


def _flow_connectivity_at_least(g: Graph, k: int) -> bool:
    # Any cut of size < k misses one of k pivot nodes, and that pivot is
    # non-adjacent to every node across the cut; so flow checks from k
    # pivots to their non-neighbors are sufficient.
    index = {x: i for i, x in enumerate(g.nodes)}
    pivots = sorted(g.nodes, key=lambda x: (-len(g.adj[x]), x))[:k]
    for v in pivots:
        v_adj = set(g.adj[v])
        for u in g.nodes:
            if u == v or u in v_adj:
                continue
            if _max_disjoint_paths(g, index, v, u, cutoff=k) < k:
                return False
    return True


def _max_disjoint_paths(g: Graph, index, s: str, t: str, cutoff: int) -> int:
    """Number of internally vertex-disjoint s-t paths, capped at cutoff.

    Standard node-splitting reduction: node x becomes x_in=2x, x_out=2x+1
    with a unit-capacity internal arc; links get unit arcs both ways.
    """
    n2 = 2 * g.m
    heads: list[int] = []
    caps: list[int] = []
    adj_arcs: list[list[int]] = [[] for _ in range(n2)]

    def add_arc(a: int, b: int, cap: int) -> None:
        adj_arcs[a].append(len(heads))
        heads.append(b)
        caps.append(cap)
        adj_arcs[b].append(len(heads))
        heads.append(a)
        caps.append(0)

    big = len(g.links) + 1
    for x in g.nodes:
        i = index[x]
        add_arc(2 * i, 2 * i + 1, big if x in (s, t) else 1)
    for u, v in g.links:
        iu, iv = index[u], index[v]
        add_arc(2 * iu + 1, 2 * iv, 1)
        add_arc(2 * iv + 1, 2 * iu, 1)

    source = 2 * index[s] + 1
    sink = 2 * index[t]
    flow = 0
    parent_arc = [-1] * n2
    while flow < cutoff:
        for i in range(n2):
            parent_arc[i] = -1
        parent_arc[source] = -2
        queue = deque([source])
        while queue:
            x = queue.popleft()
            if x == sink:
                break
            for arc in adj_arcs[x]:
                if caps[arc] > 0 and parent_arc[heads[arc]] == -1:
                    parent_arc[heads[arc]] = arc
                    queue.append(heads[arc])
        if parent_arc[sink] == -1:
            break
        x = sink
        while x != source:
            arc = parent_arc[x]
            caps[arc] -= 1
            caps[arc ^ 1] += 1
            x = heads[arc ^ 1]
        flow += 1
    return flow


# --- extended graph ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtendedGraph:
    """Base graph plus virtual nodes {r, mu1', mu2'} and their virtual links."""

    base: Graph
    monitors: tuple[str, ...]
    mu1: str
    mu2: str
    virtual_links: tuple[Link, ...]
    full: Graph

    @property
    def monitor_set(self) -> frozenset[str]:
        return frozenset(self.monitors)

    def is_virtual_node(self, x: str) -> bool:
        return x in VIRTUAL_NODES

    def is_virtual_link(self, link: Link) -> bool:
        return link[0] in VIRTUAL_NODES or link[1] in VIRTUAL_NODES

    def is_identifiable(self) -> bool:
        """3-connectivity gate for the extended graph.

        Equivalent to ``vertex_connectivity_at_least(full, 3)`` but runs the
        structural check below, which only needs one DFS pass per base node:
        the extended graph is 3-connected exactly when no pair of base nodes
        leaves a monitor-free component behind.
        """
        return extended_gate(self.base, self.monitor_set)


def build_extended_graph(g: Graph, monitors, mu2: str | None = None) -> ExtendedGraph:
    monitor_set = set(monitors)
    if len(monitor_set) < 2:
        raise GraphError("need at least 2 monitors")
    if not monitor_set <= set(g.nodes):
        raise GraphError("monitors must be graph nodes")
    if VIRTUAL_NODES & set(g.nodes):
        raise GraphError(f"node identifiers {sorted(VIRTUAL_NODES & set(g.nodes))} are reserved")
    if not is_connected(g):
        raise GraphError("base graph must be connected")

    mu1 = find_non_cutvertex_monitor(g, monitor_set)
    if mu2 is not None:
        if mu2 not in monitor_set or mu2 == mu1:
            raise GraphError(f"mu2 {mu2!r} must be a monitor different from mu1 {mu1!r}")
    else:
        # Prefer a monitor with >= 2 real neighbors so the final ear of the
        # decomposition can take real endpoints (keeps the redundancy
        # taxonomy to a single trivial residue).
        others = [x for x in sorted(monitor_set) if x != mu1]
        wide = [x for x in others if g.degree(x) >= 2]
        mu2 = (wide or others)[0]

    virtual = set()
    for mu in monitor_set:
        virtual.add(canonical_link(VIRTUAL_M1, mu))
        virtual.add(canonical_link(VIRTUAL_M2, mu))
    virtual.add(canonical_link(VIRTUAL_ROOT, VIRTUAL_M1))
    virtual.add(canonical_link(VIRTUAL_ROOT, VIRTUAL_M2))
    virtual.add(canonical_link(VIRTUAL_ROOT, mu2))

    full = build_graph(
        list(g.nodes) + sorted(VIRTUAL_NODES),
        list(g.links) + sorted(virtual),
    )
    return ExtendedGraph(
        base=g,
        monitors=tuple(sorted(monitor_set)),
        mu1=mu1,
        mu2=mu2,
        virtual_links=tuple(sorted(virtual)),
        full=full,
    )


def extended_gate(base: Graph, monitors: frozenset[str]) -> bool:
    """3-connectivity of the extended graph, checked structurally."""
    return next(iter_blind_pieces(base, monitors), None) is None


def iter_blind_pieces(base: Graph, monitors: frozenset[str]):
    """Yield monitor-free node sets strandable by removing two nodes.

    Each yielded frozenset is a component of ``base - {x, y}`` (for some base
    pair, or a base node paired with a virtual node) that contains no
    monitor.  The extended graph is 3-connected iff nothing is yielded.
    Monitor placement scores candidates by membership in these pieces.
    """
    if base.m < 3:
        return
    monitors = frozenset(monitors)
    for x in base.nodes:
        unvisited = set(base.nodes)
        unvisited.discard(x)
        while unvisited:
            root = min(unvisited)
            comp = _component(base.adj, root, blocked=frozenset({x}))
            unvisited -= comp
            mon_in_comp = sum(1 for y in comp if y in monitors)
            if mon_in_comp == 0:
                yield frozenset(comp)
                continue
            yield from _blind_splits(base.adj, comp, x, root, monitors, mon_in_comp)


def _blind_splits(adj, comp, x, root, monitors, comp_monitors):
    """Articulation DFS over one component of base-{x}.

    Yields every monitor-free piece some cut node y strands: a hanging
    subtree without monitors, or the remainder when the hanging subtrees
    carry all of them.  Subtrees are recovered as contiguous ranges of the
    DFS discovery order.
    """
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    sub_size: dict[str, int] = {}
    sub_mon: dict[str, int] = {}
    hang_ranges: dict[str, list[tuple[int, int]]] = {}
    hang_mon: dict[str, int] = {}
    order: list[str] = []

    def neighbors(y):
        for z in adj[y]:
            if z != x and z in comp:
                yield z

    def open_node(z):
        disc[z] = low[z] = len(order)
        order.append(z)
        sub_size[z] = 1
        sub_mon[z] = 1 if z in monitors else 0
        hang_ranges[z] = []
        hang_mon[z] = 0

    open_node(root)
    stack: list[tuple[str, str | None, object]] = [(root, None, neighbors(root))]
    while stack:
        y, parent, it = stack[-1]
        advanced = False
        for z in it:
            if z not in disc:
                open_node(z)
                stack.append((z, y, neighbors(z)))
                advanced = True
                break
            elif z != parent:
                low[y] = min(low[y], disc[z])
        if advanced:
            continue
        stack.pop()
        if y != root:
            # removing y leaves its hanging subtrees plus one remainder
            hang_total = sum(size for _, size in hang_ranges[y])
            rest_size = len(comp) - 1 - hang_total
            rest_mon = comp_monitors - hang_mon[y] - (1 if y in monitors else 0)
            if rest_size > 0 and rest_mon == 0:
                cut = {y}
                for start, size in hang_ranges[y]:
                    cut.update(order[start : start + size])
                yield frozenset(comp - cut)
            low[parent] = min(low[parent], low[y])
            sub_size[parent] += sub_size[y]
            sub_mon[parent] += sub_mon[y]
            if low[y] >= disc[parent]:
                if sub_mon[y] == 0:
                    yield frozenset(order[disc[y] : disc[y] + sub_size[y]])
                hang_ranges[parent].append((disc[y], sub_size[y]))
                hang_mon[parent] += sub_mon[y]
    # removing the root splits the component into its child subtrees
    if len(comp) >= 2:
        seen = {root}
        for z in adj[root]:
            if z == x or z not in comp or z in seen:
                continue
            piece = _component(
                {w: [q for q in adj[w] if q != x and q in comp] for w in comp},
                z,
                blocked=frozenset({root}),
            )
            seen |= piece
            if not any(w in monitors for w in piece):
                yield frozenset(piece)


# --- JSON interface ------------------------------------------------------


def graph_to_dict(g: Graph, monitors=(), metrics: dict[Link, float] | None = None) -> dict:
    out = {
        "nodes": list(g.nodes),
        "links": [list(l) for l in g.links],
        "monitors": sorted(monitors),
    }
    if metrics is not None:
        out["metrics"] = {link_key(l): metrics[l] for l in sorted(metrics)}
    return out


def graph_from_dict(data: dict):
    """Parse the graph JSON schema; returns (graph, monitors, metrics|None)."""
    try:
        nodes = [str(x) for x in data["nodes"]]
        links = [canonical_link(str(u), str(v)) for u, v in data["links"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc
    g = build_graph(nodes, links)
    monitors = [str(x) for x in data.get("monitors", [])]
    if not set(monitors) <= set(g.nodes):
        raise GraphError("monitors reference unknown nodes")
    metrics = None
    if "metrics" in data and data["metrics"] is not None:
        metrics = {}
        for key, value in data["metrics"].items():
            link = parse_link_key(key)
            if link not in g.link_set:
                raise GraphError(f"metric for unknown link {key!r}")
            metrics[link] = float(value)
    return g, monitors, metrics


def load_graph_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_dict(json.load(fh))


def save_graph_json(path: str, g: Graph, monitors=(), metrics=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(g, monitors, metrics), fh, indent=2, sort_keys=True)
        fh.write("\n")
