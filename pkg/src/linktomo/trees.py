"""Three independent spanning trees rooted at the virtual root.

Tree 1 (blue) climbs ear levels and is forced through mu2; tree 2 (green)
descends s-t numbers to the root; tree 3 (red) climbs s-t numbers to the
first virtual monitor.  Green and red parents of an ear interior are its two
ear neighbors, which puts every ear link inside the tree union; blue parents
are free choices among higher-ear-level neighbors, tie-broken by (ear level,
s-t number).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvariantViolation, NoEligibleParent
from .graph import (
    VIRTUAL_M1,
    VIRTUAL_M2,
    VIRTUAL_ROOT,
    ExtendedGraph,
    Graph,
    Link,
    build_graph,
    canonical_link,
)
from .ears import EarDecomposition, StNumbering, oriented_ear

BLUE, GREEN, RED = 1, 2, 3
TREE_NAMES = {BLUE: "blue", GREEN: "green", RED: "red"}


@dataclass(frozen=True, eq=False)
class TreeSet:
    gex: ExtendedGraph
    parent: dict[int, dict[str, str]]
    gm: Graph
    virtual_in_gm: tuple[Link, ...]
    mu_a: str
    mu_b: str
    greens: tuple[str, ...]
    reds: tuple[str, ...]

    def tree_links(self, tree: int) -> frozenset[Link]:
        return frozenset(canonical_link(v, p) for v, p in self.parent[tree].items())

    @property
    def real_gm_links(self) -> tuple[Link, ...]:
        return tuple(l for l in self.gm.links if not self.gex.is_virtual_link(l))


def build_trees(gex: ExtendedGraph, d: EarDecomposition, st: StNumbering) -> TreeSet:
    g = d.ear_level
    f = st.f
    adj = gex.full.adj
    mu2 = gex.mu2

    parent1: dict[str, str] = {mu2: VIRTUAL_ROOT}
    for v in gex.full.nodes:
        if v in (VIRTUAL_ROOT, mu2):
            continue
        best = None
        for w in adj[v]:
            if g[w] > g[v] and (best is None or (g[w], f[w]) < (g[best], f[best])):
                best = w
        if best is None:
            raise NoEligibleParent(BLUE, v)
        parent1[v] = best

    parent2: dict[str, str] = {VIRTUAL_M2: VIRTUAL_ROOT}
    parent3: dict[str, str] = {VIRTUAL_M1: VIRTUAL_ROOT}
    e1 = d.ears[0]
    mu1 = e1[2]
    parent2[mu1] = VIRTUAL_M2
    parent2[VIRTUAL_M1] = mu1
    parent3[mu1] = VIRTUAL_M1
    parent3[VIRTUAL_M2] = mu1
    for i in range(2, d.n_e + 1):
        seq = oriented_ear(d, st, i)
        for pos in range(1, len(seq) - 1):
            parent2[seq[pos]] = seq[pos - 1]
            parent3[seq[pos]] = seq[pos + 1]

    parents = {BLUE: parent1, GREEN: parent2, RED: parent3}
    _check_rules(gex, d, st, parents)

    links: set[Link] = set()
    for pmap in parents.values():
        links.update(canonical_link(v, p) for v, p in pmap.items())
    gm = build_graph(gex.full.nodes, sorted(links))
    virtual_in_gm = tuple(sorted(l for l in links if gex.is_virtual_link(l)))

    mu_a = parent1[VIRTUAL_M2]
    mu_b = parent1[VIRTUAL_M1]
    monitors = gex.monitor_set
    if mu_a not in monitors or mu_b not in monitors:
        raise InvariantViolation("blue parents of the virtual monitors must be monitors")
    greens = tuple(
        v for v in gex.monitors if v not in (gex.mu1, mu_a) and parent2.get(v) == VIRTUAL_M2
    )
    reds = tuple(
        v for v in gex.monitors if v not in (gex.mu1, mu_b) and parent3.get(v) == VIRTUAL_M1
    )
    return TreeSet(
        gex=gex,
        parent=parents,
        gm=gm,
        virtual_in_gm=virtual_in_gm,
        mu_a=mu_a,
        mu_b=mu_b,
        greens=greens,
        reds=reds,
    )


def _check_rules(gex, d, st, parents) -> None:
    g = d.ear_level
    f = st.f
    roots = {BLUE: gex.mu2, GREEN: VIRTUAL_M2, RED: VIRTUAL_M1}
    for tree, pmap in parents.items():
        expected = set(gex.full.nodes) - {VIRTUAL_ROOT}
        if set(pmap) != expected:
            raise InvariantViolation(f"{TREE_NAMES[tree]} tree does not span")
        for v, p in pmap.items():
            if v == roots[tree]:
                if p != VIRTUAL_ROOT:
                    raise InvariantViolation(f"{TREE_NAMES[tree]}: {v} must hang off the root")
                continue
            ok = (
                g[p] > g[v]
                if tree == BLUE
                else (f[p] < f[v] and g[p] <= g[v])
                if tree == GREEN
                else (f[p] > f[v] and g[p] <= g[v])
            )
            if not ok:
                raise InvariantViolation(
                    f"{TREE_NAMES[tree]} rule broken at {v} (parent {p})"
                )


def root_path(t: TreeSet, tree: int, v: str) -> tuple[str, ...]:
    """Parent chain from v to the root in the given tree."""
    if v == VIRTUAL_ROOT:
        raise InvariantViolation("root has no root path")
    pmap = t.parent[tree]
    seq = [v]
    cur = v
    limit = t.gm.m + 1
    while cur != VIRTUAL_ROOT:
        cur = pmap[cur]
        seq.append(cur)
        if len(seq) > limit:
            raise InvariantViolation(f"{TREE_NAMES[tree]} chain from {v} does not reach the root")
    return tuple(seq)


def verify_independence(t: TreeSet) -> list[tuple[str, int, int, tuple[str, ...]]]:
    """Internally-vertex-disjointness violations of the three root paths."""
    violations = []
    for v in t.gm.nodes:
        if v == VIRTUAL_ROOT:
            continue
        paths = {tree: root_path(t, tree, v) for tree in (BLUE, GREEN, RED)}
        for i, j in ((BLUE, GREEN), (BLUE, RED), (GREEN, RED)):
            shared = set(paths[i]) & set(paths[j]) - {v, VIRTUAL_ROOT}
            if shared:
                violations.append((v, i, j, tuple(sorted(shared))))
    return violations
