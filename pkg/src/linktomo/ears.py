"""Nonseparating ear decomposition and s-t numbering of the extended graph.

The decomposition opens with the fixed 4-cycle through the virtual root and
both virtual monitors, covers every remaining node with path ears whose
interiors are new, and closes with a length-3 ear whose single internal node
is the root-adjacent monitor mu2.  After removing any prefix of ears the
remaining nodes must stay connected, and each ear interior must keep a
neighbor among the still-uncovered nodes.

Ear search is greedy and deterministic: candidates are enumerated shortest
first and in lexicographic node order, validated against the conditions
above, and the first valid one is taken; dead ends backtrack.  Induced-ness
is relaxed so a link between the two endpoints of an ear is allowed (a chord
from an ear interior to any non-consecutive ear node is not).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import DecompositionFailed
from .graph import VIRTUAL_M1, VIRTUAL_M2, VIRTUAL_NODES, VIRTUAL_ROOT, ExtendedGraph

_DEFAULT_BUDGET = 5_000_000
_FAILED_STATE_CAP = 50_000
_DEFER_EFFORT = 20_000


@dataclass(frozen=True, eq=False)
class EarDecomposition:
    ears: tuple[tuple[str, ...], ...]
    ear_level: dict[str, int]

    @property
    def n_e(self) -> int:
        return len(self.ears)

    def new_nodes(self, i: int) -> tuple[str, ...]:
        """Nodes first covered by ear i (1-based)."""
        ear = self.ears[i - 1]
        return ear[:-1] if i == 1 else ear[1:-1]

    def delta(self, i: int) -> int:
        return len(self.new_nodes(i))


@dataclass(frozen=True, eq=False)
class StNumbering:
    f: dict[str, int]


def first_ear(gex: ExtendedGraph) -> tuple[str, ...]:
    return (VIRTUAL_ROOT, VIRTUAL_M1, gex.mu1, VIRTUAL_M2, VIRTUAL_ROOT)


def ear_decompose(gex: ExtendedGraph, budget: int = _DEFAULT_BUDGET) -> EarDecomposition:
    """Greedy deterministic decomposition; backtracks on dead ends."""
    adj = gex.full.adj
    e1 = first_ear(gex)
    covered = set(e1)
    uncovered = set(gex.full.nodes) - covered
    ears: list[tuple[str, ...]] = [e1]
    state = _SearchState(gex, adj, budget)
    if uncovered and not state.search(covered, uncovered, ears):
        raise DecompositionFailed(
            f"ear search exhausted (budget left {state.budget}) at "
            f"{len(uncovered)} uncovered nodes",
            ears=ears,
        )
    levels: dict[str, int] = {}
    for i in range(1, len(ears) + 1):
        ear = ears[i - 1]
        news = ear[:-1] if i == 1 else ear[1:-1]
        for v in news:
            levels[v] = i
    return EarDecomposition(ears=tuple(ears), ear_level=levels)


class _SearchState:
    def __init__(self, gex: ExtendedGraph, adj, budget: int):
        self.gex = gex
        self.adj = adj
        self.mu2 = gex.mu2
        self.budget = budget
        self.failed: set[frozenset[str]] = set()

    def search(self, covered: set[str], uncovered: set[str], ears: list) -> bool:
        if uncovered == {self.mu2}:
            ears.append(self._final_ear(covered))
            return True
        key = frozenset(uncovered)
        if key in self.failed:
            return False
        for ear in self._candidates(covered, uncovered):
            internals = set(ear[1:-1])
            covered |= internals
            uncovered -= internals
            ears.append(ear)
            if self.search(covered, uncovered, ears):
                return True
            ears.pop()
            covered -= internals
            uncovered |= internals
        if len(self.failed) < _FAILED_STATE_CAP:
            self.failed.add(key)
        return False

    def _final_ear(self, covered: set[str]) -> tuple[str, str, str]:
        # prefer real endpoints: a virtual endpoint would become a virtual
        # tree parent of mu2 and generate extra all-virtual cycles
        mu2 = self.mu2
        pool = sorted(x for x in self.adj[mu2] if x != VIRTUAL_ROOT)
        ranked = sorted(pool, key=lambda x: (x in (VIRTUAL_M1, VIRTUAL_M2), x))
        for a in ranked:
            for b in ranked:
                if b != a:
                    return (a, mu2, b)
        raise DecompositionFailed(f"monitor {mu2!r} has fewer than 2 usable neighbors")

    def _candidates(self, covered: set[str], uncovered: set[str]):
        """Ears in (length, node sequence) lexicographic order.

        Single-internal ears spanning the two virtual monitors are deferred:
        they leave the internal monitor with two virtual tree parents and an
        extra all-virtual cycle, spoiling the single-trivial-residue
        property.  They are released once a bounded amount of search effort
        finds no alternative, so they stay available when genuinely forced
        (a base-degree-1 monitor always forces one).
        """
        eligible = uncovered - {self.mu2}
        if not eligible:
            return
        anchors = sorted(covered)
        deferred: list[tuple[str, ...]] = []
        released = False
        effort_start = self.budget
        max_length = len(eligible) + 2
        for length in range(3, max_length + 1):
            k = length - 2
            for v0 in anchors:
                prefix = [v0]
                for ear in self._extend(prefix, set(prefix), k, covered, eligible, uncovered):
                    if not released and len(ear) == 3 and {ear[0], ear[-1]} == {VIRTUAL_M1, VIRTUAL_M2}:
                        deferred.append(ear)
                    else:
                        yield ear
                if deferred and not released and effort_start - self.budget >= _DEFER_EFFORT:
                    released = True
                    yield from deferred
                    deferred = []
            if length == 4:
                # short ears exhausted: propose direct monitor hookups
                # (shortest non-monitor route to the covered region) before
                # paying for deep blind enumeration
                yield from self._targeted_monitor_ears(covered, eligible, uncovered)
        yield from deferred

    def _targeted_monitor_ears(self, covered, eligible, uncovered):
        """Ears attaching an uncovered monitor via a nonseparating real route.

        From each uncovered monitor, a BFS through uncovered non-monitors
        finds the nearest covered real node.  Shortest paths are chord-free,
        so only condition 3 needs checking; when the route walls off a
        pocket of uncovered nodes, the route node adjacent to the pocket is
        forbidden and the BFS repeats, leaving that node as the pocket's
        connector.
        """
        adj = self.adj
        monitor_set = self.gex.monitor_set
        for v in sorted(x for x in eligible if x in monitor_set):
            forbidden: set[str] = set()
            for _ in range(12):
                route = self._shortest_real_route(v, covered, eligible, monitor_set, forbidden)
                if route is None:
                    break
                internals = (v,) + route[:-1]
                if self.budget <= 0:
                    raise DecompositionFailed("ear search budget exhausted")
                self.budget -= 1
                stranded, pocket = self._cond3_diagnose(internals, uncovered)
                if not stranded and not pocket:
                    for anchor in (VIRTUAL_M1, VIRTUAL_M2):
                        yield (anchor, v) + route
                    break
                blockable = sorted(
                    x
                    for x in internals[1:]
                    if x in stranded or any(w in pocket for w in adj[x])
                )
                if not blockable:
                    break
                forbidden.add(blockable[0])

    def _shortest_real_route(self, v, covered, eligible, monitor_set, forbidden=frozenset()):
        """Lex-least shortest path from v through uncovered non-monitors to
        a covered real node; None when no such route exists."""
        adj = self.adj
        parent: dict[str, str] = {v: v}
        queue = deque([v])
        goal = None
        while queue and goal is None:
            x = queue.popleft()
            for y in adj[x]:
                if y in parent or y in VIRTUAL_NODES or y in forbidden:
                    continue
                if y in covered:
                    parent[y] = x
                    goal = y
                    break
                if y in eligible and y not in monitor_set:
                    parent[y] = x
                    queue.append(y)
        if goal is None:
            return None
        seq = [goal]
        while seq[-1] != v:
            seq.append(parent[seq[-1]])
        seq.reverse()
        return tuple(seq[1:])

    def _cond3_diagnose(self, internals, uncovered):
        """Condition-3 failure details: (stranded internals, walled pocket)."""
        adj = self.adj
        after = uncovered.difference(internals)
        stranded = {x for x in internals if not any(w in after for w in adj[x])}
        pocket: set[str] = set()
        if after:
            start = min(after)  # deterministic side labelling
            seen = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if y in after and y not in seen:
                        seen.add(y)
                        queue.append(y)
            if len(seen) != len(after):
                pocket = after - seen
                if self.mu2 in pocket:
                    # pocket labelling must name the side the route cut off
                    pocket = seen
        return stranded, pocket

    def _extend(self, seq: list[str], used: set[str], remaining: int, covered, eligible, uncovered):
        adj = self.adj
        last = seq[-1]
        if remaining == 0:
            body = seq[1:]
            interior = set(body[:-1])
            for end in adj[last]:
                if end == seq[0] or end not in covered:
                    continue
                # endpoint may touch the other endpoint but no interior node
                if interior and not interior.isdisjoint(adj[end]):
                    continue
                candidate = tuple(seq) + (end,)
                if self.budget <= 0:
                    raise DecompositionFailed("ear search budget exhausted")
                self.budget -= 1
                if self._cond3_ok(candidate, uncovered):
                    yield candidate
            return
        blockers = set(seq[:-1])
        for nxt in adj[last]:
            if nxt not in eligible or nxt in used:
                continue
            # relaxed induced-ness: interior nodes touch only ear neighbors
            if blockers and not blockers.isdisjoint(adj[nxt]):
                continue
            if self.budget <= 0:
                raise DecompositionFailed("ear search budget exhausted")
            self.budget -= 1
            seq.append(nxt)
            used.add(nxt)
            yield from self._extend(seq, used, remaining - 1, covered, eligible, uncovered)
            seq.pop()
            used.discard(nxt)

    def _cond3_ok(self, ear: tuple[str, ...], uncovered: set[str]) -> bool:
        internals = ear[1:-1]
        after = uncovered.difference(internals)
        if not after:
            return True
        adj = self.adj
        for v in internals:
            if not any(w in after for w in adj[v]):
                return False
        start = next(iter(after))
        seen = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in after and y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == len(after)


# --- validation -----------------------------------------------------------


def validate_ears(gex: ExtendedGraph, d: EarDecomposition) -> list[str]:
    """Every violated decomposition condition, with the offending ear index."""
    problems: list[str] = []
    adj = gex.full.adj
    nodes = set(gex.full.nodes)
    ears = d.ears
    if not ears:
        return ["empty decomposition"]
    if tuple(ears[0]) != first_ear(gex):
        problems.append("E1 fixed form")

    seen: dict[str, int] = {}
    for i in range(1, len(ears) + 1):
        ear = ears[i - 1]
        news = ear[:-1] if i == 1 else ear[1:-1]
        for v in news:
            if v in seen:
                problems.append(f"E{i}: node {v} already introduced by E{seen[v]}")
            seen[v] = i
    missing = nodes - set(seen)
    if missing:
        problems.append(f"node coverage: missing {sorted(missing)}")
    extra = set(seen) - nodes
    if extra:
        problems.append(f"node coverage: unknown {sorted(extra)}")

    for i in range(2, len(ears) + 1):
        ear = ears[i - 1]
        if len(ear) < 3:
            problems.append(f"E{i}: too short")
            continue
        if len(set(ear)) != len(ear):
            problems.append(f"E{i}: repeated node")
        if ear[0] == ear[-1]:
            problems.append(f"E{i}: endpoints coincide")
        for end in (ear[0], ear[-1]):
            if seen.get(end, i) >= i:
                problems.append(f"E{i}: endpoint {end} not in an earlier ear")
        for v in ear[1:-1]:
            if seen.get(v) != i:
                problems.append(f"E{i}: internal {v} not new")

    for i in range(1, len(ears) + 1):
        ear = ears[i - 1]
        for a, b in zip(ear, ear[1:]):
            if b not in adj.get(a, ()):
                problems.append(f"E{i}: {a}-{b} is not a link")
        body = ear if i > 1 else ear[:-1]
        for pos in range(1, len(ear) - 1):
            v = ear[pos]
            allowed = {ear[pos - 1], ear[pos + 1]}
            bad = set(adj.get(v, ())) & set(ear) - allowed - {v}
            if bad:
                problems.append(
                    f"E{i}: internal {v} adjacent to non-consecutive {sorted(bad)}"
                )

    # condition 3, replayed over the prefix sequence
    remaining = set(nodes)
    for i in range(1, len(ears) + 1):
        ear = ears[i - 1]
        news = ear[:-1] if i == 1 else ear[1:-1]
        remaining -= set(news)
        if not remaining:
            continue
        internals = ear[1:-1] if i > 1 else ()
        for v in internals:
            if not any(w in remaining for w in adj[v]):
                problems.append(f"E{i}: internal {v} has no neighbor left uncovered")
        start = next(iter(remaining))
        comp = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in remaining and y not in comp:
                    comp.add(y)
                    queue.append(y)
        if len(comp) != len(remaining):
            problems.append(f"E{i}: uncovered remainder disconnected")

    last = ears[-1]
    if len(last) != 3:
        problems.append(f"E{len(ears)}: last ear must have 3 nodes")
    elif last[1] != gex.mu2:
        problems.append(f"E{len(ears)}: internal node must be {gex.mu2}")
    if len(ears) >= 2 and gex.mu2 in {v for e in ears[:-1] for v in e}:
        problems.append(f"{gex.mu2} appears before the last ear")

    for i in range(2, len(ears) + 1):
        if len(ears[i - 1]) - 2 < 1:
            problems.append(f"E{i}: introduces no node")

    for v, lvl in d.ear_level.items():
        if seen.get(v) != lvl:
            problems.append(f"ear level of {v} is {lvl}, expected {seen.get(v)}")

    return problems


def st_number(d: EarDecomposition) -> StNumbering:
    """Sequential ear numbering; r gets 1 and the first virtual monitor |V|."""
    f: dict[str, int] = {}
    for i in range(1, d.n_e + 1):
        ear = d.ears[i - 1]
        if i == 1:
            r, m1, mu1, m2 = ear[0], ear[1], ear[2], ear[3]
            f[r], f[m2], f[mu1], f[m1] = 1, 2, 3, 4
            continue
        a, b = ear[0], ear[-1]
        seq = ear if f[a] < f[b] else tuple(reversed(ear))
        eta = f[seq[-1]]
        psi = len(ear) - 2
        for w in f:
            if f[w] >= eta:
                f[w] += psi
        for offset, v in enumerate(seq[1:-1]):
            f[v] = eta + offset
    return StNumbering(f=dict(f))


def oriented_ear(d: EarDecomposition, st: StNumbering, i: int) -> tuple[str, ...]:
    """Ear i listed from its lower-f endpoint (E1 in its fixed form)."""
    ear = d.ears[i - 1]
    if i == 1:
        return ear
    return ear if st.f[ear[0]] < st.f[ear[-1]] else tuple(reversed(ear))


def validate_st(gex: ExtendedGraph, st: StNumbering) -> list[str]:
    problems: list[str] = []
    f = st.f
    nodes = set(gex.full.nodes)
    if set(f) != nodes:
        problems.append("domain mismatch")
        return problems
    values = sorted(f.values())
    if values != list(range(1, len(nodes) + 1)):
        problems.append("not a bijection onto 1..|V|")
    if f.get(VIRTUAL_ROOT) != 1:
        problems.append(f"f({VIRTUAL_ROOT}) != 1")
    if f.get(VIRTUAL_M1) != len(nodes):
        problems.append(f"f({VIRTUAL_M1}) != |V|")
    adj = gex.full.adj
    for v in sorted(nodes):
        if v in (VIRTUAL_ROOT, VIRTUAL_M1):
            continue
        fv = f[v]
        if not any(f[w] < fv for w in adj[v]):
            problems.append(f"{v}: no lower-numbered neighbor")
        if not any(f[w] > fv for w in adj[v]):
            problems.append(f"{v}: no higher-numbered neighbor")
    return problems


def neighbor_property_violations(gex: ExtendedGraph, d: EarDecomposition, st: StNumbering) -> list[str]:
    """Check the three per-node neighbor guarantees the tree rules rely on."""
    problems = []
    g = d.ear_level
    f = st.f
    adj = gex.full.adj
    skip = {VIRTUAL_ROOT, VIRTUAL_M1, gex.mu2}
    for v in sorted(gex.full.nodes):
        if v in skip:
            continue
        if not any(g[w] > g[v] for w in adj[v]):
            problems.append(f"{v}: no neighbor with higher ear level")
        if not any(f[w] < f[v] and g[w] <= g[v] for w in adj[v]):
            problems.append(f"{v}: no lower-f neighbor within ear level")
        if not any(f[w] > f[v] and g[w] <= g[v] for w in adj[v]):
            problems.append(f"{v}: no higher-f neighbor within ear level")
    return problems
