"""Random-graph campaigns: generate, place monitors, identify, verify, time.

Three sparse families are supported: Erdos-Renyi link probability, random
geometric discs in the unit square, and preferential attachment.  Monitor
placement is a greedy substitute for an optimal placement algorithm: it
starts from the two lowest-degree nodes and repeatedly monitors the node
that covers the most currently-unprotected 2-cuts, until the extended graph
passes the 3-connectivity gate.

All randomness is derived from (campaign seed, spec index, instance index)
with a keyed hash, so non-timing outputs are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import GenerationExhausted, GraphError, LinktomoError
from .graph import Graph, build_graph, build_extended_graph, extended_gate, is_connected, iter_blind_pieces
from .harness import run_harness
from .paths import build_pipeline
from .solver import dense_solve, simulate_measurements, structured_solve

_MAX_RETRIES = 100

FAMILIES = ("er", "rg", "ba")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str  # er | rg | ba
    nodes: int
    param: float  # er: link probability, rg: connection radius, ba: links per arrival
    seed: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        if self.nodes < 2:
            raise GraphError("need at least 2 nodes")
        if self.family == "er" and not 0.0 < self.param < 1.0:
            raise GraphError("er probability must be in (0,1)")
        if self.family == "rg" and not 0.0 < self.param < math.sqrt(2.0):
            raise GraphError("rg radius must be in (0, sqrt(2))")
        if self.family == "ba" and (self.param < 1 or self.param != int(self.param)):
            raise GraphError("ba attachment count must be a positive integer")


def derive_seed(*parts) -> int:
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _node_names(m: int) -> list[str]:
    width = max(3, len(str(m - 1)))
    return [f"n{i:0{width}d}" for i in range(m)]


def generate(spec: GeneratorSpec) -> Graph:
    """Connected instance of the family; bounded retries, seed-deterministic."""
    for attempt in range(_MAX_RETRIES):
        rng = random.Random(derive_seed("gen", spec.family, spec.nodes, spec.param, spec.seed, attempt))
        if spec.family == "er":
            g = _gen_er(spec.nodes, spec.param, rng)
        elif spec.family == "rg":
            g = _gen_rg(spec.nodes, spec.param, rng)
        else:
            g = _gen_ba(spec.nodes, int(spec.param), rng)
        if is_connected(g):
            return g
    raise GenerationExhausted(
        f"{spec.family}({spec.nodes}, {spec.param}) not connected after {_MAX_RETRIES} tries"
    )


def _gen_er(m: int, p: float, rng: random.Random) -> Graph:
    names = _node_names(m)
    links = []
    for i in range(m):
        for j in range(i + 1, m):
            if rng.random() < p:
                links.append((names[i], names[j]))
    return build_graph(names, links)


def _gen_rg(m: int, radius: float, rng: random.Random) -> Graph:
    names = _node_names(m)
    pos = {x: (rng.random(), rng.random()) for x in names}
    r2 = radius * radius
    links = []
    for i in range(m):
        xi, yi = pos[names[i]]
        for j in range(i + 1, m):
            xj, yj = pos[names[j]]
            if (xi - xj) ** 2 + (yi - yj) ** 2 <= r2:
                links.append((names[i], names[j]))
    return build_graph(names, links)


def _gen_ba(m: int, rho: int, rng: random.Random) -> Graph:
    if m < rho + 1:
        raise GraphError(f"ba needs at least {rho + 1} nodes")
    names = _node_names(m)
    links = []
    targets: list[str] = []  # degree-weighted pool
    seed_clique = names[: rho + 1]
    for i, u in enumerate(seed_clique):
        for v in seed_clique[i + 1 :]:
            links.append((u, v))
            targets.extend((u, v))
    for u in names[rho + 1 :]:
        chosen: set[str] = set()
        while len(chosen) < rho:
            chosen.add(rng.choice(targets))
        for v in sorted(chosen):
            links.append((u, v))
            targets.extend((u, v))
    return build_graph(names, links)


def place_monitors(g: Graph, max_monitors: int | None = None) -> tuple[list[str], bool]:
    """Greedy 2-cut-covering placement; returns (monitors, gate passed)."""
    limit = g.m if max_monitors is None else min(max_monitors, g.m)
    monitors = sorted(sorted(g.nodes, key=lambda x: (g.degree(x), x))[:2])
    monitor_set = set(monitors)
    while True:
        pieces = list(iter_blind_pieces(g, frozenset(monitor_set)))
        if not pieces:
            return sorted(monitor_set), True
        if len(monitor_set) >= limit:
            return sorted(monitor_set), extended_gate(g, frozenset(monitor_set))
        score: dict[str, int] = {}
        for piece in pieces:
            for x in piece:
                score[x] = score.get(x, 0) + 1
        best = min(score, key=lambda x: (-score[x], x))
        monitor_set.add(best)


def place_monitors_random(g: Graph, kappa: int, seed: int) -> tuple[list[str], bool]:
    """Fixed-size random placement for sweeps; the gate may fail."""
    rng = random.Random(derive_seed("placement", seed))
    kappa = max(2, min(kappa, g.m))
    monitors = sorted(rng.sample(sorted(g.nodes), kappa))
    return monitors, extended_gate(g, frozenset(monitors))


@dataclass
class InstanceResult:
    family: str
    index: int
    seed: int
    m: int
    n: int
    kappa: int
    gate: bool
    ident_fraction: float = 0.0
    max_rel_err: float | None = None
    paths: int = 0
    h_mean: float | None = None
    t_construct_ms: float | None = None
    t_structured_ms: float | None = None
    t_dense_ms: float | None = None
    harness_ok: bool | None = None
    harness_violations: tuple[str, ...] = ()
    error: str | None = None


@dataclass
class EvaluationRecord:
    family: str
    instances: int
    n_bar: float
    m: int
    kappa_bar: float
    gate_rate: float
    ident_fraction: float
    t_construct_ms: float
    t_structured_ms: float
    t_dense_ms: float
    h_bar: float

    CSV_HEADER = (
        "family,instances,n_bar,m,kappa_bar,gate_rate,ident_fraction,"
        "t_construct_ms,t_structured_ms,t_dense_ms,h_bar"
    )

    def csv_row(self) -> str:
        return (
            f"{self.family},{self.instances},{self.n_bar:.6f},{self.m},"
            f"{self.kappa_bar:.6f},{self.gate_rate:.6f},{self.ident_fraction:.6f},"
            f"{self.t_construct_ms:.3f},{self.t_structured_ms:.3f},"
            f"{self.t_dense_ms:.3f},{self.h_bar:.6f}"
        )


def _median_time(fn, repeats: int):
    times = []
    result = None
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        result = fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times), result


def run_instance(
    spec: GeneratorSpec,
    index: int,
    campaign_seed: int,
    repeats: int = 3,
    placement: str = "greedy",
    kappa: int | None = None,
) -> InstanceResult:
    iseed = derive_seed("instance", campaign_seed, spec.family, spec.nodes, spec.param, index)
    inst_spec = GeneratorSpec(spec.family, spec.nodes, spec.param, iseed)
    g = generate(inst_spec)
    if placement == "random":
        monitors, gate = place_monitors_random(g, kappa or 3, iseed)
    else:
        monitors, gate = place_monitors(g)
    out = InstanceResult(
        family=spec.family,
        index=index,
        seed=iseed,
        m=g.m,
        n=g.n,
        kappa=len(monitors),
        gate=gate,
    )
    if not gate:
        return out
    try:
        gex = build_extended_graph(g, monitors)
        t_construct, pipe = _median_time(lambda: build_pipeline(gex, check_rank=False), repeats)
        rng = random.Random(derive_seed("metrics", iseed))
        truth = {link: rng.uniform(1.0, 10.0) for link in g.links}
        measurements = simulate_measurements(pipe.paths, truth)
        t_structured, recovered = _median_time(
            lambda: structured_solve(pipe.trees, pipe.paths, measurements), repeats
        )
        t_dense, _dense = _median_time(lambda: dense_solve(pipe.paths, measurements), repeats)
        max_rel = max(
            abs(recovered[l] - truth[l]) / abs(truth[l]) for l in g.links
        )
        harness = run_harness(pipe)
        out.ident_fraction = len(recovered) / g.n
        out.max_rel_err = max_rel
        out.paths = len(pipe.paths)
        out.h_mean = statistics.fmean(p.hops for p in pipe.paths)
        out.t_construct_ms = t_construct
        out.t_structured_ms = t_structured
        out.t_dense_ms = t_dense
        out.harness_ok = harness.ok
        out.harness_violations = tuple(harness.violations)
    except LinktomoError as exc:
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def _run_instance_task(args):
    return run_instance(*args)


def run_campaign(
    specs: list[GeneratorSpec],
    instances_per_spec: int,
    seed: int,
    repeats: int = 3,
    jobs: int = 1,
    placement: str = "greedy",
    kappa: int | None = None,
) -> tuple[list[EvaluationRecord], list[InstanceResult]]:
    tasks = [
        (spec, index, seed, repeats, placement, kappa)
        for spec in specs
        for index in range(instances_per_spec)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_instance_task, tasks))
    else:
        results = [run_instance(*t) for t in tasks]

    records = []
    offset = 0
    for spec in specs:
        chunk = results[offset : offset + instances_per_spec]
        offset += instances_per_spec
        gated = [r for r in chunk if r.gate and r.error is None]
        records.append(
            EvaluationRecord(
                family=spec.family,
                instances=len(chunk),
                n_bar=statistics.fmean(r.n for r in chunk),
                m=spec.nodes,
                kappa_bar=statistics.fmean(r.kappa for r in chunk),
                gate_rate=sum(1 for r in chunk if r.gate) / len(chunk),
                ident_fraction=(
                    statistics.fmean(r.ident_fraction for r in gated) if gated else 0.0
                ),
                t_construct_ms=(
                    statistics.fmean(r.t_construct_ms for r in gated) if gated else 0.0
                ),
                t_structured_ms=(
                    statistics.fmean(r.t_structured_ms for r in gated) if gated else 0.0
                ),
                t_dense_ms=(
                    statistics.fmean(r.t_dense_ms for r in gated) if gated else 0.0
                ),
                h_bar=statistics.fmean(r.h_mean for r in gated) if gated else 0.0,
            )
        )
    return records, results


def records_to_csv(records: list[EvaluationRecord]) -> str:
    buf = io.StringIO()
    buf.write(EvaluationRecord.CSV_HEADER + "\n")
    for rec in records:
        buf.write(rec.csv_row() + "\n")
    return buf.getvalue()


def csv_without_timings(csv_text: str) -> str:
    """Strip the timing columns (for determinism comparisons)."""
    out_rows = []
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader)
    drop = {i for i, name in enumerate(header) if name.startswith("t_")}
    keep = [i for i in range(len(header)) if i not in drop]
    out_rows.append([header[i] for i in keep])
    for row in reader:
        out_rows.append([row[i] for i in keep])
    return "\n".join(",".join(r) for r in out_rows) + "\n"
