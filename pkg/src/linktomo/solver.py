"""Recover link metrics from path measurements.

The structured solve inverts the construction instead of the matrix: the
three pairwise segment unions of a node give each segment weight by a
half-sum identity, tree links fall out of segment differences along the
parent chains, and every non-tree link is the single unknown on its own
path.  A dense partial-pivot elimination over the same measurements serves
as the baseline the structured solver is compared (and timed) against.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InconsistentDerivation, InvariantViolation, MissingMetric, SingularMatrix
from .graph import ExtendedGraph, Link, canonical_link
from .paths import PathKey, PathSet, Pipeline, build_pipeline, make_path, node_segments
from .trees import BLUE, GREEN, RED, TreeSet

_DERIVATION_RTOL = 1e-6


def simulate_measurements(ps: PathSet, truth: dict[Link, float]) -> dict[PathKey, float]:
    """Noiseless additive measurement of every constructed path."""
    out: dict[PathKey, float] = {}
    for path in ps:
        total = 0.0
        for link in path.key:
            if link not in truth:
                raise MissingMetric(link)
            total += truth[link]
        out[path.key] = total
    return out


def segment_weights_from_unions(c12: float, c13: float, c23: float) -> tuple[float, float, float]:
    """Weights of three segments given their pairwise union sums."""
    w1 = (c12 + c13 - c23) / 2.0
    w2 = (c12 + c23 - c13) / 2.0
    w3 = (c13 + c23 - c12) / 2.0
    return w1, w2, w3


def segment_metrics(t: TreeSet, ps: PathSet, c: dict[PathKey, float]) -> dict[tuple[str, int], float]:
    """Weight of every valid trimmed segment."""

    def lookup(nodes) -> float:
        key = make_path(nodes, "tree").key
        if key not in c:
            raise MissingMetric(key)
        return c[key]

    gex = t.gex
    out: dict[tuple[str, int], float] = {}
    for v in gex.base.nodes:
        segs = node_segments(t, v)
        if v in gex.monitor_set:
            for tree, seg in segs.items():
                if seg.valid:
                    out[(v, tree)] = lookup(seg.nodes)
            continue
        u12 = lookup(tuple(reversed(segs[BLUE].nodes)) + segs[GREEN].nodes[1:])
        u13 = lookup(tuple(reversed(segs[BLUE].nodes)) + segs[RED].nodes[1:])
        u23 = lookup(tuple(reversed(segs[GREEN].nodes)) + segs[RED].nodes[1:])
        w1, w2, w3 = segment_weights_from_unions(u12, u13, u23)
        out[(v, BLUE)], out[(v, GREEN)], out[(v, RED)] = w1, w2, w3
    return out


def tree_link_metrics(t: TreeSet, seg: dict[tuple[str, int], float]) -> dict[Link, float]:
    """Metrics of all real tree links from segment-weight differences."""
    gex = t.gex
    out: dict[Link, float] = {}
    derivations: dict[Link, list[float]] = {}
    for tree in (BLUE, GREEN, RED):
        for v, p in t.parent[tree].items():
            if gex.is_virtual_node(v) or gex.is_virtual_node(p):
                continue
            link = canonical_link(v, p)
            value = seg[(v, tree)]
            if p not in gex.monitor_set:
                value -= seg[(p, tree)]
            derivations.setdefault(link, []).append(value)
    for link in sorted(derivations):
        values = derivations[link]
        first = values[0]
        scale = max(1.0, abs(first))
        for other in values[1:]:
            if abs(other - first) > _DERIVATION_RTOL * scale:
                raise InconsistentDerivation(link, values)
        out[link] = first
    missing = set(t.real_gm_links) - set(out)
    if missing:
        raise InvariantViolation(f"tree links without a derivation: {sorted(missing)}")
    return out


def non_tree_metrics(ps: PathSet, c: dict[PathKey, float], known: dict[Link, float]) -> dict[Link, float]:
    """One subtraction per non-tree path; the embedded link is the unknown."""
    out = dict(known)
    for path in ps:
        if path.kind != "nontree":
            continue
        link = path.nontree_link
        total = c.get(path.key)
        if total is None:
            raise MissingMetric(link)
        rest = 0.0
        for other in path.key:
            if other == link:
                continue
            if other not in known:
                raise MissingMetric(other)
            rest += known[other]
        out[link] = total - rest
    return out


def structured_solve(t: TreeSet, ps: PathSet, c: dict[PathKey, float]) -> dict[Link, float]:
    seg = segment_metrics(t, ps, c)
    tree_w = tree_link_metrics(t, seg)
    return non_tree_metrics(ps, c, tree_w)


def dense_solve(ps: PathSet, c: dict[PathKey, float]) -> dict[Link, float]:
    """Baseline: float partial-pivot elimination on the full square system."""
    links = ps.link_universe()
    paths = ps.paths
    if len(paths) != len(links):
        raise SingularMatrix(f"{len(paths)} paths for {len(links)} links")
    matrix = np.zeros((len(paths), len(links)))
    index = {l: i for i, l in enumerate(links)}
    rhs = np.zeros(len(paths))
    for i, path in enumerate(paths):
        if path.key not in c:
            raise MissingMetric(path.key)
        rhs[i] = c[path.key]
        for link in path.key:
            matrix[i, index[link]] = 1.0
    x = linalg.solve_partial_pivot(matrix, rhs)
    return {link: float(x[index[link]]) for link in links}


@dataclass(frozen=True, eq=False)
class IdentifyResult:
    pipeline: Pipeline
    recovered: dict[Link, float]
    dense: dict[Link, float]
    max_rel_err: float | None
    t_structured_ms: float
    t_dense_ms: float

    @property
    def paths_used(self) -> int:
        return len(self.pipeline.paths)


def identify_all(
    gex: ExtendedGraph,
    truth: dict[Link, float] | None = None,
    measurements: dict[PathKey, float] | None = None,
    pipeline: Pipeline | None = None,
) -> IdentifyResult:
    """End to end: construct paths, measure, and solve both ways."""
    pipe = pipeline if pipeline is not None else build_pipeline(gex)
    ps = pipe.paths
    if measurements is None:
        if truth is None:
            raise MissingMetric("<ground truth>")
        missing = set(gex.base.links) - set(truth)
        if missing:
            raise MissingMetric(sorted(missing)[0])
        measurements = simulate_measurements(ps, truth)

    t0 = time.perf_counter()
    recovered = structured_solve(pipe.trees, ps, measurements)
    t_structured = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    dense = dense_solve(ps, measurements)
    t_dense = (time.perf_counter() - t0) * 1000.0

    missing = set(gex.base.links) - set(recovered)
    if missing:
        raise InvariantViolation(f"incomplete recovery: {sorted(missing)}")
    for link, value in dense.items():
        scale = max(1.0, abs(value), abs(recovered[link]))
        if abs(value - recovered[link]) > 1e-9 * scale:
            raise InvariantViolation(
                f"structured and dense solves disagree at {link}: "
                f"{recovered[link]} vs {value}"
            )

    max_rel = None
    if truth is not None:
        max_rel = 0.0
        for link, w in truth.items():
            err = abs(recovered[link] - w) / max(1e-300, abs(w))
            max_rel = max(max_rel, err)
    return IdentifyResult(
        pipeline=pipe,
        recovered=recovered,
        dense=dense,
        max_rel_err=max_rel,
        t_structured_ms=t_structured,
        t_dense_ms=t_dense,
    )
