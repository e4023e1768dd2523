"""Spiking-hierarchy construction and verification.

Primary neurons initiate the inter-burst: they combine a high initial
potential with a near-zero coupled-vs-uncoupled time difference. Layers
follow breadth-first from the primary set over the coupling topology, and
the spiking propagation graph keeps only edges between adjacent layers.
Within a layer, spiking order is predicted from the stimulus count dr
(in-edges from the layer above, more first), then the topology degree d
(fewer first, among neurons with effectively the same stimuli), then the
mean upstream first-spike time (earlier stimuli first); anything still tied
is predicted to co-spike.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidParameterError, NoPrimaryError
from .metrics import TAU_SAME, LockedPhase
from .network import NetworkRun
from .topology import Topology

TAU_PRIMARY = 0.1  # |TD| gate for primary detection (ms)
V_GAP = 1.5        # max drop (mV) between consecutive co-initiator potentials;
                   # worked cases put co-initiators within 1.1 mV of each other
                   # and driven runners-up at least 2 mV below
TAU_ORDER = 0.5    # precedence slack for order checks (ms); differences below
                   # this read as simultaneous at raster resolution, an order
                   # of magnitude under the inter-group spacing of locked bursts


@dataclass(frozen=True)
class PropagationGraph:
    """Layered directed graph of spiking propagation.

    ``layers[0]`` is the primary set; every directed edge spans exactly
    adjacent layers. ``dr`` maps each non-primary neuron to its count of
    in-edges from the layer above (absent for primaries); ``d`` holds the
    undirected topology degree of every neuron.
    """

    layers: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    dr: dict[int, int]
    d: dict[int, int]
    layer_of: dict[int, int] = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "layer_of",
            {v: m for m, layer in enumerate(self.layers) for v in layer})
        for u, v in self.edges:
            if self.layer_of[v] != self.layer_of[u] + 1:
                raise InvalidParameterError(
                    f"edge {u}->{v} spans layers {self.layer_of[u]}->{self.layer_of[v]}")

    @property
    def n(self) -> int:
        return len(self.layer_of)

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(u for u, x in self.edges if x == v))

    def out_neighbors(self, u: int) -> tuple[int, ...]:
        return tuple(sorted(v for x, v in self.edges if x == u))

    def to_dot(self) -> str:
        """DOT document: one rank=same subgraph per layer, dr/d as node attrs."""
        lines = ["digraph propagation {", "  rankdir=TB;"]
        for m, layer in enumerate(self.layers):
            nodes = []
            for v in layer:
                attrs = [f"layer={m}"]
                if v in self.dr:
                    attrs.append(f"dr={self.dr[v]}")
                attrs.append(f"d={self.d[v]}")
                nodes.append(f"{v} [{', '.join(attrs)}];")
            lines.append("  { rank=same; " + " ".join(nodes) + " }")
        for u, v in self.edges:
            lines.append(f"  {u} -> {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def detect_primary(initial_V, stabilized_td, tau_primary: float = TAU_PRIMARY,
                   v_gap: float = V_GAP):
    """Primary set: the high-potential prefix of network-unaffected neurons.

    Neurons are ranked by initial potential (descending, ties by index). The
    prefix extends while members satisfy |TD| < tau_primary and stay within
    ``v_gap`` mV of the previously accepted potential; it stops at the first
    gated neuron or larger potential drop. A neuron with low potential and
    TD = 0 merely follows its drivers, so the gap stop keeps it out even in
    sparse networks where its TD reads near zero.
    """
    v0 = np.asarray(initial_V, dtype=float)
    tds = np.asarray(stabilized_td, dtype=float)
    if v0.shape != tds.shape:
        raise InvalidParameterError("initial_V and stabilized_td must align")
    if not np.all(np.isfinite(tds)):
        missing = np.nonzero(~np.isfinite(tds))[0]
        raise InsufficientDataError(f"stabilized TD unavailable for neurons {missing.tolist()}")
    if tau_primary <= 0:
        raise InvalidParameterError(f"tau_primary must be > 0, got {tau_primary}")
    ranked = sorted(range(v0.size), key=lambda i: (-v0[i], i))
    primary = []
    prev_v = v0[ranked[0]]
    for i in ranked:
        if prev_v - v0[i] > v_gap:
            break
        if abs(tds[i]) < tau_primary:
            primary.append(i)
            prev_v = v0[i]
        else:
            break
    if not primary:
        top = ranked[0]
        raise NoPrimaryError(
            f"highest-potential neuron {top} has |TD| = {abs(tds[top]):.3f} ms "
            f">= {tau_primary} ms; likely a positive-TD regime")
    return tuple(sorted(primary))


def grade_layers(topology: Topology, primary) -> tuple[tuple[int, ...], ...]:
    """Breadth-first layering from the primary set over the coupling graph."""
    primary = sorted(set(primary))
    if not primary:
        raise InvalidParameterError("primary set must be non-empty")
    for p in primary:
        topology._check_index(p)
    assigned = {p: 0 for p in primary}
    layers = [list(primary)]
    frontier = list(primary)
    while frontier:
        nxt = sorted({w for u in frontier for w in topology.neighbors(u)} - assigned.keys())
        if not nxt:
            break
        for w in nxt:
            assigned[w] = len(layers)
        layers.append(nxt)
        frontier = nxt
    if len(assigned) != topology.n:
        missing = sorted(set(range(topology.n)) - assigned.keys())
        raise InvalidParameterError(
            f"neurons {missing} unreachable from the primary set (topology disconnected?)")
    return tuple(tuple(layer) for layer in layers)


def build_propagation_graph(topology: Topology, layers) -> PropagationGraph:
    """Directed edges for topology edges spanning adjacent layers; dr and d."""
    layer_of = {v: m for m, layer in enumerate(layers) for v in layer}
    if sorted(layer_of) != list(range(topology.n)):
        raise InvalidParameterError("layers must partition all neurons")
    edges = []
    for i, j in topology.edges:
        if layer_of[j] == layer_of[i] + 1:
            edges.append((i, j))
        elif layer_of[i] == layer_of[j] + 1:
            edges.append((j, i))
    edges.sort()
    dr: dict[int, int] = {}
    for _, v in edges:
        dr[v] = dr.get(v, 0) + 1
    d = {v: topology.degree(v) for v in range(topology.n)}
    return PropagationGraph(
        layers=tuple(tuple(layer) for layer in layers),
        edges=tuple(edges), dr=dr, d=d)


def _same_stimuli(graph: PropagationGraph, u: int, v: int, first_spike,
                  tau_same: float) -> bool:
    """Identical upstream sets, or upstream first-spike multisets equal
    within tau_same."""
    ups_u, ups_v = graph.in_neighbors(u), graph.in_neighbors(v)
    if ups_u == ups_v:
        return True
    if len(ups_u) != len(ups_v):
        return False
    tu = np.sort(np.asarray([first_spike[x] for x in ups_u]))
    tv = np.sort(np.asarray([first_spike[x] for x in ups_v]))
    return bool(np.all(np.abs(tu - tv) < tau_same))


def predict_order(graph: PropagationGraph, initial_V, first_spike,
                  tau_same: float = TAU_SAME):
    """Predicted within-layer spiking order, as rank groups per layer.

    ``first_spike`` holds measured first-spike times (ms) for at least every
    neuron above the last layer. Layer 0 is ordered by initial potential
    (descending). Deeper layers sort by dr (descending), then, inside each
    class of neurons with effectively the same stimuli, by degree
    (ascending); classes are ordered by mean upstream first-spike time.
    Neurons left tied form one rank group (predicted co-spiking).

    Returns a tuple over layers; each layer is a tuple of rank groups.
    """
    v0 = np.asarray(initial_V, dtype=float)
    fs = np.asarray(first_spike, dtype=float)
    result = []
    for m, layer in enumerate(graph.layers):
        if m == 0:
            keys = {v: (-v0[v],) for v in layer}
        else:
            upstream = {u for v in layer for u in graph.in_neighbors(v)}
            bad = sorted(u for u in upstream if not np.isfinite(fs[u]))
            if bad:
                raise InsufficientDataError(
                    f"missing upstream first-spike times for neurons {bad}")
            # stimulus-equivalence classes within each dr level
            parent = {v: v for v in layer}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            members = list(layer)
            for ai in range(len(members)):
                for bi in range(ai + 1, len(members)):
                    u, v = members[ai], members[bi]
                    if graph.dr[u] == graph.dr[v] and _same_stimuli(
                            graph, u, v, fs, tau_same):
                        parent[find(u)] = find(v)
            mean_up = {v: float(np.mean([fs[u] for u in graph.in_neighbors(v)]))
                       for v in layer}
            class_time = {}
            for v in layer:
                r = find(v)
                class_time[r] = min(class_time.get(r, np.inf), mean_up[v])
            keys = {v: (-graph.dr[v], class_time[find(v)], graph.d[v]) for v in layer}
        ranked = sorted(layer, key=lambda v: (keys[v], v))
        groups: list[list[int]] = []
        for v in ranked:
            if groups and keys[v] == keys[groups[-1][0]]:
                groups[-1].append(v)
            else:
                groups.append([v])
        result.append(tuple(tuple(sorted(g)) for g in groups))
    return tuple(result)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one hierarchy check: evaluated pairs and the violators."""

    passed: bool
    pairs: tuple[tuple[int, int], ...]
    violations: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class HierarchyReport:
    """Per-check verdicts of a propagation graph against a simulated burst."""

    layer_monotonicity: CheckResult
    dr_order: CheckResult
    degree_order: CheckResult
    first_spike: np.ndarray

    @property
    def all_passed(self) -> bool:
        return (self.layer_monotonicity.passed and self.dr_order.passed
                and self.degree_order.passed)

    def to_dict(self) -> dict:
        def as_dict(c: CheckResult) -> dict:
            return {"passed": c.passed,
                    "pairs_checked": len(c.pairs),
                    "violations": [list(p) for p in c.violations]}

        return {"layer_monotonicity": as_dict(self.layer_monotonicity),
                "dr_order": as_dict(self.dr_order),
                "degree_order": as_dict(self.degree_order),
                "first_spike_ms": [round(float(t), 6) for t in self.first_spike]}


def verify_hierarchy(graph: PropagationGraph, run: NetworkRun,
                     locked: LockedPhase, tau_same: float = TAU_SAME,
                     tau_order: float = TAU_ORDER) -> HierarchyReport:
    """Check the hierarchy's order predictions against a stabilized burst.

    (a) Layer monotonicity: each layer's earliest first spike precedes the
    next layer's, and every neuron precedes all its out-neighbors.
    (b) dr rule: within a layer, strictly larger dr spikes no later.
    (c) Degree rule: within a layer, under effectively the same stimuli,
    strictly smaller degree spikes no later.
    Stimulus equality uses the co-spiking tolerance ``tau_same``; precedence
    is asserted up to the coarser ``tau_order``. Pairs with different dr are
    compared only when their mean upstream first-spike times lie within
    ``tau_order`` (a neuron with more but much later stimuli is the
    confounded case left open). Violations are reported, not fatal: the
    within-layer rules are empirical tendencies.
    """
    if run.n != graph.n:
        raise InvalidParameterError("graph and run disagree on neuron count")
    fs = locked.rel_times[:, 0]
    mono_pairs, mono_bad = [], []
    for m in range(len(graph.layers) - 1):
        upper = min(fs[v] for v in graph.layers[m])
        lower = min(fs[v] for v in graph.layers[m + 1])
        mono_pairs.append((m, m + 1))
        if not upper < lower + tau_order:
            mono_bad.append((m, m + 1))
    for u, v in graph.edges:
        mono_pairs.append((u, v))
        if not fs[u] < fs[v] + tau_order:
            mono_bad.append((u, v))

    def mean_up(x):
        return float(np.mean([fs[q] for q in graph.in_neighbors(x)]))

    dr_pairs, dr_bad = [], []
    deg_pairs, deg_bad = [], []
    for layer in graph.layers[1:]:
        for i, u in enumerate(layer):
            for v in layer[i + 1:]:
                a, b = (u, v) if graph.dr[u] >= graph.dr[v] else (v, u)
                if graph.dr[a] > graph.dr[b]:
                    if abs(mean_up(a) - mean_up(b)) < tau_order:
                        dr_pairs.append((a, b))
                        if not fs[a] <= fs[b] + tau_order:
                            dr_bad.append((a, b))
                elif _same_stimuli(graph, u, v, fs, tau_same):
                    a, b = (u, v) if graph.d[u] <= graph.d[v] else (v, u)
                    if graph.d[a] < graph.d[b]:
                        deg_pairs.append((a, b))
                        if not fs[a] <= fs[b] + tau_order:
                            deg_bad.append((a, b))
    return HierarchyReport(
        layer_monotonicity=CheckResult(not mono_bad, tuple(mono_pairs), tuple(mono_bad)),
        dr_order=CheckResult(not dr_bad, tuple(dr_pairs), tuple(dr_bad)),
        degree_order=CheckResult(not deg_bad, tuple(deg_pairs), tuple(deg_bad)),
        first_spike=fs.copy())
