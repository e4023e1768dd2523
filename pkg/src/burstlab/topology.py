"""Undirected coupling graphs: regular rings, Watts-Strogatz rewiring, edge-list I/O.

Edges are stored as sorted (i, j) pairs with i < j; the adjacency matrix is
symmetric 0/1 with no self-loops. Generators and the edge-list loader refuse
disconnected graphs (layer grading needs reachability); the plain constructor
admits edge-free topologies because uncoupled replica runs use them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import EdgeListError, InvalidParameterError


@dataclass(frozen=True)
class Topology:
    """Simple undirected graph over neurons 0..n-1."""

    n: int
    edges: tuple[tuple[int, int], ...]
    seed_used: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"need at least one neuron, got n={self.n}")
        seen = set()
        norm = []
        for i, j in self.edges:
            if i == j:
                raise InvalidParameterError(f"self-loop on neuron {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidParameterError(f"edge ({i},{j}) out of range for n={self.n}")
            e = (min(i, j), max(i, j))
            if e in seen:
                raise InvalidParameterError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def empty(cls, n: int) -> "Topology":
        """Edge-free topology (the uncoupled replica of a network)."""
        return cls(n, ())

    def neighbors(self, i: int) -> tuple[int, ...]:
        self._check_index(i)
        out = [b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i]
        return tuple(sorted(out))

    def degree(self, i: int) -> int:
        self._check_index(i)
        return sum(1 for a, b in self.edges if a == i or b == i)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in set(self.edges)

    def neighbor_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style (indptr, indices) of the adjacency, neighbors sorted."""
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indices = []
        for i in range(self.n):
            nbrs = sorted(adj[i])
            indices.extend(nbrs)
            indptr[i + 1] = indptr[i] + len(nbrs)
        return indptr, np.asarray(indices, dtype=np.int64)

    def content_hash(self) -> str:
        """SHA-1 over the canonical edge-list serialization."""
        return hashlib.sha1(serialize(self).encode()).hexdigest()

    def _check_index(self, i: int):
        if not (0 <= i < self.n):
            raise InvalidParameterError(f"neuron index {i} out of range for n={self.n}")


def degree(topology: Topology, i: int) -> int:
    """Number of edges incident to neuron ``i``."""
    return topology.degree(i)


def is_connected(topology: Topology) -> bool:
    if topology.n == 1:
        return True
    if not topology.edges:
        return False
    indptr, indices = topology.neighbor_arrays()
    seen = np.zeros(topology.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


def _ring_pairs(n: int, k: int):
    for i in range(n):
        for offset in range(1, k // 2 + 1):
            yield i, (i + offset) % n


def regular_ring(n: int, k: int) -> Topology:
    """Ring lattice: neuron i adjacent to i +- 1 .. i +- k/2 (mod n)."""
    if n < 3:
        raise InvalidParameterError(f"ring needs n >= 3, got {n}")
    if k % 2 != 0:
        raise InvalidParameterError(f"neighbor count k must be even, got {k}")
    if not (0 < k < n):
        raise InvalidParameterError(f"need 0 < k < n, got k={k}, n={n}")
    return Topology(n, tuple(_ring_pairs(n, k)))


def watts_strogatz(n: int, k: int, p: float, seed: int) -> Topology:
    """Small-world graph: ring lattice with each edge rewired with probability p.

    Edges are visited in ascending (i, offset) order; a rewired edge keeps
    endpoint i and moves the far endpoint to a uniformly drawn non-neighbor
    (self-loops and duplicates rejected by resampling). Edge count is
    preserved. Disconnected samples are discarded and the generator retries
    with seed+1, seed+2, ...; the accepted seed is recorded on the result.
    Deterministic for a given seed (PCG64 stream).
    """
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"rewiring probability must be in [0,1], got {p}")
    regular_ring(n, k)  # validate (n, k) up front
    trial_seed = int(seed)
    while True:
        topo = _ws_once(n, k, p, trial_seed)
        if is_connected(topo):
            return Topology(topo.n, topo.edges, seed_used=trial_seed)
        trial_seed += 1


def _ws_once(n: int, k: int, p: float, seed: int) -> Topology:
    rng = np.random.Generator(np.random.PCG64(seed))
    adj = np.zeros((n, n), dtype=bool)
    for i, j in _ring_pairs(n, k):
        adj[i, j] = adj[j, i] = True
    for i, j in _ring_pairs(n, k):
        if rng.random() >= p:
            continue
        if adj[i].sum() >= n - 1:
            continue  # i already adjacent to everyone else; nothing to rewire to
        while True:
            w = int(rng.integers(0, n))
            if w != i and not adj[i, w]:
                break
        adj[i, j] = adj[j, i] = False
        adj[i, w] = adj[w, i] = True
    ii, jj = np.nonzero(np.triu(adj, 1))
    return Topology(n, tuple(zip(ii.tolist(), jj.tolist())))


def serialize(topology: Topology) -> str:
    """Edge-list text: one '<i> <j>' line per edge, sorted lexicographically."""
    return "".join(f"{i} {j}\n" for i, j in topology.edges)


def load_edge_list(text: str) -> Topology:
    """Parse edge-list text ('#' comments allowed) and validate all invariants.

    Neuron count is max index + 1. Raises EdgeListError with the offending
    line number on self-loops, duplicates, malformed lines, or a
    disconnected result.
    """
    edges = []
    seen = set()
    max_idx = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"expected two indices, got {raw!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"non-integer index in {raw!r}", lineno) from None
        if i < 0 or j < 0:
            raise EdgeListError(f"negative index in {raw!r}", lineno)
        if i == j:
            raise EdgeListError(f"self-loop on neuron {i}", lineno)
        e = (min(i, j), max(i, j))
        if e in seen:
            raise EdgeListError(f"duplicate edge {e}", lineno)
        seen.add(e)
        edges.append(e)
        max_idx = max(max_idx, i, j)
    if not edges:
        raise EdgeListError("no edges found")
    topo = Topology(max_idx + 1, tuple(edges))
    if not is_connected(topo):
        raise EdgeListError("graph is disconnected")
    return topo
