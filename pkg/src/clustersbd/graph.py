"""Network data model, edge-list I/O, and planted-partition generators."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Network",
    "EdgeParam",
    "EdgeListError",
    "PlantedInfeasibleError",
    "load_edge_list",
    "save_edge_list",
    "network_to_json",
    "network_from_json",
    "largest_connected_component",
    "unweighted_copy",
    "generate_planted",
]


class EdgeListError(ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PlantedInfeasibleError(ValueError):
    """Planted-partition spec cannot be realized; names the violated constraint."""


@dataclass(frozen=True)
class Network:
    """Undirected weighted network: symmetric adjacency, zero diagonal.

    Immutable after construction; the adjacency array is flagged read-only so
    instances can be shared across threads.
    """

    adjacency: np.ndarray
    node_labels: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        n = a.shape[0]
        if n < 1:
            raise ValueError("network needs at least one node")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be exactly symmetric")
        if np.any(np.diagonal(a) != 0.0):
            raise ValueError("self-loops are not allowed (nonzero diagonal)")
        labels = tuple(self.node_labels) or tuple(str(i + 1) for i in range(n))
        if len(labels) != n:
            raise ValueError("need one label per node")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "node_labels", labels)

    @property
    def n_nodes(self):
        return self.adjacency.shape[0]

    @property
    def n_edges(self):
        return int(np.count_nonzero(np.triu(self.adjacency, k=1)))

    def edges(self):
        """Edges as (i, j, w) with i < j, ascending."""
        iu, ju = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in zip(iu, ju)]


@dataclass(frozen=True)
class EdgeParam:
    """A named weight parameter attached to one unordered node pair."""

    edge: tuple
    name: str
    value: float = 1.0

    def __post_init__(self):
        i, j = self.edge
        if i == j:
            raise ValueError(f"parameter {self.name!r}: self-loop edge ({i}, {j})")
        object.__setattr__(self, "edge", (min(i, j), max(i, j)))


def _read_text(source):
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    return source


def load_edge_list(source, indexing_base=1, weighted=False):
    """Parse the plain edge-list dialect into a Network.

    Each non-comment line is ``u v`` (or ``u v w`` when ``weighted``); ``#``
    starts a comment. A ``# N=<int>`` comment declares the node count so that
    trailing isolated nodes survive a round trip. Duplicate edges and
    self-loops are rejected.
    """
    if indexing_base not in (0, 1):
        raise ValueError("indexing_base must be 0 or 1")
    text = _read_text(source)

    declared_n = None
    edges = {}
    max_idx = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("#")
        comment = comment.strip()
        if comment.startswith("N="):
            try:
                declared_n = int(comment[2:].strip())
            except ValueError:
                raise EdgeListError(f"bad node-count header {comment!r}", lineno)
        tokens = line.split()
        if not tokens:
            continue
        if weighted:
            if len(tokens) not in (2, 3):
                raise EdgeListError(f"expected 'u v' or 'u v w', got {raw!r}", lineno)
        elif len(tokens) != 2:
            raise EdgeListError(f"expected 'u v', got {raw!r}", lineno)
        try:
            u = int(tokens[0]) - indexing_base
            v = int(tokens[1]) - indexing_base
        except ValueError:
            raise EdgeListError(f"non-integer node index in {raw!r}", lineno)
        if u < 0 or v < 0:
            raise EdgeListError(f"node index below base {indexing_base}", lineno)
        w = 1.0
        if len(tokens) == 3:
            try:
                w = float(tokens[2])
            except ValueError:
                raise EdgeListError(f"non-numeric weight in {raw!r}", lineno)
        if u == v:
            raise EdgeListError(f"self-loop on node {tokens[0]}", lineno)
        key = (min(u, v), max(u, v))
        if key in edges:
            prev = edges[key]
            if prev != w:
                raise EdgeListError(
                    f"duplicate edge {key} with conflicting weight {prev} vs {w}", lineno
                )
            raise EdgeListError(f"duplicate edge {key}", lineno)
        edges[key] = w
        max_idx = max(max_idx, u, v)

    n = max_idx + 1
    if declared_n is not None:
        if declared_n < n:
            raise EdgeListError(f"header N={declared_n} smaller than max node index")
        n = declared_n
    if n < 1:
        raise EdgeListError("empty edge list and no N= header")

    a = np.zeros((n, n))
    for (u, v), w in edges.items():
        a[u, v] = w
        a[v, u] = w
    labels = tuple(str(i + indexing_base) for i in range(n))
    return Network(a, labels)


def save_edge_list(net, indexing_base=1):
    """Serialize a Network in the same dialect ``load_edge_list`` reads.

    Weights are printed with ``repr`` so load->save->load is the identity.
    """
    lines = [f"# N={net.n_nodes}"]
    weighted = any(w != 1.0 for _, _, w in net.edges())
    for i, j, w in net.edges():
        u, v = i + indexing_base, j + indexing_base
        lines.append(f"{u} {v} {w!r}" if weighted else f"{u} {v}")
    return "\n".join(lines) + "\n"


def network_to_json(net):
    """JSON form: 0-based, each edge once with i < j."""
    return {
        "n": net.n_nodes,
        "labels": list(net.node_labels),
        "edges": [[i, j, w] for i, j, w in net.edges()],
    }


def network_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    n = int(obj["n"])
    a = np.zeros((n, n))
    for i, j, w in obj["edges"]:
        a[i, j] = w
        a[j, i] = w
    return Network(a, tuple(obj.get("labels") or ()))


def _components(adj):
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        comps.append(sorted(comp))
    return comps


def largest_connected_component(net):
    """Node-induced subnetwork on the largest component.

    Ties go to the component whose smallest original node index is smallest;
    node labels are preserved.
    """
    comps = _components(net.adjacency)
    best = max(comps, key=lambda c: (len(c), -min(c)))
    idx = np.array(best)
    a = net.adjacency[np.ix_(idx, idx)]
    labels = tuple(net.node_labels[i] for i in best)
    return Network(a, labels)


def is_connected(net):
    return len(_components(net.adjacency)) == 1


def unweighted_copy(net):
    """Strip weights: every edge becomes weight 1."""
    a = (net.adjacency != 0).astype(float)
    return Network(a, net.node_labels)


def _pair_stubs(stubs_a, stubs_b, rng, taken):
    """One randomized attempt at a simple bipartite placement; None on clash."""
    order = rng.permutation(len(stubs_b))
    pairs = set()
    for s_a, k in zip(stubs_a, order):
        e = (s_a, stubs_b[k])
        if e in pairs or e in taken:
            return None
        pairs.add(e)
    return pairs


def _regular_attempt(nodes, degree, rng):
    """One configuration-model attempt at a simple d-regular graph; None on clash."""
    stubs = np.repeat(nodes, degree)
    stubs = stubs[rng.permutation(len(stubs))]
    pairs = set()
    for u, v in zip(stubs[0::2], stubs[1::2]):
        u, v = int(u), int(v)
        if u == v:
            return None
        e = (min(u, v), max(u, v))
        if e in pairs:
            return None
        pairs.add(e)
    return pairs


def generate_planted(sizes, quotient_degrees, seed, max_retries=100):
    """Random simple network where every node of cell k has exactly
    ``quotient_degrees[k][l]`` neighbors in cell l.

    Returns ``(Network, Partition)``; the partition is equitable by
    construction with quotient matrix equal to ``quotient_degrees``.
    Deterministic per seed.
    """
    sizes = [int(s) for s in sizes]
    d = np.asarray(quotient_degrees, dtype=int)
    c = len(sizes)
    if d.shape != (c, c):
        raise PlantedInfeasibleError("quotient_degrees must be CxC")
    if any(s < 1 for s in sizes):
        raise PlantedInfeasibleError("cell sizes must be positive")
    if np.any(d < 0):
        raise PlantedInfeasibleError("quotient degrees must be nonnegative")
    for k in range(c):
        if d[k, k] > sizes[k] - 1:
            raise PlantedInfeasibleError(
                f"d[{k}][{k}]={d[k, k]} exceeds n_{k}-1={sizes[k] - 1}"
            )
        if (sizes[k] * d[k, k]) % 2 != 0:
            raise PlantedInfeasibleError(
                f"n_{k}*d[{k}][{k}]={sizes[k] * d[k, k]} must be even"
            )
        for l in range(c):
            if k == l:
                continue
            if d[k, l] > sizes[l]:
                raise PlantedInfeasibleError(
                    f"d[{k}][{l}]={d[k, l]} exceeds n_{l}={sizes[l]}"
                )
            if sizes[k] * d[k, l] != sizes[l] * d[l, k]:
                raise PlantedInfeasibleError(
                    f"edge-count inconsistency: n_{k}*d[{k}][{l}]={sizes[k] * d[k, l]}"
                    f" != n_{l}*d[{l}][{k}]={sizes[l] * d[l, k]}"
                )

    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = offsets[-1]
    rng = np.random.default_rng(seed)
    a = np.zeros((n, n))

    for k in range(c):
        nodes_k = np.arange(offsets[k], offsets[k + 1])
        if d[k, k] > 0:
            pairs = None
            for _ in range(max_retries):
                pairs = _regular_attempt(nodes_k, d[k, k], rng)
                if pairs is not None:
                    break
            if pairs is None:
                raise PlantedInfeasibleError(
                    f"could not realize d[{k}][{k}]={d[k, k]} on cell {k} "
                    f"after {max_retries} retries"
                )
            for u, v in pairs:
                a[u, v] = a[v, u] = 1.0
        for l in range(k + 1, c):
            if d[k, l] == 0:
                continue
            nodes_l = np.arange(offsets[l], offsets[l + 1])
            stubs_k = np.repeat(nodes_k, d[k, l])
            stubs_l = np.repeat(nodes_l, d[l, k])
            pairs = None
            for _ in range(max_retries):
                pairs = _pair_stubs(stubs_k, stubs_l, rng, frozenset())
                if pairs is not None:
                    break
            if pairs is None:
                raise PlantedInfeasibleError(
                    f"could not realize bipartite block ({k},{l}) "
                    f"after {max_retries} retries"
                )
            for u, v in pairs:
                a[u, v] = a[v, u] = 1.0

    net = Network(a)
    cells = tuple(
        tuple(range(offsets[k], offsets[k + 1])) for k in range(c)
    )
    from .partition import partition_from_cells

    return net, partition_from_cells(net, cells)
