"""Equitable partitions: refinement, validation, indicators, quotient matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Partition",
    "IndicatorSet",
    "NotEquitableError",
    "partition_from_cells",
    "coarsest_equitable_partition",
    "check_equitable",
    "build_indicators",
    "quotient_spectrum",
    "parse_cells",
    "format_cells",
    "partition_report",
]

# Row sums into a cell are compared exactly for integer weights and to this
# relative tolerance otherwise (distinct float weights are distinct edge types).
_FLOAT_RTOL = 1e-9


class NotEquitableError(ValueError):
    """Partition fails the per-cell row-sum condition; carries a witness."""

    def __init__(self, witness):
        i, j, cell, s_i, s_j = witness
        self.witness = witness
        super().__init__(
            f"nodes {i} and {j} share a cell but receive {s_i} vs {s_j} "
            f"from cell {cell}"
        )


@dataclass(frozen=True)
class Partition:
    """Disjoint cells covering all nodes, plus the cluster-contiguous order.

    ``cells`` are sorted by their smallest original node index, nodes
    ascending within each cell. ``perm[original] = contiguous position`` and
    ``order[position] = original`` are inverse permutations.
    """

    cells: tuple
    perm: np.ndarray
    order: np.ndarray

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def sizes(self):
        return tuple(len(c) for c in self.cells)

    @property
    def n_nodes(self):
        return int(self.perm.shape[0])

    def cell_of(self):
        """Array mapping original node index -> cell index."""
        out = np.empty(self.n_nodes, dtype=int)
        for k, cell in enumerate(self.cells):
            out[list(cell)] = k
        return out


def partition_from_cells(net, cells):
    """Normalize raw cells into a Partition (no equitability check)."""
    n = net.n_nodes
    norm = [tuple(sorted(int(i) for i in cell)) for cell in cells if len(cell)]
    norm.sort(key=lambda c: c[0])
    flat = [i for cell in norm for i in cell]
    if sorted(flat) != list(range(n)):
        raise ValueError("cells must disjointly cover all nodes")
    order = np.array(flat, dtype=int)
    perm = np.empty(n, dtype=int)
    perm[order] = np.arange(n)
    for a in (perm, order):
        a.flags.writeable = False
    return Partition(tuple(norm), perm, order)


def _cell_sums(adjacency, cells):
    """M[i, k] = total edge weight from node i into cell k."""
    cols = [adjacency[:, list(cell)].sum(axis=1) for cell in cells]
    return np.stack(cols, axis=1)


def _signature_keys(sums):
    """Hashable per-node keys for splitting; exact for integer weights."""
    if np.all(sums == np.round(sums)):
        rows = sums.astype(np.int64)
        return [tuple(r) for r in rows]
    scale = max(1.0, float(np.max(np.abs(sums))))
    quant = np.round(sums / (scale * _FLOAT_RTOL)).astype(np.int64)
    return [tuple(r) for r in quant]


def coarsest_equitable_partition(net):
    """Coarsest equitable partition via color refinement from one cell.

    Cells are repeatedly split by the vector of weighted degree sums into
    every current cell, until stable; the fixed point is the unique
    coarsest equitable partition.
    """
    n = net.n_nodes
    cells = [tuple(range(n))]
    while True:
        sums = _cell_sums(net.adjacency, cells)
        keys = _signature_keys(sums)
        new_cells = []
        for cell in cells:
            groups = {}
            for i in cell:
                groups.setdefault(keys[i], []).append(i)
            # deterministic: groups ordered by smallest member
            for g in sorted(groups.values(), key=lambda g: g[0]):
                new_cells.append(tuple(g))
        if len(new_cells) == len(cells):
            break
        cells = new_cells
    return partition_from_cells(net, cells)


def check_equitable(net, cells):
    """True iff every node of cell k receives the same total weight from
    cell l, for all (k, l); on failure also return a witness
    ``(i, j, l, sum_i, sum_j)``.
    """
    flat = sorted(i for cell in cells for i in cell)
    if flat != list(range(net.n_nodes)):
        raise ValueError("cells do not form a partition of the nodes")
    cells = [tuple(sorted(c)) for c in cells]
    sums = _cell_sums(net.adjacency, cells)
    exact = np.all(sums == np.round(sums))
    for cell in cells:
        ref = sums[cell[0]]
        for i in cell[1:]:
            row = sums[i]
            if exact:
                bad = row != ref
            else:
                bad = ~np.isclose(row, ref, rtol=_FLOAT_RTOL, atol=1e-12)
            if np.any(bad):
                l = int(np.nonzero(bad)[0][0])
                return False, (cell[0], i, l, float(ref[l]), float(row[l]))
    return True, None


@dataclass(frozen=True)
class IndicatorSet:
    """Cluster indicators in cluster-contiguous node order.

    ``E`` stacks the C diagonal 0/1 indicator vectors, ``O`` is the N x C
    encoding matrix, ``Q`` the quotient matrix, ``Delta = (O^T O)^{-1/2} O^T``
    and ``adjacency`` the permuted network adjacency.
    """

    E: np.ndarray
    O: np.ndarray
    Q: np.ndarray
    Delta: np.ndarray
    adjacency: np.ndarray

    @property
    def n_cells(self):
        return self.Q.shape[0]

    @property
    def sizes(self):
        return tuple(int(s) for s in self.O.sum(axis=0))

    @property
    def n_nodes(self):
        return self.O.shape[0]


def build_indicators(net, part):
    """Indicator vectors, encoding matrix, quotient matrix and Delta for an
    equitable partition; raises NotEquitableError (with witness) otherwise.
    """
    ok, witness = check_equitable(net, part.cells)
    if not ok:
        raise NotEquitableError(witness)
    n = net.n_nodes
    c = part.n_cells
    sizes = part.sizes
    a_perm = net.adjacency[np.ix_(part.order, part.order)]

    offsets = np.concatenate([[0], np.cumsum(sizes)])
    e = np.zeros((c, n))
    o = np.zeros((n, c))
    for k in range(c):
        e[k, offsets[k]:offsets[k + 1]] = 1.0
        o[offsets[k]:offsets[k + 1], k] = 1.0

    # Q_kl = row sum from any cell-k node into cell l; mean over the cell
    # equals it and averages away roundoff for float weights.
    q = np.empty((c, c))
    for k in range(c):
        rows = a_perm[offsets[k]:offsets[k + 1]]
        for l in range(c):
            q[k, l] = rows[:, offsets[l]:offsets[l + 1]].sum(axis=1).mean()

    delta = (o / np.sqrt(np.array(sizes))).T
    for arr in (e, o, q, delta, a_perm):
        arr.flags.writeable = False
    return IndicatorSet(e, o, q, delta, a_perm)


def quotient_spectrum(ind):
    """Eigenvalues of the quotient matrix, sorted by (real, imag)."""
    vals = np.linalg.eigvals(ind.Q)
    return sorted(vals, key=lambda z: (z.real, z.imag))


def parse_cells(text, net):
    """Cells file: one line per cell, whitespace-separated node labels."""
    label_to_idx = {lab: i for i, lab in enumerate(net.node_labels)}
    cells = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.partition("#")[0].strip()
        if not line:
            continue
        cell = []
        for tok in line.split():
            if tok not in label_to_idx:
                raise ValueError(f"line {lineno}: unknown node label {tok!r}")
            cell.append(label_to_idx[tok])
        cells.append(tuple(cell))
    return cells


def format_cells(part, net):
    lines = [" ".join(net.node_labels[i] for i in cell) for cell in part.cells]
    return "\n".join(lines) + "\n"


def partition_report(part, net):
    return {
        "C": part.n_cells,
        "cells": [[net.node_labels[i] for i in cell] for cell in part.cells],
        "sizes": list(part.sizes),
    }
