#!/usr/bin/env python3
"""Derive the bundled gallery networks by constrained search.

Each gallery entry must satisfy a documented list of structural facts
(cluster counts of the coarsest equitable and automorphism-orbit partitions,
canonical block sizes, sensitivity disjointness). This script finds the
deterministically-first network meeting each list and prints frozen edge
lists for gallery.py. Run from the repo root:

    python3 tools/derive_gallery.py
"""

import itertools
import math
import sys

import numpy as np

from clustersbd.graph import Network, generate_planted, is_connected
from clustersbd.partition import (
    coarsest_equitable_partition,
    partition_from_cells,
)
from clustersbd.transform import canonical_pipeline, verify_canonical


def cell_preserving_orbits(a, cells):
    """Orbit cells of the automorphism group; automorphisms preserve the
    coarsest equitable partition, so only within-cell images are tried."""
    n = a.shape[0]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    total = 1
    for cell in cells:
        total *= math.factorial(len(cell))
        if total > 5_000_000:
            raise RuntimeError("orbit enumeration too large")

    perm = np.empty(n, dtype=int)
    for combo in itertools.product(*[itertools.permutations(c) for c in cells]):
        for cell, image in zip(cells, combo):
            perm[list(cell)] = image
        if np.array_equal(a[np.ix_(perm, perm)], a):
            for i in range(n):
                union(i, int(perm[i]))
    orbits = {}
    for i in range(n):
        orbits.setdefault(find(i), []).append(i)
    return sorted((tuple(sorted(v)) for v in orbits.values()), key=lambda c: c[0])


def labeled_regular_graphs(nodes, d):
    """All labeled d-regular edge sets on the given nodes (small n only)."""
    nodes = list(nodes)
    n = len(nodes)
    if d == 0:
        yield frozenset()
        return
    if (n * d) % 2 or d > n - 1:
        return

    def rec(deg, edges, start):
        pending = [v for v in range(n) if deg[v] < d]
        if not pending:
            yield frozenset(edges)
            return
        u = pending[0]
        need = d - deg[u]
        cands = [v for v in pending[1:] if (u, v) not in edges]
        for pick in itertools.combinations(cands, need):
            for v in pick:
                deg[u] += 1
                deg[v] += 1
            new = edges | {(u, v) for v in pick}
            yield from rec(deg, new, u + 1)
            for v in pick:
                deg[u] -= 1
                deg[v] -= 1

    for e in rec([0] * n, set(), 0):
        yield frozenset((nodes[a], nodes[b]) for a, b in e)


def biregular_matrices(n1, n2, r):
    """0-1 matrices with all row sums r and column sums n1*r/n2."""
    if (n1 * r) % n2:
        return
    c = n1 * r // n2
    if r > n2 or c > n1:
        return

    def rec(rows, colsum):
        i = len(rows)
        if i == n1:
            if all(s == c for s in colsum):
                yield tuple(rows)
            return
        remaining = n1 - i
        for pick in itertools.combinations(range(n2), r):
            ok = True
            for j in pick:
                if colsum[j] + 1 > c:
                    ok = False
                    break
            if not ok:
                continue
            # prune: every column must still be fillable
            if any(c - colsum[j] - (1 if j in pick else 0) > remaining - 1
                   for j in range(n2)):
                continue
            for j in pick:
                colsum[j] += 1
            yield from rec(rows + [pick], colsum)
            for j in pick:
                colsum[j] -= 1

    yield from rec([], [0] * n2)


def assemble(n1, n2, e11, e22, mat):
    n = n1 + n2
    a = np.zeros((n, n))
    for u, v in e11:
        a[u, v] = a[v, u] = 1.0
    for u, v in e22:
        a[u, v] = a[v, u] = 1.0
    for i, row in enumerate(mat):
        for j in row:
            a[i, n1 + j] = a[n1 + j, i] = 1.0
    return a


def find_eight_node():
    """8 nodes: coarsest equitable C=2, orbit partition C=3, canonical
    blocks {1,1,1,2,3} with the size-2 block parallel; with the orbit
    partition the parallel blocks total 3 and verification passes."""
    for n1 in range(1, 8):
        n2 = 8 - n1
        for d11 in range(0, n1):
            for d22 in range(0, n2):
                for d12 in range(0, n2 + 1):
                    if (n1 * d12) % max(n2, 1):
                        continue
                    d21 = n1 * d12 // n2
                    if d21 > n1:
                        continue
                    for e11 in labeled_regular_graphs(range(n1), d11):
                        for e22 in labeled_regular_graphs(range(n1, 8), d22):
                            for mat in biregular_matrices(n1, n2, d12) or []:
                                a = assemble(n1, n2, e11, e22, mat)
                                net = Network(a)
                                if not is_connected(net):
                                    continue
                                part = coarsest_equitable_partition(net)
                                want = (tuple(range(n1)), tuple(range(n1, 8)))
                                if part.cells != want:
                                    continue
                                orbits = cell_preserving_orbits(a, part.cells)
                                if len(orbits) != 3:
                                    continue
                                _, ind, _, _, ct = canonical_pipeline(net, seed=0)
                                if tuple(sorted(ct.block_sizes)) != (1, 1, 1, 2, 3):
                                    continue
                                par = [s for s, c in zip(ct.block_sizes, ct.block_class)
                                       if c == "parallel"]
                                if par != [2]:
                                    continue
                                opart = partition_from_cells(net, orbits)
                                _, oind, _, _, oct_ = canonical_pipeline(net, part=opart, seed=0)
                                rep = verify_canonical(oct_, oind)
                                if not rep.passed or rep.parallel_total != 3:
                                    continue
                                return net, orbits, ct, oct_
    raise RuntimeError("no 8-node hit")


def find_six_node():
    """6 nodes: coarsest equitable C=3 equal to the orbit partition."""
    import networkx as nx

    for g in nx.graph_atlas_g():
        if g.number_of_nodes() != 6 or not nx.is_connected(g):
            continue
        a = nx.to_numpy_array(g, nodelist=sorted(g.nodes()))
        net = Network(a)
        part = coarsest_equitable_partition(net)
        if part.n_cells != 3:
            continue
        orbits = cell_preserving_orbits(a, part.cells)
        if tuple(orbits) != part.cells:
            continue
        _, ind, _, _, ct = canonical_pipeline(net, seed=0)
        rep = verify_canonical(ct, ind)
        if not rep.passed:
            continue
        return net, ct
    raise RuntimeError("no 6-node hit")


def find_ten_node():
    """10 nodes: coarsest equitable C=2, orbit partition C=3."""
    rng = np.random.default_rng(20240801)
    for trial in range(200000):
        n1 = int(rng.integers(3, 8))
        n2 = 10 - n1
        d11 = int(rng.integers(0, min(4, n1)))
        if (n1 * d11) % 2:
            continue
        d22 = int(rng.integers(0, min(4, n2)))
        if (n2 * d22) % 2:
            continue
        d12 = int(rng.integers(1, n2 + 1))
        if (n1 * d12) % n2:
            continue
        if n1 * d12 // n2 > n1:
            continue
        d = [[d11, d12], [n1 * d12 // n2, d22]]
        seed = int(rng.integers(0, 2**31))
        try:
            net, part = generate_planted([n1, n2], d, seed=seed)
        except Exception:
            continue
        if not is_connected(net):
            continue
        coarse = coarsest_equitable_partition(net)
        if coarse.cells != part.cells:
            continue
        orbits = cell_preserving_orbits(np.asarray(net.adjacency), coarse.cells)
        if len(orbits) != 3:
            continue
        try:
            _, ind, _, _, ct = canonical_pipeline(net, seed=0)
        except Exception:
            continue
        if not verify_canonical(ct, ind).passed:
            continue
        opart = partition_from_cells(net, orbits)
        try:
            _, oind, _, _, oct_ = canonical_pipeline(net, part=opart, seed=0)
        except Exception:
            continue
        if not verify_canonical(oct_, oind).passed:
            continue
        return net, orbits, ct, oct_, trial
    raise RuntimeError("no 10-node hit")


def edges_of(net):
    return sorted((i, j) for i, j, _ in net.edges())


def main():
    print("== six node ==")
    net6, ct6 = find_six_node()
    print("edges:", edges_of(net6))
    print("cells:", coarsest_equitable_partition(net6).cells)
    print("blocks:", ct6.block_sizes, ct6.block_class)

    print("== eight node ==")
    net8, orbits8, ct8, oct8 = find_eight_node()
    print("edges:", edges_of(net8))
    print("cells:", coarsest_equitable_partition(net8).cells)
    print("orbits:", orbits8)
    print("blocks coarse:", ct8.block_sizes, ct8.block_class)
    print("blocks orbital:", oct8.block_sizes, oct8.block_class)

    print("== ten node ==")
    net10, orbits10, ct10, oct10, trial = find_ten_node()
    print("trial:", trial)
    print("edges:", edges_of(net10))
    print("cells:", coarsest_equitable_partition(net10).cells)
    print("orbits:", orbits10)
    print("blocks coarse:", ct10.block_sizes, ct10.block_class)
    print("blocks orbital:", oct10.block_sizes, oct10.block_class)


if __name__ == "__main__":
    sys.exit(main())
