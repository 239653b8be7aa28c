"""Small bundled networks with known equitable structure.

Each entry documents the structural facts it is required to satisfy; the
test suite re-derives all of them from scratch. Edge lists use 0-based
indices; node labels are the 1-based strings. ``tools/derive_gallery.py``
reproduces the constrained searches that produced the larger entries.
"""

from __future__ import annotations

import numpy as np

from .graph import Network

__all__ = [
    "four_node",
    "path3",
    "eight_node",
    "eight_node_orbital_cells",
    "six_node",
    "ten_node",
    "ten_node_orbital_cells",
    "eleven_node",
    "ELEVEN_NODE_PARAM_EDGES",
]


def _net(n, edges):
    a = np.zeros((n, n))
    for i, j in edges:
        a[i, j] = a[j, i] = 1.0
    return Network(a, tuple(str(i + 1) for i in range(n)))


def four_node():
    """4 nodes, edges 1-4, 2-3, 3-4 (1-based).

    Coarsest equitable partition {1,2},{3,4}; quotient [[0,1],[1,1]];
    canonical blocks of sizes {2,2}, the parallel pair spanned by
    (x1+x2)/sqrt(2), (x3+x4)/sqrt(2)."""
    return _net(4, [(0, 3), (1, 2), (2, 3)])


def path3():
    """Path 1-2-3. Coarsest equitable partition {1,3},{2}; commutant
    dimension 3; canonical blocks [2, 1]."""
    return _net(3, [(0, 1), (1, 2)])


# --- Entries below are frozen outputs of tools/derive_gallery.py. ---

_EIGHT_NODE_EDGES = None  # filled by derivation
_EIGHT_NODE_ORBITAL = None
_SIX_NODE_EDGES = None
_TEN_NODE_EDGES = None
_TEN_NODE_ORBITAL = None
_ELEVEN_NODE_EDGES = None

ELEVEN_NODE_PARAM_EDGES = {"q1": (0, 7), "q2": (4, 9)}


def eight_node():
    """8 nodes; coarsest equitable partition has 2 cells, the automorphism
    orbit partition has 3; canonical blocks with the coarsest partition have
    sizes {2,3,1,1,1} with the 2-block parallel."""
    return _net(8, _EIGHT_NODE_EDGES)


def eight_node_orbital_cells():
    """Orbit partition of eight_node() as raw cells (3 cells)."""
    return _EIGHT_NODE_ORBITAL


def six_node():
    """6 nodes, 3 equitable clusters; orbit partition coincides with the
    coarsest equitable partition."""
    return _net(6, _SIX_NODE_EDGES)


def ten_node():
    """10 nodes; coarsest equitable partition has 2 cells while the orbit
    partition has 3 (equitable strictly coarser than orbital)."""
    return _net(10, _TEN_NODE_EDGES)


def ten_node_orbital_cells():
    """Orbit partition of ten_node() as raw cells (3 cells)."""
    return _TEN_NODE_ORBITAL


def eleven_node():
    """11 nodes with weight parameters q1 on edge (1,8) and q2 on edge
    (5,10) (1-based). Under the canonical transform the 2-dimensional
    transverse block has disjoint nonempty entry sets affected by q1 and
    q2."""
    return _net(11, _ELEVEN_NODE_EDGES)
