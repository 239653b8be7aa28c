"""Edge-parameter sensitivity of the transformed adjacency.

With T held at the nominal point, dB/dq for an edge (i, j) is
T^T (e_i e_j^T + e_j e_i^T) T: a rank-2 matrix whose support shows exactly
which block entries a weight parameter reaches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Network
from .partition import check_equitable

__all__ = ["ParamSensitivity", "SensitivityReport", "sensitivity"]


@dataclass(frozen=True)
class ParamSensitivity:
    """Thresholded entries of dB/dq for one parameter.

    ``entries`` holds (block, row, col, value) with block-local upper-triangle
    indices; entries that fall outside every block carry block = None and
    global indices. ``coords`` is the set of global (u, v), u <= v, pairs.
    """

    name: str
    entries: tuple
    coords: frozenset


@dataclass(frozen=True)
class SensitivityReport:
    params: tuple
    overlaps: dict

    def by_name(self, name):
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def as_dict(self):
        return {
            "params": [
                {
                    "param": p.name,
                    "entries": [
                        [blk, int(r), int(c), float(v)] for blk, r, c, v in p.entries
                    ],
                }
                for p in self.params
            ],
            "overlaps": {f"{a}|{b}": n for (a, b), n in sorted(self.overlaps.items())},
        }


def _block_of(ct):
    """coordinate -> block index, block-local offset."""
    blk = np.empty(ct.n, dtype=int)
    loc = np.empty(ct.n, dtype=int)
    for k, sl in enumerate(ct.block_slices()):
        idx = np.arange(sl.start, sl.stop)
        blk[idx] = k
        loc[idx] = idx - sl.start
    return blk, loc


def sensitivity(ct, net, part, params, sens_tol=1e-10, check_partition=True,
                allow_missing=False):
    """Sensitivity map of B with respect to each edge parameter.

    Perturbation directions are structural (unit symmetric edge matrices)
    with T fixed at the nominal point. Warns when the perturbed network
    breaks equitability of the nominal partition.
    """
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise ValueError("parameter names must be unique")
    t_perm = ct.T_perm()
    blk, loc = _block_of(ct)
    a = net.adjacency

    results = []
    for p in params:
        i, j = p.edge
        if not (0 <= i < net.n_nodes and 0 <= j < net.n_nodes):
            raise ValueError(f"parameter {p.name!r}: edge {p.edge} out of range")
        if a[i, j] == 0.0 and not allow_missing:
            raise ValueError(
                f"parameter {p.name!r}: edge {p.edge} not in the network support "
                f"(pass allow_missing=True to declare it addable)"
            )
        if check_partition:
            for delta in (+1.0, -1.0):
                pert = np.asarray(a).copy()
                pert[i, j] += delta
                pert[j, i] += delta
                ok, witness = check_equitable(Network(pert, net.node_labels), part.cells)
                if not ok:
                    warnings.warn(
                        f"parameter {p.name!r} at {delta:+g} breaks equitability "
                        f"of the nominal partition (witness {witness})"
                    )
                    break

        ti = t_perm[part.perm[i], :]
        tj = t_perm[part.perm[j], :]
        db = np.outer(ti, tj) + np.outer(tj, ti)
        us, vs = np.nonzero(np.abs(db) > sens_tol)
        entries = []
        coords = set()
        for u, v in zip(us, vs):
            if u > v:
                continue
            coords.add((int(u), int(v)))
            if blk[u] == blk[v]:
                entries.append((int(blk[u]), int(loc[u]), int(loc[v]), float(db[u, v])))
            else:
                entries.append((None, int(u), int(v), float(db[u, v])))
        entries.sort(key=lambda e: (e[0] is None, e[0] if e[0] is not None else -1, e[1], e[2]))
        results.append(ParamSensitivity(p.name, tuple(entries), frozenset(coords)))

    overlaps = {}
    for x in range(len(results)):
        for y in range(x + 1, len(results)):
            overlaps[(results[x].name, results[y].name)] = len(
                results[x].coords & results[y].coords
            )
    return SensitivityReport(tuple(results), overlaps)
