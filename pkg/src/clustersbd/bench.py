"""Timing harness: canonical reduced-nullspace method vs the full-commutant
baseline that solves for P over all N^2 unknowns.

The baseline never exploits the block structure of P: its constraint system
stacks the commutators with A and with every indicator matrix over a full
N x N unknown. Below ``DENSE_LIMIT`` unknowns that system's Gram matrix is
eigendecomposed densely; above it, a random symmetric seed is projected onto
the commutant matrix-free with LSQR (the N^2-dimensional normal equations
cannot be materialized at benchmark sizes).
"""

from __future__ import annotations

import time
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import commutant as _commutant
from .transform import build_transform, support_components

__all__ = ["BenchRecord", "baseline_sbd", "run_bench", "records_to_csv", "CSV_HEADER"]

DENSE_LIMIT = 1200  # max N^2 for the dense full-commutant path

CSV_HEADER = "name,N,E,N_ntc,max_cluster,t_baseline_s,t_canonical_s,blocks_agree"


@dataclass(frozen=True)
class BenchRecord:
    name: str
    n_nodes: int
    n_edges: int
    n_nontrivial: int
    max_cluster: int
    t_baseline: float
    t_canonical: float
    blocks_canonical: tuple
    blocks_baseline: tuple

    @property
    def blocks_agree(self):
        return Counter(self.blocks_canonical) == Counter(self.blocks_baseline)


def _full_commutant_dense(a, e_diags, tol_rel):
    """Nullspace basis of the stacked commutator constraints, all N^2
    unknowns, via dense eigh of the Gram matrix."""
    n = a.shape[0]
    eye = np.eye(n)
    k = np.kron(a, eye) - np.kron(eye, a)
    sts = k @ k  # K is symmetric for symmetric A
    # indicator constraints are diagonal in vec space:
    # sum_k ((e_k)_u - (e_k)_v)^2 = 2 * [cluster(u) != cluster(v)]
    cluster = np.zeros(n, dtype=int)
    for idx, diag in enumerate(e_diags):
        cluster[diag > 0] = idx
    mask = (cluster[:, None] != cluster[None, :]).astype(float).reshape(-1)
    sts[np.arange(n * n), np.arange(n * n)] += 2.0 * mask
    vals, vecs = scipy.linalg.eigh(sts)
    thr = tol_rel * max(float(vals[-1]), 0.0)
    dim = int(np.count_nonzero(vals <= thr))
    if dim == 0:
        raise _commutant.NullspaceError(
            "empty full-commutant nullspace", vals[:10].tolist()
        )
    return vecs[:, :dim].T


def _project_commutant(a, e_diags, rng, atol=1e-12, iter_lim=None):
    """Project a random symmetric seed onto the commutant, matrix-free.

    The constraint operator maps vec(P) to the stacked commutators
    [A,P], [E_1,P], .., [E_C,P]; LSQR solves for the row-space part of the
    seed and the remainder is the nullspace projection.
    """
    n = a.shape[0]
    c = len(e_diags)
    shape = ((c + 1) * n * n, n * n)

    def matvec(x):
        p = x.reshape(n, n)
        out = np.empty((c + 1, n, n))
        out[0] = a @ p - p @ a
        for k, d in enumerate(e_diags):
            out[k + 1] = d[:, None] * p - p * d[None, :]
        return out.reshape(-1)

    def rmatvec(y):
        ys = y.reshape(c + 1, n, n)
        out = a @ ys[0] - ys[0] @ a
        for k, d in enumerate(e_diags):
            out += d[:, None] * ys[k + 1] - ys[k + 1] * d[None, :]
        return out.reshape(-1)

    op = scipy.sparse.linalg.LinearOperator(shape, matvec=matvec, rmatvec=rmatvec)
    r = rng.standard_normal((n, n))
    r = 0.5 * (r + r.T)
    b = matvec(r.reshape(-1))
    if iter_lim is None:
        iter_lim = 50 * n
    x = scipy.sparse.linalg.lsqr(
        op, b, atol=atol, btol=atol, iter_lim=iter_lim
    )[0]
    p = r - x.reshape(n, n)
    return 0.5 * (p + p.T)


def baseline_sbd(net, ind, seed=0, tol_rel=1e-9, eps_zero_rel=1e-8,
                 gap_tol=1e-6, max_retries=5):
    """Simultaneous block diagonalization of {A, E_1..E_C} over the full
    N x N commutant (no block structure assumed).

    Returns (T_tilde, block sizes); blocks are connected components of the
    joint thresholded support of all C+1 transformed matrices.
    """
    a = ind.adjacency
    n = a.shape[0]
    e_diags = [ind.E[k] for k in range(ind.n_cells)]

    dense = n * n <= DENSE_LIMIT
    if dense:
        basis = _full_commutant_dense(a, e_diags, tol_rel)

    best = None
    for attempt in range(max_retries + 1):
        rng = np.random.default_rng(seed + attempt)
        if dense:
            coeffs = rng.standard_normal(basis.shape[0])
            p = (coeffs @ basis).reshape(n, n)
            p = 0.5 * (p + p.T)
        else:
            p = _project_commutant(a, e_diags, rng)
        w = np.linalg.eigvalsh(p)
        spread = float(w[-1] - w[0])
        gap = float(np.min(np.diff(w))) / spread if spread > 0 else 0.0
        if best is None or gap > best[0]:
            best = (gap, p)
        if gap >= gap_tol:
            break
    p = best[1]

    _, t_tilde = scipy.linalg.eigh(p)
    b = t_tilde.T @ a @ t_tilde
    mask = np.abs(b) > eps_zero_rel * np.linalg.norm(a)
    for k, d in enumerate(e_diags):
        rows = t_tilde[d > 0, :]
        j_k = rows.T @ rows
        mask |= np.abs(j_k) > eps_zero_rel * np.sqrt(float(d.sum()))
    np.fill_diagonal(mask, False)
    comps = support_components(mask)
    sizes = tuple(sorted(len(c) for c in comps))
    return t_tilde, sizes


def _time_canonical(net, ind, part, seed, tol_rel, eps_zero_rel):
    t0 = time.perf_counter()
    prob = _commutant.assemble_problem(net, ind, part)
    basis = _commutant.nullspace(prob, tol_rel=tol_rel)
    element = _commutant.sample_element(basis, seed)
    ct = build_transform(net, ind, part, element, eps_zero_rel=eps_zero_rel)
    elapsed = time.perf_counter() - t0
    return elapsed, tuple(sorted(ct.block_sizes))


def _time_baseline(net, ind, seed, tol_rel, eps_zero_rel):
    t0 = time.perf_counter()
    _, sizes = baseline_sbd(net, ind, seed=seed, tol_rel=tol_rel,
                            eps_zero_rel=eps_zero_rel)
    return time.perf_counter() - t0, sizes


def run_bench(instances, repeats=3, seed=0, tol_rel=1e-9, eps_zero_rel=1e-8):
    """Median wall-clock of both methods on (name, Network, Partition,
    IndicatorSet) instances; one warm-up run per method is discarded.

    Block-multiset disagreement is recorded (blocks_agree=False), not fatal.
    """
    if repeats < 3:
        raise ValueError("repeats must be >= 3")
    records = []
    for name, net, part, ind in instances:
        _time_canonical(net, ind, part, seed, tol_rel, eps_zero_rel)  # warm-up
        _time_baseline(net, ind, seed, tol_rel, eps_zero_rel)  # warm-up
        t_canon, t_base = [], []
        blocks_c = blocks_b = None
        for r in range(repeats):
            tc, blocks_c = _time_canonical(net, ind, part, seed, tol_rel, eps_zero_rel)
            t_canon.append(tc)
        for r in range(repeats):
            tb, blocks_b = _time_baseline(net, ind, seed, tol_rel, eps_zero_rel)
            t_base.append(tb)
        rec = BenchRecord(
            name=name,
            n_nodes=net.n_nodes,
            n_edges=net.n_edges,
            n_nontrivial=sum(1 for s in part.sizes if s > 1),
            max_cluster=max(part.sizes),
            t_baseline=float(np.median(t_base)),
            t_canonical=float(np.median(t_canon)),
            blocks_canonical=blocks_c,
            blocks_baseline=blocks_b,
        )
        if not rec.blocks_agree:
            warnings.warn(
                f"{name}: block multisets disagree "
                f"(canonical {blocks_c} vs baseline {blocks_b})"
            )
        records.append(rec)
    return records


def records_to_csv(records):
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.name},{r.n_nodes},{r.n_edges},{r.n_nontrivial},{r.max_cluster},"
            f"{r.t_baseline:.6f},{r.t_canonical:.6f},{str(r.blocks_agree).lower()}"
        )
    return "\n".join(lines) + "\n"
