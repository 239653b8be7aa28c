"""Commutant of {A, E_1..E_C}: constraint Gram matrix, nullspace, sampling.

A block-diagonal P = diag(P_1..P_C) commutes with A iff
P_i A_ij - A_ij P_j = 0 for all cluster pairs (i, j); vectorized, each pair
contributes rows (A_ij^T kron I_{n_i} | -(I_{n_j} kron A_ij)) touching only
the column blocks of vec(P_i) and vec(P_j). The Gram matrix S^T S is
accumulated pair by pair, never materializing the N^2-row stack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "CommutantProblem",
    "CommutantBasis",
    "CommutantElement",
    "NullspaceError",
    "assemble_problem",
    "constraint_matrix",
    "nullspace",
    "spectrum_tail",
    "sample_element",
    "commutator_residual",
]


class NullspaceError(RuntimeError):
    """Numerical-tolerance failure: the identity direction was not found."""

    def __init__(self, message, tail):
        self.tail = tail
        super().__init__(f"{message}; smallest eigenvalues: {tail}")


@dataclass(frozen=True)
class CommutantProblem:
    """Assembled constraint system for one network + equitable partition."""

    sizes: tuple
    block_rows: tuple  # C x C tuple of A_ij sub-blocks, cluster order
    sts: np.ndarray

    @property
    def n_cols(self):
        return int(self.sts.shape[0])

    @property
    def n_rows(self):
        n = sum(self.sizes)
        return n * n

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum([s * s for s in self.sizes])])


@dataclass(frozen=True)
class CommutantBasis:
    """Orthonormal basis of the numerical nullspace, one row per element."""

    sizes: tuple
    vectors: np.ndarray  # (dim, N_c)

    @property
    def dim(self):
        return int(self.vectors.shape[0])

    def blocks_of(self, vector):
        """Reshape a length-N_c coefficient vector into (P_1..P_C)."""
        out = []
        pos = 0
        for s in self.sizes:
            out.append(vector[pos:pos + s * s].reshape(s, s).copy())
            pos += s * s
        return out


@dataclass(frozen=True)
class CommutantElement:
    """A sampled symmetric element P = diag(P_1..P_C) of the commutant."""

    blocks: tuple
    seed: int
    min_rel_gap: float
    degenerate: bool

    @property
    def sizes(self):
        return tuple(b.shape[0] for b in self.blocks)

    def full(self):
        return scipy.linalg.block_diag(*self.blocks)


def _adjacency_blocks(ind, part):
    sizes = part.sizes
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    a = ind.adjacency
    return tuple(
        tuple(
            a[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]]
            for j in range(len(sizes))
        )
        for i in range(len(sizes))
    )


def assemble_problem(net, ind, part, method="gram"):
    """Form S^T S for the pairwise commutation constraints.

    ``method="gram"`` accumulates per-pair Gram contributions in a fixed
    (i, j) order; ``method="explicit"`` materializes S first (test-scale
    cross-check only).
    """
    blocks = _adjacency_blocks(ind, part)
    sizes = part.sizes
    c = len(sizes)
    col_off = np.concatenate([[0], np.cumsum([s * s for s in sizes])])
    n_c = int(col_off[-1])

    if method == "explicit":
        s = constraint_matrix(ind, part)
        sts = s.T @ s
    elif method == "gram":
        sts = np.zeros((n_c, n_c))

        def cols(k):
            return slice(col_off[k], col_off[k + 1])

        for i in range(c):
            a_ii = blocks[i][i]
            eye = np.eye(sizes[i])
            abar = np.kron(a_ii.T, eye) - np.kron(eye, a_ii)
            sts[cols(i), cols(i)] += abar.T @ abar
        for i in range(c):
            for j in range(i + 1, c):
                if not np.any(blocks[i][j]):
                    continue
                # two row groups per unordered pair: (i,j) and (j,i)
                for a, b in ((i, j), (j, i)):
                    a_ab = blocks[a][b]
                    x_a = np.kron(a_ab.T, np.eye(sizes[a]))
                    x_b = -np.kron(np.eye(sizes[b]), a_ab)
                    sts[cols(a), cols(a)] += x_a.T @ x_a
                    sts[cols(a), cols(b)] += x_a.T @ x_b
                    sts[cols(b), cols(a)] += x_b.T @ x_a
                    sts[cols(b), cols(b)] += x_b.T @ x_b
    else:
        raise ValueError(f"unknown method {method!r}")

    sts = 0.5 * (sts + sts.T)
    sts.flags.writeable = False
    return CommutantProblem(tuple(sizes), blocks, sts)


def constraint_matrix(ind, part):
    """Materialize S row-stacked: diagonal groups first, then both row
    groups of each unordered pair. Test-scale instances only."""
    blocks = _adjacency_blocks(ind, part)
    sizes = part.sizes
    c = len(sizes)
    col_off = np.concatenate([[0], np.cumsum([s * s for s in sizes])])
    n_c = int(col_off[-1])

    rows = []
    for i in range(c):
        a_ii = blocks[i][i]
        eye = np.eye(sizes[i])
        group = np.zeros((sizes[i] * sizes[i], n_c))
        group[:, col_off[i]:col_off[i + 1]] = np.kron(a_ii.T, eye) - np.kron(eye, a_ii)
        rows.append(group)
    for i in range(c):
        for j in range(i + 1, c):
            for a, b in ((i, j), (j, i)):
                a_ab = blocks[a][b]
                group = np.zeros((sizes[a] * sizes[b], n_c))
                group[:, col_off[a]:col_off[a + 1]] = np.kron(a_ab.T, np.eye(sizes[a]))
                group[:, col_off[b]:col_off[b + 1]] = -np.kron(np.eye(sizes[b]), a_ab)
                rows.append(group)
    return np.vstack(rows)


def _identity_vector(sizes):
    parts = [np.eye(s).reshape(-1) for s in sizes]
    v = np.concatenate(parts)
    return v / np.linalg.norm(v)


def nullspace(prob, tol_rel=1e-9):
    """Orthonormal nullspace basis of S^T S: eigenvectors with eigenvalue
    <= tol_rel * lambda_max. The identity direction must appear (d >= 1)."""
    vals, vecs = scipy.linalg.eigh(prob.sts)
    lam_max = max(float(vals[-1]), 0.0)
    thr = tol_rel * lam_max
    dim = int(np.count_nonzero(vals <= thr))
    if dim == 0:
        raise NullspaceError(
            "empty numerical nullspace (identity must always commute)",
            vals[: min(10, len(vals))].tolist(),
        )
    basis = vecs[:, :dim].T.copy()
    ident = _identity_vector(prob.sizes)
    cover = float(np.linalg.norm(basis @ ident))
    if cover < 1.0 - 1e-6:
        raise NullspaceError(
            f"identity direction only {cover:.6f}-covered by the nullspace",
            vals[: min(2 * dim + 2, len(vals))].tolist(),
        )
    basis.flags.writeable = False
    return CommutantBasis(prob.sizes, basis)


def spectrum_tail(prob, k):
    """Smallest k eigenvalues of S^T S (tolerance debugging)."""
    vals = scipy.linalg.eigvalsh(prob.sts)
    return vals[: min(k, len(vals))]


def _min_relative_gap(blocks):
    """Smallest consecutive-eigenvalue gap across blocks, relative to each
    block's spectral spread; 1x1 blocks impose nothing."""
    worst = np.inf
    for b in blocks:
        if b.shape[0] < 2:
            continue
        w = np.linalg.eigvalsh(b)
        spread = float(w[-1] - w[0])
        if spread <= 0.0:
            return 0.0
        worst = min(worst, float(np.min(np.diff(w))) / spread)
    return worst


def sample_element(basis, seed, gap_tol=1e-6, max_retries=5):
    """Random symmetric commutant element with well-separated eigenvalues.

    Coefficients are standard-normal draws from ``default_rng(seed)``; if any
    within-block relative eigenvalue gap falls below ``gap_tol`` the draw is
    retried with seed+attempt, keeping the best attempt. Degenerate gaps are
    flagged, not fatal (one-dimensional commutants are legitimately scalar).
    """
    if basis.dim < 1:
        raise ValueError("empty commutant basis")
    best = None
    for attempt in range(max_retries + 1):
        s = seed + attempt
        coeffs = np.random.default_rng(s).standard_normal(basis.dim)
        vec = coeffs @ basis.vectors
        blocks = [0.5 * (b + b.T) for b in basis.blocks_of(vec)]
        gap = _min_relative_gap(blocks)
        if best is None or gap > best[0]:
            best = (gap, s, blocks)
        if gap >= gap_tol:
            break
    gap, used_seed, blocks = best
    for b in blocks:
        b.flags.writeable = False
    return CommutantElement(
        tuple(blocks), used_seed, float(gap), bool(gap < gap_tol)
    )


def commutator_residual(element, ind):
    """Relative Frobenius norm of P A - A P."""
    p = element.full()
    a = ind.adjacency
    denom = np.linalg.norm(a) * max(np.linalg.norm(p), 1e-300)
    return float(np.linalg.norm(p @ a - a @ p) / denom)
