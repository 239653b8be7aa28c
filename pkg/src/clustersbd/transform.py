"""Canonical transformation: per-cluster eigenbases with enforced constant
columns, transformed adjacency, finest common block structure, verification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import commutant as _commutant
from .partition import quotient_spectrum

__all__ = [
    "CanonicalTransform",
    "BlockTuple",
    "CanonicalReport",
    "CanonicalityError",
    "build_transform",
    "block_tuples",
    "verify_canonical",
    "parameter_count",
    "block_report",
    "subspace_sines",
    "block_multiset_over_seeds",
    "canonical_pipeline",
]

# Relative gap under which consecutive eigenvalues of a P_i block are treated
# as one eigenspace; must stay below sample_element's gap_tol so accepted
# samples never straddle it.
_GROUP_RTOL = 1e-7
_ENFORCE_TOL = 1e-8


class CanonicalityError(RuntimeError):
    pass


@dataclass(frozen=True)
class CanonicalTransform:
    """Orthogonal block-diagonal transform and the block structure it induces.

    ``T_blocks[k]`` is the orthogonal basis for cluster k (constant column
    enforced exactly); ``coord_perm[pos] = unpermuted coordinate`` orders
    transformed coordinates into contiguous blocks; ``B`` is the transformed
    adjacency in that block order.
    """

    T_blocks: tuple
    coord_perm: np.ndarray
    B: np.ndarray
    block_sizes: tuple
    block_class: tuple  # "parallel" | "transverse"
    block_clusters: tuple  # per block, sorted cluster indices present
    quotient_coords: tuple  # positions (block order) of the C constant columns
    coord_cluster: np.ndarray  # cluster of each coordinate, block order
    eps_zero: float
    node_order: np.ndarray  # contiguous position -> original node

    @property
    def n(self):
        return self.B.shape[0]

    @property
    def sizes(self):
        return tuple(b.shape[0] for b in self.T_blocks)

    def T(self):
        """Full N x N transform, cluster-contiguous coordinates (unpermuted)."""
        return scipy.linalg.block_diag(*self.T_blocks)

    def T_perm(self):
        """Columns permuted into block order: T_perm^T A_perm T_perm = B."""
        return self.T()[:, self.coord_perm]

    def block_slices(self):
        off = np.concatenate([[0], np.cumsum(self.block_sizes)])
        return [slice(int(off[k]), int(off[k + 1])) for k in range(len(self.block_sizes))]


@dataclass(frozen=True)
class BlockTuple:
    """One decoupled subproblem: B restricted to a block plus the cluster
    indicator diagonals restricted to the same coordinates."""

    index: int
    B_hat: np.ndarray
    J_hats: tuple  # C diagonal 0/1 vectors of length beta
    block_class: str

    @property
    def size(self):
        return self.B_hat.shape[0]


def _group_eigenspaces(vals):
    """Index ranges of near-degenerate eigenvalue groups."""
    n = len(vals)
    spread = float(vals[-1] - vals[0])
    tol = _GROUP_RTOL * max(spread, 1.0)
    groups = []
    start = 0
    for i in range(1, n):
        if vals[i] - vals[i - 1] > tol:
            groups.append((start, i))
            start = i
    groups.append((start, n))
    return groups


def _enforce_constant_column(vals, vecs, cluster_idx):
    """Rotate the eigenspace holding the constant direction so the exact
    vector n^{-1/2} * ones is one of its columns; returns (T_i, col)."""
    n = vecs.shape[0]
    const = np.full(n, 1.0 / np.sqrt(n))
    best = None
    for lo, hi in _group_eigenspaces(vals):
        proj = vecs[:, lo:hi].T @ const
        norm = float(np.linalg.norm(proj))
        if best is None or norm > best[0]:
            best = (norm, lo, hi)
    norm, lo, hi = best
    if norm <= 0.5:
        raise CanonicalityError(
            f"constant direction not found in any eigenspace of cluster "
            f"{cluster_idx} (max projection {norm:.3f}); commutant element "
            f"does not stabilize the quotient subspace"
        )
    sub = vecs[:, lo:hi]
    resid = float(np.linalg.norm(const - sub @ (sub.T @ const)))
    if resid > _ENFORCE_TOL:
        raise CanonicalityError(
            f"constant direction lies {resid:.2e} outside the nearest "
            f"eigenspace of cluster {cluster_idx}"
        )
    q, _ = np.linalg.qr(np.column_stack([const, sub]))
    rotated = q[:, : hi - lo]
    rotated[:, 0] = const  # exact by construction
    out = vecs.copy()
    out[:, lo:hi] = rotated
    return out, lo


def _canonical_signs(t, skip):
    """Flip columns so the largest-magnitude entry is positive."""
    for c in range(t.shape[1]):
        if c == skip:
            continue
        col = t[:, c]
        if col[np.argmax(np.abs(col))] < 0:
            t[:, c] = -col
    return t


def support_components(mask):
    """Connected components of a symmetric boolean support matrix,
    singletons included, each sorted ascending."""
    n = mask.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.nonzero(mask[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        comps.append(sorted(comp))
    return comps


def build_transform(net, ind, part, element, eps_zero_rel=1e-8):
    """Assemble the canonical transform from a sampled commutant element.

    Per cluster, the symmetric eigenbasis of P_i is rotated inside the
    eigenspace containing the constant direction so that the exact vector
    n_i^{-1/2} * ones appears as a column; column signs are canonicalized;
    blocks are the connected components of the thresholded support of
    B = T^T A T, ordered parallel first, then descending size, ties by
    smallest coordinate.
    """
    sizes = part.sizes
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    t_blocks = []
    quotient_unperm = []
    for k, p_k in enumerate(element.blocks):
        if p_k.shape[0] == 1:
            t_k = np.ones((1, 1))
            const_pos = 0
        else:
            vals, vecs = scipy.linalg.eigh(p_k)
            t_k, const_pos = _enforce_constant_column(vals, vecs, k)
            t_k = _canonical_signs(t_k, skip=const_pos)
            orth = np.linalg.norm(t_k.T @ t_k - np.eye(t_k.shape[0]))
            if orth > 1e-10:
                raise CanonicalityError(
                    f"cluster {k} basis lost orthogonality ({orth:.2e})"
                )
        t_blocks.append(t_k)
        quotient_unperm.append(int(offsets[k] + const_pos))

    t = scipy.linalg.block_diag(*t_blocks)
    a_perm = ind.adjacency
    b0 = t.T @ a_perm @ t
    b0 = 0.5 * (b0 + b0.T)
    eps_zero = float(eps_zero_rel * np.linalg.norm(a_perm))

    mask = np.abs(b0) > eps_zero
    np.fill_diagonal(mask, False)
    comps = support_components(mask)

    qset = set(quotient_unperm)
    keyed = sorted(
        comps,
        key=lambda c: (0 if qset & set(c) else 1, -len(c), c[0]),
    )
    coord_perm = np.array([u for comp in keyed for u in comp], dtype=int)
    inv = np.empty_like(coord_perm)
    inv[coord_perm] = np.arange(len(coord_perm))

    coord_cluster_unperm = np.repeat(np.arange(len(sizes)), sizes)
    coord_cluster = coord_cluster_unperm[coord_perm]
    b = b0[np.ix_(coord_perm, coord_perm)]

    block_sizes = tuple(len(c) for c in keyed)
    block_class = tuple(
        "parallel" if qset & set(c) else "transverse" for c in keyed
    )
    block_clusters = tuple(
        tuple(sorted({int(coord_cluster_unperm[u]) for u in comp})) for comp in keyed
    )
    quotient_coords = tuple(sorted(int(inv[u]) for u in quotient_unperm))

    for arr in (b, coord_perm, coord_cluster):
        arr.flags.writeable = False
    return CanonicalTransform(
        T_blocks=tuple(t_blocks),
        coord_perm=coord_perm,
        B=b,
        block_sizes=block_sizes,
        block_class=block_class,
        block_clusters=block_clusters,
        quotient_coords=quotient_coords,
        coord_cluster=coord_cluster,
        eps_zero=eps_zero,
        node_order=part.order,
    )


def block_tuples(ct, ind):
    """The r decoupled (B_hat, J_hat_1..J_hat_C) restrictions in block order."""
    c = ind.n_cells
    out = []
    for k, sl in enumerate(ct.block_slices()):
        clusters = ct.coord_cluster[sl]
        j_hats = tuple(
            (clusters == i).astype(float) for i in range(c)
        )
        out.append(
            BlockTuple(
                index=k,
                B_hat=ct.B[sl, sl].copy(),
                J_hats=j_hats,
                block_class=ct.block_class[k],
            )
        )
    return out


@dataclass(frozen=True)
class CanonicalReport:
    orthogonality: float
    indicator_invariance: float
    off_block_mass: float
    quotient_spectrum_distance: float
    quotient_closure: float
    constant_column_residual: float
    parallel_total: int
    passed: bool

    def as_dict(self):
        return {
            "orthogonality": self.orthogonality,
            "indicator_invariance": self.indicator_invariance,
            "off_block_mass": self.off_block_mass,
            "quotient_spectrum_distance": self.quotient_spectrum_distance,
            "quotient_closure": self.quotient_closure,
            "constant_column_residual": self.constant_column_residual,
            "parallel_total": self.parallel_total,
            "passed": self.passed,
        }


def verify_canonical(ct, ind, tol=1e-8):
    """Max residuals of the canonical contract; passes iff all <= tol
    (block closure is gated at eps_zero * N, its natural scale)."""
    t = ct.T()
    n = ct.n
    orth = float(np.linalg.norm(t.T @ t - np.eye(n)))
    inv_resid = 0.0
    for k in range(ind.n_cells):
        e_k = np.diag(ind.E[k])
        inv_resid = max(inv_resid, float(np.linalg.norm(t.T @ e_k @ t - e_k)))

    off = ct.B.copy()
    for sl in ct.block_slices():
        off[sl, sl] = 0.0
    off_mass = float(np.linalg.norm(off))

    qpos = list(ct.quotient_coords)
    rest = [u for u in range(n) if u not in set(qpos)]
    closure = float(np.linalg.norm(ct.B[np.ix_(rest, qpos)])) if rest else 0.0

    b_par = ct.B[np.ix_(qpos, qpos)]
    par_eigs = sorted(np.linalg.eigvals(b_par), key=lambda z: (z.real, z.imag))
    q_eigs = quotient_spectrum(ind)
    spec_dist = float(max(abs(a - b) for a, b in zip(par_eigs, q_eigs)))

    const_resid = 0.0
    cluster_off = np.concatenate([[0], np.cumsum(ct.sizes)])
    for k, t_k in enumerate(ct.T_blocks):
        n_k = t_k.shape[0]
        const = np.full(n_k, 1.0 / np.sqrt(n_k))
        off_k = int(cluster_off[k])
        col = None
        for pos in ct.quotient_coords:
            u = int(ct.coord_perm[pos])
            if off_k <= u < off_k + n_k:
                col = u - off_k
                break
        if col is None:
            const_resid = np.inf
            continue
        const_resid = max(
            const_resid, float(np.max(np.abs(t_k[:, col] - const)))
        )

    parallel_total = int(
        sum(s for s, c in zip(ct.block_sizes, ct.block_class) if c == "parallel")
    )
    passed = (
        orth <= tol
        and inv_resid <= tol
        and off_mass <= max(tol, ct.eps_zero * n)
        and spec_dist <= tol
        and closure <= ct.eps_zero * n
        and const_resid <= tol
        and parallel_total == ind.n_cells
    )
    return CanonicalReport(
        orthogonality=orth,
        indicator_invariance=inv_resid,
        off_block_mass=off_mass,
        quotient_spectrum_distance=spec_dist,
        quotient_closure=closure,
        constant_column_residual=const_resid,
        parallel_total=parallel_total,
        passed=bool(passed),
    )


def parameter_count(block_sizes, n_cells):
    """(p1, p2): nonzero entries parametrizing the transformed matrices for a
    generic vs a canonical transformation with the given block sizes."""
    half = sum(b * (b + 1) // 2 for b in block_sizes)
    return (n_cells + 1) * half, half


def block_report(ct, ind):
    report = verify_canonical(ct, ind)
    p1, p2 = parameter_count(ct.block_sizes, ind.n_cells)
    return {
        "block_sizes": list(ct.block_sizes),
        "classes": list(ct.block_class),
        "clusters_per_block": [list(c) for c in ct.block_clusters],
        "p1": p1,
        "p2": p2,
        "residuals": report.as_dict(),
    }


def subspace_sines(u, w):
    """Sines of the principal angles between equal-dimension column spans
    (accurate near zero, unlike the arccos route)."""
    u, _ = np.linalg.qr(np.asarray(u, dtype=float))
    w, _ = np.linalg.qr(np.asarray(w, dtype=float))
    resid = w - u @ (u.T @ w)
    return np.linalg.svd(resid, compute_uv=False)


def canonical_pipeline(net, part=None, seed=0, tol_rel=1e-9, eps_zero_rel=1e-8,
                       gap_tol=1e-6, max_retries=5):
    """Partition (coarsest if not given) -> indicators -> commutant ->
    canonical transform. Returns (part, ind, basis, element, ct)."""
    from .partition import build_indicators, coarsest_equitable_partition

    if part is None:
        part = coarsest_equitable_partition(net)
    ind = build_indicators(net, part)
    prob = _commutant.assemble_problem(net, ind, part)
    basis = _commutant.nullspace(prob, tol_rel=tol_rel)
    element = _commutant.sample_element(
        basis, seed, gap_tol=gap_tol, max_retries=max_retries
    )
    ct = build_transform(net, ind, part, element, eps_zero_rel=eps_zero_rel)
    return part, ind, basis, element, ct


def block_multiset_over_seeds(net, part, seeds, **kw):
    """Block-size multisets for several independent seeds; disagreement
    signals a non-generic sample (genericity check)."""
    out = []
    for s in seeds:
        _, _, _, _, ct = canonical_pipeline(net, part=part, seed=s, **kw)
        out.append(tuple(sorted(ct.block_sizes)))
    agree = len(set(out)) == 1
    if not agree:
        warnings.warn(f"block multisets differ across seeds: {out}")
    return out, agree
