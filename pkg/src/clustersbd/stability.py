"""Variational systems along the cluster-synchronous trajectory.

The quotient network is integrated with fixed-step RK4; the full and
transformed variational equations are evaluated matrix-free (per node /
per coordinate accumulation) and must agree exactly under conjugation by
the canonical transform. Transverse Lyapunov exponents come from the
standard QR-reorthonormalization method on a per-block frame.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DynamicsSpec",
    "QuotientTrajectory",
    "TrajectoryParams",
    "DivergenceError",
    "linear_dynamics",
    "lorenz_dynamics",
    "dynamics_preset",
    "validate_jacobians",
    "quotient_integrate",
    "full_variational_rhs",
    "transformed_variational_rhs",
    "integrate_rk4",
    "transverse_exponents",
    "exponent_records",
]


class DivergenceError(RuntimeError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"trajectory left the finite range at t={t:.6g}")


@dataclass(frozen=True)
class DynamicsSpec:
    """Node vector field F, coupling H, and their Jacobians on m-dim states."""

    m: int
    F: callable
    H: callable
    DF: callable
    DH: callable
    name: str = "custom"
    params: dict = field(default_factory=dict)


def _fd_jacobian(f, m, rel_step=1e-6):
    def jac(x):
        x = np.asarray(x, dtype=float)
        out = np.empty((m, m))
        for j in range(m):
            h = rel_step * max(1.0, abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            out[:, j] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2 * h)
        return out

    return jac


def dynamics_from_functions(m, f, h, name="custom", params=None):
    """Wrap plain F/H with central-difference Jacobians (step 1e-6 relative)."""
    return DynamicsSpec(
        m=m, F=f, H=h, DF=_fd_jacobian(f, m), DH=_fd_jacobian(h, m),
        name=name, params=dict(params or {}),
    )


def linear_dynamics(a=0.1, h=-0.5):
    """Scalar linear node dynamics: F(x) = a x, H(x) = h x.

    Closed form for every pipeline quantity; block exponents are exactly
    a + h * eig(B_hat)."""
    df = np.array([[a]])
    dh = np.array([[h]])
    return DynamicsSpec(
        m=1,
        F=lambda x: a * np.asarray(x),
        H=lambda x: h * np.asarray(x),
        DF=lambda x: df,
        DH=lambda x: dh,
        name="linear",
        params={"a": a, "h": h},
    )


def lorenz_dynamics(sigma=10.0, rho=28.0, beta=8.0 / 3.0, coupling=0.1):
    """Chaotic 3-d flow coupled through the first state component."""

    def f(x):
        return np.array(
            [
                sigma * (x[1] - x[0]),
                x[0] * (rho - x[2]) - x[1],
                x[0] * x[1] - beta * x[2],
            ]
        )

    def df(x):
        return np.array(
            [
                [-sigma, sigma, 0.0],
                [rho - x[2], -1.0, -x[0]],
                [x[1], x[0], -beta],
            ]
        )

    dh = np.zeros((3, 3))
    dh[0, 0] = coupling

    return DynamicsSpec(
        m=3,
        F=f,
        H=lambda x: np.array([coupling * x[0], 0.0, 0.0]),
        DF=df,
        DH=lambda x: dh,
        name="lorenz",
        params={"sigma": sigma, "rho": rho, "beta": beta, "coupling": coupling},
    )


_PRESETS = {"linear": linear_dynamics, "lorenz": lorenz_dynamics}


def dynamics_preset(name, **params):
    if name not in _PRESETS:
        raise ValueError(f"unknown dynamics preset {name!r}; have {sorted(_PRESETS)}")
    return _PRESETS[name](**params)


def validate_jacobians(dyn, seed=0, n_points=5, rtol=1e-4):
    """Check DF/DH against central differences at random points."""
    rng = np.random.default_rng(seed)
    fd_f = _fd_jacobian(dyn.F, dyn.m)
    fd_h = _fd_jacobian(dyn.H, dyn.m)
    worst = 0.0
    for _ in range(n_points):
        x = rng.standard_normal(dyn.m)
        for jac, ref in ((dyn.DF, fd_f), (dyn.DH, fd_h)):
            a = np.asarray(jac(x), dtype=float)
            b = ref(x)
            scale = max(1.0, float(np.linalg.norm(b)))
            worst = max(worst, float(np.linalg.norm(a - b)) / scale)
    if worst > rtol:
        raise ValueError(f"analytic Jacobians deviate {worst:.2e} from finite differences")
    return worst


@dataclass(frozen=True)
class QuotientTrajectory:
    """Fixed-grid quotient-network trajectory s_1(t)..s_C(t)."""

    times: np.ndarray  # (n_steps + 1,)
    states: np.ndarray  # (n_steps + 1, C, m)
    scheme: str
    dt: float

    def state_at(self, t):
        """Linear interpolation between grid points, clipped to the range."""
        times = self.times
        if t <= times[0]:
            return self.states[0]
        if t >= times[-1]:
            return self.states[-1]
        k = int(np.searchsorted(times, t) - 1)
        w = (t - times[k]) / (times[k + 1] - times[k])
        return (1 - w) * self.states[k] + w * self.states[k + 1]


@dataclass(frozen=True)
class TrajectoryParams:
    x0: np.ndarray
    t_end: float
    dt: float
    reorth_every: int = 10
    transient_frac: float = 0.2


def _rk4_step(rhs, t, y, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_rk4(rhs, y0, t_end, dt):
    """Fixed-step RK4; returns (times, states) with divergence detection."""
    n_steps = int(round(t_end / dt))
    y = np.asarray(y0, dtype=float).copy()
    times = np.linspace(0.0, n_steps * dt, n_steps + 1)
    out = np.empty((n_steps + 1,) + y.shape)
    out[0] = y
    for k in range(n_steps):
        y = _rk4_step(rhs, times[k], y, dt)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(times[k + 1])
        out[k + 1] = y
    return times, out


def quotient_integrate(ind, dyn, x0, t_end, dt):
    """Integrate ds_k/dt = F(s_k) + sum_l Q_kl H(s_l) with fixed-step RK4."""
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    q = ind.Q
    c = q.shape[0]
    x0 = np.asarray(x0, dtype=float).reshape(c, dyn.m)

    def rhs(_t, s):
        hs = np.stack([np.asarray(dyn.H(s[k])) for k in range(c)])
        fs = np.stack([np.asarray(dyn.F(s[k])) for k in range(c)])
        return fs + q @ hs

    times, states = integrate_rk4(rhs, x0, t_end, dt)
    return QuotientTrajectory(times, states, "rk4", float(dt))


def _cluster_jacobians(dyn, s):
    dfs = [np.atleast_2d(np.asarray(dyn.DF(s[k]), dtype=float)) for k in range(len(s))]
    dhs = [np.atleast_2d(np.asarray(dyn.DH(s[k]), dtype=float)) for k in range(len(s))]
    return dfs, dhs


def _variational_rhs(coupling, coord_cluster, dyn, traj, t, vec):
    """Shared form: d/dt vec_u = DF(s_{c(u)}) vec_u + sum_v M_uv DH(s_{c(v)}) vec_v
    evaluated without forming the (N m) x (N m) matrix."""
    n = coupling.shape[0]
    s = traj.state_at(t)
    dfs, dhs = _cluster_jacobians(dyn, s)
    x = np.asarray(vec, dtype=float).reshape(n, dyn.m)
    out = np.empty_like(x)
    hx = np.empty_like(x)
    for k in range(len(dfs)):
        rows = coord_cluster == k
        out[rows] = x[rows] @ dfs[k].T
        hx[rows] = x[rows] @ dhs[k].T
    out += coupling @ hx
    return out.reshape(-1)


def full_variational_rhs(ind, dyn, traj, t, dx):
    """Right-hand side of the full variational equation (cluster-contiguous
    node order)."""
    coord_cluster = np.repeat(np.arange(ind.n_cells), ind.sizes)
    return _variational_rhs(ind.adjacency, coord_cluster, dyn, traj, t, dx)


def transformed_variational_rhs(ct, dyn, traj, t, eta):
    """Right-hand side of the block-diagonal transformed variational
    equation; evaluable per block independently."""
    return _variational_rhs(ct.B, ct.coord_cluster, dyn, traj, t, eta)


def _block_matrix(bt, dyn, s):
    """Dense (beta m) x (beta m) variational matrix of one block tuple."""
    dfs, dhs = _cluster_jacobians(dyn, s)
    beta = bt.size
    m = dyn.m
    out = np.zeros((beta * m, beta * m))
    for k, j_diag in enumerate(bt.J_hats):
        if not np.any(j_diag):
            continue
        out += np.kron(np.diag(j_diag), dfs[k])
        out += np.kron(bt.B_hat * j_diag[np.newaxis, :], dhs[k])
    return out


def transverse_exponents(bt, dyn, ind, params):
    """Lyapunov spectrum of one block tuple along the quotient trajectory.

    Integrates an orthonormal frame with RK4, re-orthonormalizing by QR
    every ``reorth_every`` steps and discarding the leading
    ``transient_frac`` of the QR events; exponents sorted descending.
    """
    if bt.block_class == "parallel":
        warnings.warn(
            "exponents of a parallel block include the quotient network's own"
        )
    traj = quotient_integrate(ind, dyn, params.x0, params.t_end, params.dt)
    dim = bt.size * dyn.m
    z = np.eye(dim)
    dt = params.dt
    n_steps = len(traj.times) - 1

    def rhs(t, y):
        return _block_matrix(bt, dyn, traj.state_at(t)) @ y

    events = []
    for k in range(n_steps):
        z = _rk4_step(rhs, traj.times[k], z, dt)
        if (k + 1) % params.reorth_every == 0 or k == n_steps - 1:
            q, r = np.linalg.qr(z)
            diag = np.diagonal(r).copy()
            signs = np.where(diag < 0, -1.0, 1.0)
            q = q * signs
            diag = np.abs(diag)
            if np.any(diag == 0):
                raise DivergenceError(traj.times[k + 1])
            events.append((traj.times[k + 1], np.log(diag)))
            z = q
    k0 = int(np.floor(params.transient_frac * len(events)))
    if k0 >= len(events):
        k0 = len(events) - 1
    t_start = events[k0 - 1][0] if k0 > 0 else 0.0
    logs = np.sum([lg for t, lg in events[k0:]], axis=0)
    span = events[-1][0] - t_start
    return np.sort(logs / span)[::-1]


def exponent_records(ct, ind, dyn, params, blocks=None):
    """(block index, class, exponents) per block; transverse by default."""
    from .transform import block_tuples

    out = []
    for bt in block_tuples(ct, ind):
        if blocks is not None and bt.index not in blocks:
            continue
        if blocks is None and bt.block_class != "transverse":
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            exps = transverse_exponents(bt, dyn, ind, params)
        out.append((bt.index, bt.block_class, exps))
    return out
