"""Finite-state Markov jump-process environments.

An environment is an irreducible continuous-time Markov chain with a positive
bounded observable per state.  Besides path sampling, this module exposes the
two deterministic limit constants of the environment: the stationary average
of the observable and its Green-Kubo asymptotic variance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.stats import poisson  # noqa: F401  (re-exported convenience for tests)

_ROW_SUM_TOL = 1e-12
_POISSON_EQ_TOL = 1e-10


@dataclass(frozen=True)
class MarkovEnvironment:
    """Irreducible finite-state Markov jump process with observable ``psi``.

    ``generator`` is the d x d rate matrix (rows sum to zero, off-diagonals
    nonnegative), ``rho0`` the initial law and ``psi`` the per-state value of
    the observable.  ``strict_psi=False`` admits psi values that are merely
    nonnegative; it exists for closed-form test fixtures such as the 2-state
    indicator observable and must not be used in production configs.
    """

    generator: np.ndarray
    psi: np.ndarray
    rho0: np.ndarray | None = None
    strict_psi: bool = True

    def __post_init__(self):
        q = np.array(self.generator, dtype=float)
        psi = np.array(self.psi, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"generator must be square, got shape {q.shape}")
        d = q.shape[0]
        off = q - np.diag(np.diag(q))
        if np.any(off < 0):
            raise ValueError("off-diagonal generator entries must be nonnegative")
        if np.any(np.abs(q.sum(axis=1)) > _ROW_SUM_TOL):
            raise ValueError("generator rows must sum to zero (tol 1e-12)")
        if psi.shape != (d,):
            raise ValueError(f"psi must have length {d}")
        if self.strict_psi:
            if np.any(psi <= 0):
                raise ValueError("psi must be strictly positive")
        elif np.any(psi < 0):
            raise ValueError("psi must be nonnegative")
        rho0 = np.full(d, 1.0 / d) if self.rho0 is None else np.array(self.rho0, dtype=float)
        if rho0.shape != (d,):
            raise ValueError(f"rho0 must have length {d}")
        if np.any(rho0 < 0) or abs(rho0.sum() - 1.0) > _ROW_SUM_TOL:
            raise ValueError("rho0 must be a probability vector (tol 1e-12)")
        if d > 1:
            n_comp, _ = connected_components(off > 0, directed=True, connection="strong")
            if n_comp != 1:
                raise ValueError("chain must be irreducible (single communicating class)")
        object.__setattr__(self, "generator", q)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "rho0", rho0)
        for arr in (q, psi, rho0):
            arr.setflags(write=False)

    @property
    def n_states(self) -> int:
        return self.generator.shape[0]


@dataclass(frozen=True)
class EnvPath:
    """One RCLL realization: jump times (starting at 0) and the state held
    from each jump time until the next one (or the horizon)."""

    horizon: float
    jump_times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        jt = np.asarray(self.jump_times, dtype=float)
        st = np.asarray(self.states, dtype=np.int64)
        if jt.size == 0 or jt[0] != 0.0:
            raise ValueError("jump_times must start at 0")
        if np.any(np.diff(jt) <= 0):
            raise ValueError("jump_times must be strictly increasing")
        if jt[-1] > self.horizon:
            raise ValueError("last jump time exceeds horizon")
        if st.shape != jt.shape:
            raise ValueError("states and jump_times must have equal length")
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "states", st)
        jt.setflags(write=False)
        st.setflags(write=False)

    def state_at(self, t):
        """Right-continuous state evaluation; vectorized over ``t``."""
        idx = np.searchsorted(self.jump_times, np.asarray(t, dtype=float), side="right") - 1
        return self.states[idx]

    def integrate_values(self, values: np.ndarray, t: float) -> float:
        """Exact int_0^t values[state(u)] du from the piecewise-constant path."""
        if not 0.0 <= t <= self.horizon:
            raise ValueError(f"t={t} outside path horizon {self.horizon}")
        jt = self.jump_times
        k = int(np.searchsorted(jt, t, side="right"))
        ends = np.append(jt[1:k], t)
        durations = ends - jt[:k]
        return float(np.dot(durations, values[self.states[:k]]))


def stationary_distribution(env: MarkovEnvironment) -> np.ndarray:
    """Invariant law pi solving pi Q = 0, sum(pi) = 1."""
    d = env.n_states
    a = np.vstack([env.generator.T, np.ones(d)])
    b = np.zeros(d + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.abs(pi @ env.generator).max()
    if residual > 1e-10:
        raise ArithmeticError(f"stationary solve residual {residual:.2e} exceeds 1e-10")
    return pi


def psi_bar(env: MarkovEnvironment) -> float:
    """Stationary mean of the observable."""
    return float(stationary_distribution(env) @ env.psi)


def green_kubo_sigma_sq(env: MarkovEnvironment) -> float:
    """Asymptotic variance of the time-averaged observable.

    Solves the Poisson equation (-Q) u = psi_hat on the pi-centered subspace
    (pinned by the constraint <pi, u> = 0) and returns 2 <psi_hat, u>_pi.
    """
    pi = stationary_distribution(env)
    psi_hat = env.psi - pi @ env.psi
    d = env.n_states
    a = np.vstack([-env.generator, pi])
    b = np.append(psi_hat, 0.0)
    u, *_ = np.linalg.lstsq(a, b, rcond=None)
    residual = np.abs(-env.generator @ u - psi_hat).max()
    if residual > _POISSON_EQ_TOL:
        raise ArithmeticError(f"Poisson equation residual {residual:.2e} exceeds 1e-10")
    sigma_sq = 2.0 * float(np.sum(pi * psi_hat * u))
    return max(sigma_sq, 0.0)


def sample_path(env: MarkovEnvironment, horizon: float, rng: np.random.Generator) -> EnvPath:
    """Jump-chain/holding-time construction of one path on [0, horizon]."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    q = env.generator
    rates = -np.diag(q)
    state = int(rng.choice(env.n_states, p=env.rho0))
    d = env.n_states

    if d == 2 and rates[0] > 0 and rates[1] > 0:
        # two-state chains alternate deterministically; sample holding times in blocks
        times = [0.0]
        states = [state]
        t = 0.0
        cur = state
        while True:
            block = max(64, int(horizon * max(rates) * 0.2))
            hold = rng.exponential(size=block)
            for h in hold:
                t += h / rates[cur]
                if t >= horizon:
                    return EnvPath(horizon, np.array(times), np.array(states, dtype=np.int64))
                cur = 1 - cur
                times.append(t)
                states.append(cur)

    # general case: sequential jump-chain simulation
    jump_probs = np.where(rates[:, None] > 0, q / np.where(rates[:, None] > 0, rates[:, None], 1.0), 0.0)
    np.fill_diagonal(jump_probs, 0.0)
    cum_probs = np.cumsum(jump_probs, axis=1)
    times = [0.0]
    states = [state]
    t = 0.0
    while True:
        rate = rates[state]
        if rate <= 0:  # absorbing (frozen) state
            break
        t += rng.exponential(1.0 / rate)
        if t >= horizon:
            break
        state = int(np.searchsorted(cum_probs[state], rng.random()))
        times.append(t)
        states.append(state)
    return EnvPath(horizon, np.array(times), np.array(states, dtype=np.int64))


def time_average_psi(path: EnvPath, env: MarkovEnvironment, t: float) -> float:
    """Exact t^-1 int_0^t psi(Z_u) du from the piecewise-constant path."""
    if not 0.0 < t <= path.horizon:
        raise ValueError(f"t={t} must lie in (0, horizon={path.horizon}]")
    return path.integrate_values(env.psi, t) / t


def environment_fclt_probe(
    env: MarkovEnvironment,
    epsilon: float,
    t: float,
    replications: int,
    rngs,
) -> np.ndarray:
    """IID draws of the rescaled centered occupation integral

        Y(t) = eps^-1/2 * int_0^t (psi(Z_{s/eps}) - psi_bar) ds,

    each computed exactly by piecewise integration.  ``rngs`` is an iterable
    of per-replication generators (or a single generator reused throughout).
    """
    if epsilon <= 0 or t <= 0:
        raise ValueError("epsilon and t must be positive")
    pbar = psi_bar(env)
    if isinstance(rngs, np.random.Generator):
        rngs = (rngs for _ in range(replications))
    out = np.empty(replications)
    fast_horizon = t / epsilon
    for i, rng in zip(range(replications), rngs):
        path = sample_path(env, fast_horizon, rng)
        occ = epsilon * path.integrate_values(env.psi, fast_horizon)
        out[i] = (occ - pbar * t) / np.sqrt(epsilon)
    return out
