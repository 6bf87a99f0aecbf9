"""Monte-Carlo validation: sample walkers and compare against targets.

Randomness comes from the counter-based Philox generator keyed by the run
seed, with walker i consuming the fixed stream slice [i*(t+1), (i+1)*(t+1)).
Counts therefore depend only on (seed, N, law) -- never on chunking or
thread count -- and the first N' walkers of a run are the same for every
N >= N'.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class EmpiricalLaw:
    """First-arrival counts from N sampled walkers.

    ``counts[j, tau-1]`` walkers first arrived at absorbing state j at time
    tau; ``residual_counts[x]`` walkers survived the window on transient
    state x.  Counts always total N.
    """

    counts: np.ndarray
    residual_counts: np.ndarray
    N: int
    seed: int

    @property
    def arrival_frequencies(self):
        return self.counts / self.N

    @property
    def residual_frequencies(self):
        return self.residual_counts / self.N


def _sample_column(cum, u):
    # scale u into [0, total) so float row sums just below 1 cannot
    # produce an out-of-range index
    return np.searchsorted(cum, u * cum[-1], side="right")


def sample_paths(law, mu0, N, seed):
    """Draw N independent walkers under a staged law.

    Parameters
    ----------
    law : PriorLaw or Policy
    mu0 : array-like, length n
        Starting distribution over transient states.
    N : int
        Number of walkers, at least 1.
    seed : int
        Philox key; identical (seed, N, law) gives identical counts.

    Returns
    -------
    EmpiricalLaw
    """
    if N < 1:
        raise DimensionMismatch(f"need at least one walker, got N={N}")
    space = law.space
    m, n, t = space.m, space.n, law.horizon
    mu0 = np.asarray(mu0, dtype=float)
    if mu0.shape != (n,):
        raise DimensionMismatch(f"mu0 has shape {mu0.shape}, expected ({n},)")

    rng = np.random.Generator(np.random.Philox(key=seed))
    U = rng.random((N, t + 1))

    state = m + _sample_column(np.cumsum(mu0), U[:, 0]).astype(np.int64)
    counts = np.zeros((m, t), dtype=np.int64)
    cums = [np.cumsum(np.hstack([st.B, st.A]), axis=1) for st in law.stages]
    alive = np.arange(N)  # indices of walkers still in play
    for tau in range(1, t + 1):
        if alive.size == 0:
            break
        rows = cums[tau - 1][state[alive] - m]
        totals = rows[:, -1]
        assert np.all(totals > 0), "walker reached a zero (unreachable) row"
        # row-wise inverse CDF: index = #{cells with cum <= u * total}
        u = U[alive, tau] * totals
        nxt = (rows <= u[:, None]).sum(axis=1).astype(np.int64)
        state[alive] = nxt
        just_absorbed = nxt < m
        if just_absorbed.any():
            counts[:, tau - 1] += np.bincount(nxt[just_absorbed], minlength=m)
            alive = alive[~just_absorbed]

    residual = np.bincount(state[state >= m] - m, minlength=n)
    counts.setflags(write=False)
    residual.setflags(write=False)
    assert counts.sum() + residual.sum() == N
    return EmpiricalLaw(counts=counts, residual_counts=residual, N=N, seed=seed)


def empirical_distance(emp, target):
    """(L-infinity, L1) distances between counts/N and a target matrix."""
    target = np.asarray(target, dtype=float)
    if target.shape != emp.counts.shape:
        raise DimensionMismatch(
            f"target shape {target.shape} does not match counts {emp.counts.shape}"
        )
    diff = emp.arrival_frequencies - target
    return float(np.abs(diff).max()), float(np.abs(diff).sum())
